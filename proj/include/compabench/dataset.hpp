#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "compabench/config.hpp"
#include "compabench/error.hpp"
#include "compabench/json_io.hpp"
#include "compabench/parser.hpp"
#include "compabench/raster.hpp"
#include "compabench/render.hpp"
#include "compabench/task.hpp"

namespace compabench {

inline constexpr std::string_view kManifestSchema = "compabench.manifest/v1";
inline constexpr std::size_t kTrainSplitSize = 4000;
inline constexpr std::size_t kEvalSplitSize = 500;

struct ManifestHeader {
  std::string schema = std::string(kManifestSchema);
  std::string benchmark_version = std::string(kBenchmarkVersion);
  TaskCode code = TaskCode::MM_GR;
  std::string split = "eval";
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string config_digest;
  std::string rasterizer = rasterizer_identity();
  Config config;
  friend bool operator==(const ManifestHeader& a, const ManifestHeader& b) {
    return a.schema == b.schema && a.benchmark_version == b.benchmark_version && a.code == b.code &&
           a.split == b.split && a.n == b.n && a.seed == b.seed && a.config_digest == b.config_digest &&
           a.rasterizer == b.rasterizer && to_json(a.config) == to_json(b.config);
  }
};

struct DatasetManifest {
  ManifestHeader header;
  std::vector<TaskInstance> records;
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

namespace detail {

inline bool valid_split_name(std::string_view s) {
  return !s.empty() && s.size() <= 32 &&
         std::all_of(s.begin(), s.end(), [](char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; });
}

// Runs fn(i) for i in [0, n) on `jobs` threads; rethrows the exception of the
// lowest failing index.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_index = n;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (i < failed_index) {
            failed_index = i;
            failure = std::current_exception();
          }
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

inline DatasetManifest generate_split(TaskCode code, std::size_t n, std::uint64_t seed, const Config& cfg,
                                      const std::string& split = "eval", unsigned jobs = 1) {
  cfg.validate();
  if (n < 1) throw ConfigError("split size must be at least 1");
  if (!detail::valid_split_name(split)) throw ConfigError("invalid split name '" + split + "'");
  if (split == "train" && eval_only(code) && !cfg.gen.allow_eval_only_train)
    throw ConfigError(std::string(to_string(code)) + " is evaluation-only (set generation.allow_eval_only_train)");

  DatasetManifest m;
  m.header.code = code;
  m.header.split = split;
  m.header.n = n;
  m.header.seed = seed;
  m.header.config = cfg;
  m.header.config_digest = config_digest(cfg);

  std::vector<std::optional<TaskInstance>> slots(n);
  detail::parallel_for(n, jobs, [&](std::size_t i) {
    try {
      slots[i] = generate_instance(code, split, seed, i, cfg.gen);
    } catch (const GenerationExhausted& e) {
      throw GenerationExhausted(e.what(), i);
    }
  });
  m.records.reserve(n);
  for (auto& s : slots) m.records.push_back(std::move(*s));
  return m;
}

inline Json header_to_json(const ManifestHeader& h) {
  return {{"type", "header"},
          {"schema", h.schema},
          {"benchmark_version", h.benchmark_version},
          {"code", std::string(to_string(h.code))},
          {"split", h.split},
          {"n", h.n},
          {"seed", h.seed},
          {"config_digest", h.config_digest},
          {"rasterizer", h.rasterizer},
          {"config", to_json(h.config)}};
}

inline ManifestHeader header_from_json(const Json& j) {
  ManifestHeader h;
  if (detail::get<std::string>(j, "type") != "header") throw SchemaError("first line is not a header record");
  h.schema = detail::get<std::string>(j, "schema");
  if (h.schema != kManifestSchema) throw SchemaError("unsupported schema '" + h.schema + "'");
  h.benchmark_version = detail::get<std::string>(j, "benchmark_version");
  const auto code = task_code_from_string(detail::get<std::string>(j, "code"));
  if (!code) throw SchemaError("unknown task code in header");
  h.code = *code;
  h.split = detail::get<std::string>(j, "split");
  h.n = detail::get<std::size_t>(j, "n");
  h.seed = detail::get<std::uint64_t>(j, "seed");
  h.config_digest = detail::get<std::string>(j, "config_digest");
  h.rasterizer = detail::get<std::string>(j, "rasterizer");
  try {
    h.config = config_from_json(detail::field(j, "config"));
  } catch (const ConfigError& e) {
    throw SchemaError(e.what());
  }
  if (config_digest(h.config) != h.config_digest) throw SchemaError("config digest does not match embedded config");
  return h;
}

struct WriteOptions {
  bool svg = true;
  bool png = true;
  unsigned jobs = 1;
};

// Writes {out}/manifest.jsonl and, for image tasks, {out}/images/{id}.svg/.png.
inline void write_split(const DatasetManifest& m, const std::filesystem::path& out, const RenderSpec& spec,
                        const WriteOptions& opts = {}) {
  namespace fs = std::filesystem;
  fs::create_directories(out);
  {
    std::ofstream f(out / "manifest.jsonl", std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + (out / "manifest.jsonl").string());
    f << header_to_json(m.header).dump() << '\n';
    for (const auto& r : m.records) f << instance_to_json(r).dump() << '\n';
    if (!f) throw Error("write failed for " + (out / "manifest.jsonl").string());
  }
  if (info(m.header.code).pure_text || (!opts.svg && !opts.png)) return;
  fs::create_directories(out / "images");
  detail::parallel_for(m.records.size(), opts.jobs, [&](std::size_t i) {
    const auto& r = m.records[i];
    const std::string svg = render_svg(r.scene, spec);
    if (opts.svg) {
      std::ofstream f(out / "images" / (r.id + ".svg"), std::ios::binary | std::ios::trunc);
      f << svg;
      if (!f) throw Error("cannot write svg for " + r.id);
    }
    if (opts.png) {
      const auto png = rasterize(svg);
      std::ofstream f(out / "images" / (r.id + ".png"), std::ios::binary | std::ios::trunc);
      f.write(reinterpret_cast<const char*>(png.data()), static_cast<std::streamsize>(png.size()));
      if (!f) throw Error("cannot write png for " + r.id);
    }
  });
}

namespace detail {

inline void check_scene_invariants(const TaskInstance& r, const GenConfig& gen) {
  auto fail = [](const std::string& what) { throw SchemaError("scene: " + what); };
  std::vector<Color> colors;
  std::vector<const Shape*> shapes;
  if (const auto* f = std::get_if<FreeScene>(&r.scene)) {
    if (uses_grid(r.code)) fail("free-layout scene for a grid task");
    if (f->canvas_w != gen.canvas_px || f->canvas_h != gen.canvas_px) fail("canvas size differs from config");
    for (std::size_t i = 0; i < f->shapes.size(); ++i) {
      if (!f->reserved_box(i).inside(f->canvas_w, f->canvas_h)) fail("shape outside canvas");
      for (std::size_t k = 0; k < i; ++k)
        if (f->reserved_box(i).intersects(f->reserved_box(k))) fail("overlapping shapes");
      shapes.push_back(&f->shapes[i].shape);
    }
  } else {
    const auto& g = std::get<GridScene>(r.scene);
    if (!uses_grid(r.code)) fail("grid scene for a free-layout task");
    if (g.grid_n < 3 || g.grid_n > 10) fail("grid size outside 3..10");
    if (g.cell_px != gen.grid_cell_px(g.grid_n)) fail("cell size differs from config");
    for (std::size_t i = 0; i < g.placements.size(); ++i) {
      const Cell c = g.placements[i].cell;
      if (c.row < 1 || c.col < 1 || c.row > g.grid_n || c.col > g.grid_n) fail("cell outside grid");
      for (std::size_t k = 0; k < i; ++k)
        if (g.placements[k].cell == c) fail("two shapes share a cell");
      shapes.push_back(&g.placements[i].shape);
    }
  }
  if (shapes.size() < 2 || shapes.size() > 6) fail("shape count outside 2..6");
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto [lo, hi] = shapes[i]->length_range();
    if (lo < gen.dim_min || hi > gen.dim_max) fail("dimension outside configured range");
    for (std::size_t k = 0; k < i; ++k)
      if (shapes[k]->color() == shapes[i]->color()) fail("duplicate color");
  }
}

}  // namespace detail

// Re-validates every record, including ground-truth re-derivation from the
// embedded scene. `path` is a split directory or its manifest.jsonl.
inline DatasetManifest load_split(const std::filesystem::path& path, bool verify_images = true) {
  namespace fs = std::filesystem;
  const fs::path file = fs::is_directory(path) ? path / "manifest.jsonl" : path;
  const fs::path dir = file.parent_path();
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ManifestCorrupt("cannot open " + file.string(), ManifestCorrupt::kHeader);

  DatasetManifest m;
  std::string line;
  if (!std::getline(in, line)) throw ManifestCorrupt("empty manifest", ManifestCorrupt::kHeader);
  try {
    m.header = header_from_json(Json::parse(line));
  } catch (const Json::exception& e) {
    throw ManifestCorrupt(e.what(), ManifestCorrupt::kHeader);
  } catch (const SchemaError& e) {
    throw ManifestCorrupt(e.what(), ManifestCorrupt::kHeader);
  }
  const ManifestHeader& h = m.header;
  std::set<std::string> ids;
  for (std::size_t idx = 0; std::getline(in, line); ++idx) {
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    TaskInstance r;
    try {
      r = instance_from_json(Json::parse(line));
      if (r.code != h.code) throw SchemaError("code differs from header");
      if (r.split != h.split) throw SchemaError("split differs from header");
      if (r.index != idx) throw SchemaError("index out of sequence");
      if (r.seed != derive_seed(h.seed, h.split, idx)) throw SchemaError("seed does not derive from header seed");
      if (r.id != task_id(r.code, h.split, h.seed, idx)) throw SchemaError("id does not match its derivation");
      if (!ids.insert(r.id).second) throw SchemaError("duplicate id");
      const bool pt = info(r.code).pure_text;
      if (pt != r.scene_text.has_value() || pt == r.image_ref.has_value())
        throw SchemaError("exactly one of scene_text / image_ref must be present, matching the task modality");
      if (kind_of(r.answer) != answer_kind(r.code)) throw SchemaError("answer type does not match task code");
      if (const auto* v = std::get_if<IntegerArea>(&r.answer); v && v->value < 1)
        throw SchemaError("integer answer must be >= 1");
      detail::check_scene_invariants(r, h.config.gen);
    } catch (const Json::exception& e) {
      throw ManifestCorrupt(e.what(), idx);
    } catch (const SchemaError& e) {
      throw ManifestCorrupt(e.what(), idx);
    }

    Answer truth;
    try {
      truth = ground_truth(r.scene, r.code, r.gr_mode);
    } catch (const IllPosedScene& e) {
      throw ManifestCorrupt(std::string("ill-posed scene: ") + e.what(), idx);
    }
    if (truth != r.answer)
      throw AnswerMismatch("stored answer " + answer_text(r.answer) + " but the scene gives " + answer_text(truth), idx);

    const TaskInstance expect = make_instance(r.code, r.scene, r.gr_mode);
    if (r.question != expect.question) throw ManifestCorrupt("question does not match its scene", idx);
    if (r.scene_text != expect.scene_text) throw ManifestCorrupt("scene_text does not match its scene", idx);
    if (r.trace != expect.trace) throw ManifestCorrupt("trace does not match its scene", idx);
    if (r.image_ref) {
      if (*r.image_ref != "images/" + r.id + ".png") throw ManifestCorrupt("unexpected image_ref", idx);
      if (verify_images && !fs::exists(dir / *r.image_ref))
        throw ManifestCorrupt("image " + *r.image_ref + " does not exist", idx);
    }
    m.records.push_back(std::move(r));
  }
  if (m.records.size() != h.n)
    throw ManifestCorrupt("header declares " + std::to_string(h.n) + " records, found " + std::to_string(m.records.size()),
                          m.records.size());
  return m;
}

struct SplitPlan {
  TaskCode code;
  std::string split;
  std::size_t n;
};

// Train/eval composition of the full benchmark: 4000 train + 500 eval for each
// individual task, 500 eval for each compositional and OOD task.
inline std::vector<SplitPlan> benchmark_plan() {
  std::vector<SplitPlan> plan;
  for (TaskCode c : kAllTaskCodes) {
    if (!eval_only(c)) plan.push_back({c, "train", kTrainSplitSize});
    plan.push_back({c, "eval", kEvalSplitSize});
  }
  return plan;
}

inline std::filesystem::path split_dir(const std::filesystem::path& root, TaskCode code, const std::string& split) {
  return root / std::string(info(code).cli) / split;
}

// Generates and writes every split of benchmark_plan() under `root`.
inline std::vector<SplitPlan> build_benchmark(const std::filesystem::path& root, std::uint64_t seed, const Config& cfg,
                                              const WriteOptions& opts = {}) {
  const auto plan = benchmark_plan();
  for (const auto& p : plan) {
    const auto m = generate_split(p.code, p.n, seed, cfg, p.split, opts.jobs);
    write_split(m, split_dir(root, p.code, p.split), cfg.render, opts);
  }
  return plan;
}

}  // namespace compabench
