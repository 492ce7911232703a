// compabench: generate, validate, simulate, score and serve.
//
// Exit status: 0 success, 1 usage or configuration error, 2 data error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "compabench/compabench.hpp"
#include "compabench/service.hpp"

namespace cb = compabench;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Data errors that carry a record position.
class DataError : public cb::Error {
 public:
  using cb::Error::Error;
};

std::string code_table() {
  std::string s = "Task codes:\n";
  for (cb::TaskCode c : cb::kAllTaskCodes) {
    const auto& i = cb::info(c);
    s += "  " + std::string(i.cli) + std::string(14 - i.cli.size(), ' ') + std::string(i.name) +
         (cb::eval_only(c) ? "  (eval only)" : "") + "\n";
  }
  return s;
}

cb::Config base_config(const std::string& path) { return path.empty() ? cb::Config{} : cb::load_config(path); }

cb::TaskCode parse_code(const std::string& s) {
  auto c = cb::task_code_from_string(s);
  if (!c) throw cb::ConfigError("unknown task code '" + s + "'");
  return *c;
}

cb::RewardMode parse_mode(const std::string& s) {
  auto m = cb::reward_mode_from_string(s);
  if (!m) throw cb::ConfigError("unknown reward mode '" + s + "' (baseline, caption_only, progress_only, rl_ground)");
  return *m;
}

std::vector<fs::path> manifests_under(const fs::path& p) {
  if (!fs::exists(p)) throw cb::ConfigError(p.string() + " does not exist");
  if (fs::is_regular_file(p)) return {p};
  if (fs::exists(p / "manifest.jsonl")) return {p / "manifest.jsonl"};
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(p))
    if (e.is_regular_file() && e.path().filename() == "manifest.jsonl") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  if (out.empty()) throw cb::ConfigError("no manifest.jsonl under " + p.string());
  return out;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw cb::ConfigError("cannot write " + path);
  f << text;
}

struct GenArgs {
  std::string code, out, config, split = "eval";
  std::optional<std::size_t> n;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool all = false, no_svg = false, no_png = false;
};

int run_gen(const GenArgs& a) {
  cb::Config cfg = base_config(a.config);
  cb::WriteOptions opts{!a.no_svg, !a.no_png, std::max(1u, a.jobs)};
  const auto t0 = std::chrono::steady_clock::now();
  if (a.all) {
    if (!a.code.empty() || a.n) throw cb::ConfigError("--all builds every split; drop --code/--n");
    for (const auto& p : cb::build_benchmark(a.out, a.seed, cfg, opts))
      std::cout << cb::split_dir(a.out, p.code, p.split).string() << ": " << p.n << " records\n";
  } else {
    if (a.code.empty()) throw cb::ConfigError("--code is required (or use --all)");
    const cb::TaskCode code = parse_code(a.code);
    const std::size_t n = a.n.value_or(a.split == "train" ? cb::kTrainSplitSize : cb::kEvalSplitSize);
    const auto m = cb::generate_split(code, n, a.seed, cfg, a.split, opts.jobs);
    cb::write_split(m, a.out, cfg.render, opts);
    std::cout << a.out << ": " << n << " " << cb::to_string(code) << " records (" << a.split << ")\n";
  }
  std::cout << "elapsed " << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
  return kExitOk;
}

int run_validate(const std::string& path, bool check_images) {
  for (const auto& f : manifests_under(path)) {
    const auto m = cb::load_split(f, check_images);
    std::cout << "ok " << f.string() << " (" << m.records.size() << " " << cb::to_string(m.header.code) << " records)\n";
  }
  return kExitOk;
}

struct SimArgs {
  std::string manifest, agent = "all", mode = "rl_ground", report_out, config;
  std::uint64_t seed = 0;
};

int run_simulate(const SimArgs& a) {
  cb::Config cfg = base_config(a.config);
  cfg.reward.mode = parse_mode(a.mode);
  std::vector<cb::AgentKind> agents;
  if (a.agent == "all") {
    agents.assign(cb::kAllAgents.begin(), cb::kAllAgents.end());
  } else {
    auto k = cb::agent_from_string(a.agent);
    if (!k) throw cb::ConfigError("unknown agent '" + a.agent + "'");
    agents.push_back(*k);
  }

  cb::Json report = {{"mode", std::string(cb::to_string(cfg.reward.mode))}, {"seed", a.seed}, {"manifests", cb::Json::array()}};
  for (const auto& f : manifests_under(a.manifest)) {
    const auto m = cb::load_split(f, false);
    cb::Json entry = {{"manifest", f.string()},
                      {"code", std::string(cb::to_string(m.header.code))},
                      {"split", m.header.split},
                      {"n", m.records.size()},
                      {"agents", cb::Json::array()}};
    for (cb::AgentKind agent : agents) {
      double acc = 0, fmt = 0, cap = 0, prog = 0, total = 0;
      for (const auto& r : m.records) {
        const auto b = cb::score_completion(cb::respond(agent, r, a.seed), r, cfg.reward);
        acc += b.accuracy;
        fmt += b.format;
        cap += b.caption;
        prog += b.progress;
        total += b.total;
      }
      const double n = static_cast<double>(m.records.size());
      entry["agents"].push_back({{"agent", std::string(cb::to_string(agent))},
                                 {"accuracy", acc / n},
                                 {"format", fmt / n},
                                 {"caption", cap / n},
                                 {"progress", prog / n},
                                 {"total", total / n}});
      if (!a.report_out.empty() && a.report_out != "-") {
        char line[160];
        std::snprintf(line, sizeof line, "%-12s %-18s accuracy %.4f  total %.4f\n", std::string(cb::to_string(m.header.code)).c_str(),
                      std::string(cb::to_string(agent)).c_str(), acc / n, total / n);
        std::cout << line;
      }
    }
    report["manifests"].push_back(std::move(entry));
  }
  write_output(a.report_out, report.dump(2) + "\n");
  return kExitOk;
}

struct ScoreArgs {
  std::string manifest, completions, mode, out, config;
};

// Completions file: JSON lines {"task_id": ..., "completions": [...]} (or a
// single "completion" string). Output: one line per input with breakdowns and,
// for full groups, advantages.
int run_score(const ScoreArgs& a) {
  cb::Config cfg = base_config(a.config);
  if (!a.mode.empty()) cfg.reward.mode = parse_mode(a.mode);
  cb::TaskIndex index;
  for (const auto& f : manifests_under(a.manifest)) index.add(cb::load_split(f, false));

  std::ifstream in(a.completions, std::ios::binary);
  if (!in) throw cb::ConfigError("cannot open " + a.completions);
  std::string line, out;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& what) { throw DataError("completions line " + std::to_string(lineno) + ": " + what); };
    cb::Json j;
    try {
      j = cb::Json::parse(line);
    } catch (const cb::Json::parse_error& e) {
      fail(e.what());
    }
    if (!j.is_object() || !j.contains("task_id") || !j["task_id"].is_string()) fail("missing string 'task_id'");
    std::vector<std::string> texts;
    if (j.contains("completions") && j["completions"].is_array()) {
      for (const auto& c : j["completions"]) {
        if (!c.is_string()) fail("'completions' must hold strings");
        texts.push_back(c.get<std::string>());
      }
    } else if (j.contains("completion") && j["completion"].is_string()) {
      texts.push_back(j["completion"].get<std::string>());
    } else {
      fail("need 'completions' (array) or 'completion' (string)");
    }
    const std::string id = j["task_id"].get<std::string>();
    const cb::TaskInstance* inst = index.find(id);
    if (!inst) fail("unknown task id '" + id + "'");
    const auto scored = cb::score_group(*inst, texts, cfg.reward, cfg.grpo);
    cb::Json results = cb::Json::array();
    for (const auto& r : scored.results) results.push_back(cb::breakdown_to_json(r));
    cb::Json rec = {{"task_id", id}, {"mode", std::string(cb::to_string(cfg.reward.mode))}, {"results", std::move(results)}};
    if (scored.advantages) rec["advantages"] = *scored.advantages;
    out += rec.dump() + "\n";
  }
  write_output(a.out, out);
  return kExitOk;
}

int run_serve(const std::optional<std::string>& addr, const std::optional<std::string>& dir, const std::string& config) {
  const cb::ServeOptions o = cb::resolve_serve_options(addr, dir);
  auto index = std::make_shared<const cb::TaskIndex>(cb::TaskIndex::load(o.manifest_dir));
  cb::RewardService service(index, base_config(config));
  httplib::Server server;
  service.mount(server);
  std::cerr << "serving " << index->size() << " tasks on " << o.host << ":" << o.port << "\n";
  if (!server.listen(o.host, o.port)) throw cb::ConfigError("cannot listen on " + o.host + ":" + std::to_string(o.port));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional geometry/spatial benchmark: generator, verifier and reward engine."};
  app.require_subcommand(1);
  app.footer(code_table());
  app.set_version_flag("--version", std::string(cb::kBenchmarkVersion));

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a split (manifest.jsonl + images/) or the full benchmark.");
  g->add_option("--code", gen.code, "Task code, e.g. mm-sr (see table below)");
  g->add_option("--n", gen.n, "Number of records (default: 4000 for train, 500 otherwise)");
  g->add_option("--seed", gen.seed, "Base seed")->required();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--config", gen.config, "JSON config file");
  g->add_option("--split", gen.split, "Split name (train, eval, ...)")->capture_default_str();
  g->add_option("--jobs", gen.jobs, "Worker threads")->capture_default_str();
  g->add_flag("--all", gen.all, "Build every train/eval split of every task code under --out");
  g->add_flag("--no-svg", gen.no_svg, "Skip writing .svg files");
  g->add_flag("--no-png", gen.no_png, "Skip writing .png files");
  g->footer(code_table());

  std::string validate_path;
  bool validate_no_images = false;
  auto* v = app.add_subcommand("validate", "Re-derive and check every record of one or more manifests.");
  v->add_option("--manifest", validate_path, "manifest.jsonl, split directory, or a tree of them")->required();
  v->add_flag("--no-images", validate_no_images, "Do not require referenced image files to exist");

  SimArgs sim;
  auto* s = app.add_subcommand("simulate", "Run reference agents over a manifest and report mean reward components.");
  s->add_option("--manifest", sim.manifest, "manifest.jsonl, split directory, or a tree of them")->required();
  s->add_option("--agent", sim.agent,
                "oracle, caption_oracle, blind, subskill_area, subskill_spatial, partial_progress, malformed, or all")
      ->capture_default_str();
  s->add_option("--mode", sim.mode, "Reward mode: baseline, caption_only, progress_only, rl_ground")->capture_default_str();
  s->add_option("--seed", sim.seed, "Agent seed")->capture_default_str();
  s->add_option("--report-out", sim.report_out, "Write the JSON report here (default: stdout)");
  s->add_option("--config", sim.config, "JSON config file (reward section)");

  ScoreArgs sc;
  auto* r = app.add_subcommand("score", "Score completions keyed by task id.");
  r->add_option("--manifest", sc.manifest, "manifest.jsonl, split directory, or a tree of them")->required();
  r->add_option("--completions", sc.completions, "JSON lines: {\"task_id\", \"completions\": [...]}")->required();
  r->add_option("--mode", sc.mode, "Reward mode override");
  r->add_option("--out", sc.out, "Write JSON lines here (default: stdout)");
  r->add_option("--config", sc.config, "JSON config file (reward and grpo sections)");

  std::optional<std::string> serve_addr, serve_dir;
  std::string serve_config;
  auto* sv = app.add_subcommand("serve", "Run the HTTP reward service (v1 wire schema).");
  sv->add_option("--manifest-dir", serve_dir, "Directory searched recursively for manifest.jsonl [env COMPABENCH_MANIFEST_DIR]");
  sv->add_option("--addr", serve_addr, "host:port [env COMPABENCH_ADDR, default 127.0.0.1:8080]");
  sv->add_option("--config", serve_config, "JSON config file (default reward and grpo settings)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*g) return run_gen(gen);
    if (*v) return run_validate(validate_path, !validate_no_images);
    if (*s) return run_simulate(sim);
    if (*r) return run_score(sc);
    if (*sv) return run_serve(serve_addr, serve_dir, serve_config);
  } catch (const cb::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
