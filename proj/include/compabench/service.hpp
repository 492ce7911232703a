#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

// httplib's default backlog of 5 drops connections under a burst of
// concurrent trainers.
#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 128
#endif
#include "httplib.h"

#include "compabench/config.hpp"
#include "compabench/dataset.hpp"
#include "compabench/json_io.hpp"
#include "compabench/reward.hpp"

namespace compabench {

inline constexpr std::string_view kWireVersion = "v1";
inline constexpr std::size_t kMaxCompletionsPerRequest = 64;

// Immutable id -> instance map built from every manifest.jsonl under a root.
class TaskIndex {
 public:
  TaskIndex() = default;

  static TaskIndex load(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    if (!fs::exists(root)) throw ConfigError("manifest directory " + root.string() + " does not exist");
    std::vector<fs::path> files;
    if (fs::is_regular_file(root)) {
      files.push_back(root);
    } else {
      for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file() && e.path().filename() == "manifest.jsonl") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    TaskIndex index;
    for (const auto& f : files) index.add(load_split(f, /*verify_images=*/false));
    return index;
  }

  void add(const DatasetManifest& m) {
    for (const auto& r : m.records) {
      if (tasks_.count(r.id)) throw Error("duplicate task id " + r.id + " across manifests");
      tasks_.emplace(r.id, std::make_shared<const TaskInstance>(r));
    }
  }

  const TaskInstance* find(const std::string& id) const {
    auto it = tasks_.find(id);
    return it == tasks_.end() ? nullptr : it->second.get();
  }

  std::size_t size() const { return tasks_.size(); }

 private:
  std::map<std::string, std::shared_ptr<const TaskInstance>, std::less<>> tasks_;
};

struct HttpResult {
  int status = 200;
  Json body;
};

// Scores exactly as parse + score + group_advantages do in-process.
struct ScoreOutput {
  std::vector<RewardBreakdown> results;
  std::optional<std::vector<double>> advantages;  // present when the batch is one full group
};

inline ScoreOutput score_group(const TaskInstance& inst, const std::vector<std::string>& completions,
                               const RewardConfig& reward, const GrpoConfig& grpo) {
  ScoreOutput out;
  std::vector<double> totals;
  for (const auto& c : completions) {
    out.results.push_back(score_completion(c, inst, reward));
    totals.push_back(out.results.back().total);
  }
  if (totals.size() == static_cast<std::size_t>(grpo.group_size)) out.advantages = group_advantages(totals, grpo);
  return out;
}

class RewardService {
 public:
  RewardService(std::shared_ptr<const TaskIndex> index, Config defaults)
      : index_(std::move(index)), defaults_(std::move(defaults)) {}

  HttpResult health() const {
    return {200,
            {{"status", "ok"},
             {"version", std::string(kWireVersion)},
             {"benchmark_version", std::string(kBenchmarkVersion)},
             {"tasks", index_->size()}}};
  }

  HttpResult get_task(const std::string& id, bool reveal) const {
    const TaskInstance* inst = index_->find(id);
    if (!inst) return error(404, "unknown task id '" + id + "'");
    return {200, instance_to_json(*inst, reveal)};
  }

  HttpResult score(std::string_view body) const {
    const auto t0 = std::chrono::steady_clock::now();
    Json req;
    try {
      req = Json::parse(body);
    } catch (const Json::parse_error& e) {
      return error(400, std::string("request is not valid JSON: ") + e.what());
    }
    if (!req.is_object()) return error(400, "request must be a JSON object");
    for (const auto& [k, _] : req.items())
      if (k != "task_id" && k != "instance" && k != "completions" && k != "mode" && k != "reward_config" &&
          k != "grpo_config")
        return error(400, "unknown request field '" + k + "'");

    const bool has_id = req.contains("task_id"), has_inline = req.contains("instance");
    if (has_id == has_inline) return error(422, "exactly one of 'task_id' or 'instance' is required");

    if (!req.contains("completions") || !req["completions"].is_array())
      return error(400, "'completions' must be an array of strings");
    std::vector<std::string> completions;
    for (const auto& c : req["completions"]) {
      if (!c.is_string()) return error(400, "'completions' must be an array of strings");
      completions.push_back(c.get<std::string>());
    }
    if (completions.empty() || completions.size() > kMaxCompletionsPerRequest)
      return error(422, "'completions' must hold 1.." + std::to_string(kMaxCompletionsPerRequest) + " entries");

    RewardConfig reward = defaults_.reward;
    GrpoConfig grpo = defaults_.grpo;
    try {
      if (req.contains("reward_config")) apply_reward_json(req["reward_config"], reward);
      if (req.contains("grpo_config")) apply_grpo_json(req["grpo_config"], grpo);
      if (req.contains("mode")) {
        if (!req["mode"].is_string()) return error(400, "'mode' must be a string");
        auto m = reward_mode_from_string(req["mode"].get<std::string>());
        if (!m) return error(400, "unknown mode '" + req["mode"].get<std::string>() + "'");
        reward.mode = *m;
      }
    } catch (const ConfigError& e) {
      return error(400, e.what());
    }
    try {
      reward.validate();
      grpo.validate();
    } catch (const ConfigError& e) {
      return error(422, e.what());
    }

    TaskInstance inline_inst;
    const TaskInstance* inst = nullptr;
    if (has_id) {
      if (!req["task_id"].is_string()) return error(400, "'task_id' must be a string");
      inst = index_->find(req["task_id"].get<std::string>());
      if (!inst) return error(404, "unknown task id '" + req["task_id"].get<std::string>() + "'");
    } else {
      try {
        inline_inst = instance_from_json(req["instance"]);
      } catch (const SchemaError& e) {
        return error(400, std::string("inline instance: ") + e.what());
      }
      try {
        detail::check_scene_invariants(inline_inst, defaults_.gen);
        if (ground_truth(inline_inst.scene, inline_inst.code, inline_inst.gr_mode) != inline_inst.answer)
          return error(422, "inline instance answer does not match its scene");
        if (build_trace(inline_inst.scene, inline_inst.code, inline_inst.gr_mode) != inline_inst.trace)
          return error(422, "inline instance trace does not match its scene");
      } catch (const std::exception& e) {
        return error(422, std::string("inline instance: ") + e.what());
      }
      inst = &inline_inst;
    }

    const ScoreOutput out = score_group(*inst, completions, reward, grpo);
    Json results = Json::array();
    for (const auto& r : out.results) results.push_back(breakdown_to_json(r));
    Json resp = {{"version", std::string(kWireVersion)},
                 {"benchmark_version", std::string(kBenchmarkVersion)},
                 {"task_id", inst->id},
                 {"mode", std::string(to_string(reward.mode))},
                 {"results", std::move(results)}};
    if (out.advantages) resp["advantages"] = *out.advantages;
    resp["timing_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return {200, std::move(resp)};
  }

  void mount(httplib::Server& server) const {
    auto reply = [](httplib::Response& res, const HttpResult& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    server.Get("/v1/health", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, health()); });
    server.Get(R"(/v1/tasks/([^/]+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
      const bool reveal = req.has_param("reveal") && req.get_param_value("reveal") == "true";
      reply(res, get_task(req.matches[1].str(), reveal));
    });
    server.Post("/v1/score", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, score(req.body));
    });
  }

 private:
  static HttpResult error(int status, const std::string& message) {
    return {status, {{"error", {{"status", status}, {"message", message}}}}};
  }

  std::shared_ptr<const TaskIndex> index_;
  Config defaults_;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string manifest_dir;
};

// Precedence: command-line flag > environment variable > default.
// Environment: COMPABENCH_ADDR ("host:port"), COMPABENCH_MANIFEST_DIR.
inline ServeOptions resolve_serve_options(const std::optional<std::string>& addr_flag,
                                          const std::optional<std::string>& dir_flag,
                                          const std::function<std::optional<std::string>(const char*)>& getenv_fn =
                                              [](const char* k) -> std::optional<std::string> {
                                            const char* v = std::getenv(k);
                                            return v ? std::optional<std::string>(v) : std::nullopt;
                                          }) {
  ServeOptions o;
  const auto addr = addr_flag ? addr_flag : getenv_fn("COMPABENCH_ADDR");
  if (addr) {
    const auto colon = addr->rfind(':');
    if (colon == std::string::npos) throw ConfigError("address must be host:port, got '" + *addr + "'");
    o.host = addr->substr(0, colon);
    try {
      std::size_t used = 0;
      o.port = std::stoi(addr->substr(colon + 1), &used);
      if (used != addr->size() - colon - 1 || o.port < 0 || o.port > 65535) throw std::invalid_argument("port");
    } catch (const std::exception&) {
      throw ConfigError("invalid port in address '" + *addr + "'");
    }
  }
  if (dir_flag) o.manifest_dir = *dir_flag;
  else if (auto d = getenv_fn("COMPABENCH_MANIFEST_DIR")) o.manifest_dir = *d;
  if (o.manifest_dir.empty()) throw ConfigError("no manifest directory (use --manifest-dir or COMPABENCH_MANIFEST_DIR)");
  return o;
}

}  // namespace compabench
