#include "memexplore/config.hpp"

#include <set>

#include "memexplore/error.hpp"
#include "memexplore/json_io.hpp"

namespace memexplore {

std::string version_string() {
#ifdef MEMEXPLORE_VERSION
  return MEMEXPLORE_VERSION;
#else
  return "0.0.0";
#endif
}

using nlohmann::json;

nlohmann::json config_to_json(const EngineConfig& c) {
  json j;
  j["budget_per_subtask"] = c.budget_per_subtask;
  j["embedding_dim"] = c.embedding_dim;
  j["views"] = {{"fov_deg", c.views.fov_deg},
                {"view_interval_deg", c.views.view_interval_deg},
                {"max_range_m", c.views.max_range_m}};
  j["sensor"] = {{"max_range_m", c.sensor.max_range_m},
                 {"explored_radius_m", c.sensor.explored_radius_m},
                 {"ray_step_deg", c.sensor.ray_step_deg},
                 {"fov_deg", c.sensor.fov_deg}};
  j["frontier"] = {{"eps_cells", c.frontier.eps_cells},
                   {"min_pts", c.frontier.min_pts},
                   {"min_cluster_cells", c.frontier.min_cluster_cells},
                   {"split_extent_deg", c.frontier.split_extent_deg},
                   {"kmeans_max_iterations", c.frontier.kmeans_max_iterations},
                   {"iou_keep", c.frontier.iou_keep}};
  j["memory"] = {{"interval", c.novelty.interval},
                 {"window", c.novelty.window},
                 {"w_text", c.novelty.weights.text},
                 {"w_obs", c.novelty.weights.obs},
                 {"w_pos", c.novelty.weights.pos},
                 {"lambda_m", c.novelty.weights.lambda_m}};
  std::string mode = "max";
  if (c.retrieval.mode == CombineMode::Sum) {
    mode = "sum";
  } else if (c.retrieval.mode == CombineMode::Interleave) {
    mode = "interleave";
  }
  j["retrieval"] = {{"topk", c.retrieval.topk}, {"combine", mode}};
  j["reward"] = constants_to_json(c.reward);
  j["pipeline"] = {{"action_interval", c.pipeline.action_interval},
                   {"window", c.pipeline.window},
                   {"qa_seed", c.pipeline.qa_seed}};
  j["judge"] = {{"scale", c.judge.scale}};
  j["response_timeout_s"] = c.response_timeout_s;
  return j;
}

namespace {

class Reader {
 public:
  Reader(const json& obj, std::string where, std::set<std::string> known)
      : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) {
      throw ParseError(where_ + ": expected an object");
    }
    for (const auto& [k, _] : obj_.items()) {
      if (known.count(k) == 0) {
        throw ParseError(where_ + ": unknown key '" + k + "'");
      }
    }
  }

  void get(const char* key, double& out) const {
    if (obj_.contains(key)) {
      out = json_io::number(obj_, key, where_);
    }
  }
  void get(const char* key, int& out) const {
    if (obj_.contains(key)) {
      out = json_io::integer(obj_, key, where_);
    }
  }
  void get(const char* key, bool& out) const {
    if (obj_.contains(key)) {
      out = json_io::boolean(obj_, key, where_);
    }
  }
  void get(const char* key, std::uint64_t& out) const {
    if (obj_.contains(key)) {
      if (!obj_[key].is_number_unsigned() && !obj_[key].is_number_integer()) {
        throw ParseError(where_ + "." + key + ": expected a non-negative integer");
      }
      out = obj_[key].get<std::uint64_t>();
    }
  }
  const json* child(const char* key) const { return obj_.contains(key) ? &obj_[key] : nullptr; }
  std::string where(const char* key) const { return where_ + "." + key; }

 private:
  const json& obj_;
  std::string where_;
};

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw InvariantError("config: " + what);
  }
}

}  // namespace

EngineConfig config_from_json(const json& j, EngineConfig c) {
  const Reader top(j, "config",
                   {"budget_per_subtask", "embedding_dim", "views", "sensor", "frontier", "memory", "retrieval",
                    "reward", "pipeline", "judge", "response_timeout_s", "version"});
  top.get("budget_per_subtask", c.budget_per_subtask);
  top.get("embedding_dim", c.embedding_dim);
  top.get("response_timeout_s", c.response_timeout_s);
  if (const auto* v = top.child("views")) {
    const Reader r(*v, top.where("views"), {"fov_deg", "view_interval_deg", "max_range_m"});
    r.get("fov_deg", c.views.fov_deg);
    r.get("view_interval_deg", c.views.view_interval_deg);
    r.get("max_range_m", c.views.max_range_m);
  }
  if (const auto* v = top.child("sensor")) {
    const Reader r(*v, top.where("sensor"), {"max_range_m", "explored_radius_m", "ray_step_deg", "fov_deg"});
    r.get("max_range_m", c.sensor.max_range_m);
    r.get("explored_radius_m", c.sensor.explored_radius_m);
    r.get("ray_step_deg", c.sensor.ray_step_deg);
    r.get("fov_deg", c.sensor.fov_deg);
  }
  if (const auto* v = top.child("frontier")) {
    const Reader r(*v, top.where("frontier"),
                   {"eps_cells", "min_pts", "min_cluster_cells", "split_extent_deg", "kmeans_max_iterations",
                    "iou_keep"});
    r.get("eps_cells", c.frontier.eps_cells);
    r.get("min_pts", c.frontier.min_pts);
    r.get("min_cluster_cells", c.frontier.min_cluster_cells);
    r.get("split_extent_deg", c.frontier.split_extent_deg);
    r.get("kmeans_max_iterations", c.frontier.kmeans_max_iterations);
    r.get("iou_keep", c.frontier.iou_keep);
  }
  if (const auto* v = top.child("memory")) {
    const Reader r(*v, top.where("memory"), {"interval", "window", "w_text", "w_obs", "w_pos", "lambda_m"});
    r.get("interval", c.novelty.interval);
    r.get("window", c.novelty.window);
    r.get("w_text", c.novelty.weights.text);
    r.get("w_obs", c.novelty.weights.obs);
    r.get("w_pos", c.novelty.weights.pos);
    r.get("lambda_m", c.novelty.weights.lambda_m);
  }
  if (const auto* v = top.child("retrieval")) {
    const Reader r(*v, top.where("retrieval"), {"topk", "combine"});
    r.get("topk", c.retrieval.topk);
    if (v->contains("combine")) {
      const auto s = json_io::string(*v, "combine", top.where("retrieval"));
      const auto mode = parse_combine_mode(s);
      if (!mode) {
        throw ParseError("config.retrieval.combine: expected max, sum or interleave, got '" + s + "'");
      }
      c.retrieval.mode = *mode;
    }
  }
  if (const auto* v = top.child("reward")) {
    const Reader r(*v, top.where("reward"),
                   {"weights", "c", "alpha", "consistency", "binary_format", "kl_beta", "topk"});
    r.get("c", c.reward.c_inconsistent);
    r.get("binary_format", c.reward.binary_format);
    r.get("kl_beta", c.reward.kl_beta);
    r.get("topk", c.reward.topk);
    if (const auto* w = r.child("weights")) {
      const Reader rw(*w, r.where("weights"), {"action", "frontier", "answer", "format"});
      rw.get("action", c.reward.weights.action);
      rw.get("frontier", c.reward.weights.frontier);
      rw.get("answer", c.reward.weights.answer);
      rw.get("format", c.reward.weights.format);
    }
    if (const auto* a = r.child("alpha")) {
      const Reader ra(*a, r.where("alpha"), {"success", "fail_navigation", "fail_other"});
      ra.get("success", c.reward.alpha_success);
      ra.get("fail_navigation", c.reward.alpha_fail_navigation);
      ra.get("fail_other", c.reward.alpha_fail_other);
    }
    if (const auto* k = r.child("consistency")) {
      const Reader rk(*k, r.where("consistency"), {"forward_max_deg", "turn_min_deg"});
      rk.get("forward_max_deg", c.reward.forward_max_deg);
      rk.get("turn_min_deg", c.reward.turn_min_deg);
    }
  }
  if (const auto* v = top.child("pipeline")) {
    const Reader r(*v, top.where("pipeline"), {"action_interval", "window", "qa_seed"});
    r.get("action_interval", c.pipeline.action_interval);
    r.get("window", c.pipeline.window);
    r.get("qa_seed", c.pipeline.qa_seed);
  }
  if (const auto* v = top.child("judge")) {
    const Reader r(*v, top.where("judge"), {"scale"});
    r.get("scale", c.judge.scale);
  }

  require(c.budget_per_subtask >= 1, "budget_per_subtask must be >= 1");
  require(c.embedding_dim >= 2, "embedding_dim must be >= 2");
  require(c.retrieval.topk >= 1, "retrieval.topk must be >= 1");
  require(c.novelty.interval >= 0 && c.novelty.window >= 1, "memory.interval >= 0 and memory.window >= 1");
  require(c.novelty.weights.lambda_m > 0.0, "memory.lambda_m must be positive");
  require(c.pipeline.action_interval >= 0 && c.pipeline.window >= 1,
          "pipeline.action_interval >= 0 and pipeline.window >= 1");
  require(c.reward.weights.action >= 0 && c.reward.weights.frontier >= 0 && c.reward.weights.answer >= 0 &&
              c.reward.weights.format >= 0,
          "reward weights must be non-negative");
  require(c.response_timeout_s > 0.0, "response_timeout_s must be positive");
  return c;
}

EngineConfig load_config(const std::filesystem::path& path, EngineConfig base) {
  return config_from_json(json_io::parse(json_io::read_text(path), path.string()), base);
}

}  // namespace memexplore
