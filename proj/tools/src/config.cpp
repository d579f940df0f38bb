#include "an2vec/cli/config.hpp"

#include <fstream>
#include <set>

#include "an2vec/io.hpp"

namespace an2vec::cli {

namespace {

using nlohmann::json;

// Pulls typed fields out of one JSON object; finish() rejects leftovers.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw UsageError(where_ + ": expected a JSON object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw UsageError(where_ + "." + key + ": wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null() ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw UsageError(where_ + ": unknown key '" + k + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

template <class F>
auto validated(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

LossConfig loss_config_from_json(const json& j) {
  LossConfig c;
  Reader r(j, "train.loss");
  r.get("kappa_kl", c.kappa_kl);
  r.get("kappa_theta", c.kappa_theta);
  r.get("clip_eps", c.clip_eps);
  r.get("include_diagonal", c.include_diagonal);
  r.finish();
  return c;
}

DimensionSplit split_from_json(const json& j) {
  DimensionSplit s;
  Reader r(j, "train.split");
  r.get("f_a", s.f_a);
  r.get("f_ax", s.f_ax);
  r.get("f_x", s.f_x);
  r.finish();
  return s;
}

}  // namespace

json merge_layers(const std::vector<json>& layers) {
  json out = json::object();
  for (const auto& l : layers)
    if (!l.is_null()) out.merge_patch(l);
  return out;
}

json read_config_file(const std::filesystem::path& path) {
  json j;
  try {
    j = read_json(path);
  } catch (const std::exception& e) {
    throw UsageError(std::string("config file: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("config file " + path.string() + " must hold a JSON object");
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  Reader r(j, "train");
  r.get("epochs", c.epochs);
  r.get("k_samples", c.k_samples);
  r.get("lr", c.lr);
  r.get("seed", c.seed);
  if (const json* l = r.child("loss")) c.loss = loss_config_from_json(*l);
  if (const json* s = r.child("split")) c.split = split_from_json(*s);
  r.get("hidden_enc", c.hidden_enc);
  r.get("hidden_dec", c.hidden_dec);
  std::string decoder(to_string(c.decoder)), head(to_string(c.head)), target(to_string(c.feature_target));
  r.get("decoder", decoder);
  r.get("feature_head", head);
  r.get("resample_noise", c.resample_noise);
  r.get("track_mean_loss", c.track_mean_loss);
  r.get("renormalize_features", c.renormalize_features);
  r.get("feature_target", target);
  r.finish();
  return validated([&] {
    c.decoder = parse_adjacency_decoder(decoder);
    if (head != "auto") c.head = parse_feature_head(head);
    c.feature_target = parse_feature_target(target);
    if (c.hidden_enc < 1 || c.hidden_dec < 1) throw std::invalid_argument("hidden widths must be >= 1");
    c.validate();
    return c;
  });
}

SbmConfig sbm_config_from_json(const json& j) {
  SbmConfig c;
  Reader r(j, "sbm");
  r.get("m", c.m);
  r.get("n", c.n);
  r.get("p_in", c.p_in);
  r.get("p_out", c.p_out);
  r.finish();
  return validated([&] {
    c.validate();
    return c;
  });
}

StudyConfig study_config_from_json(const json& j) {
  StudyConfig c;
  Reader r(j, "grid");
  std::string kind = "overlap";
  r.get("kind", kind);
  if (kind != "overlap") throw UsageError("grid.kind: expected 'overlap', got '" + kind + "'");
  if (const json* s = r.child("sbm")) c.sbm = sbm_config_from_json(*s);
  r.get("noise_sigma", c.noise_sigma);
  r.get("alphas", c.alphas);
  r.get("f_max", c.f_max);
  r.get("repeats", c.repeats);
  r.get("seed", c.seed);
  if (const json* t = r.child("train")) c.train = train_config_from_json(*t);
  r.finish();
  return validated([&] {
    c.validate();
    return c;
  });
}

json generate_defaults() {
  return {{"sbm", to_json(SbmConfig{})}, {"alpha", 1.0}, {"noise_sigma", 0.1}, {"seed", 0}};
}

json generate_preset(const std::string& name) {
  if (name == "full") return {{"sbm", {{"m", 100}, {"n", 10}, {"p_in", 0.25}, {"p_out", 0.01}}}};
  if (name == "desk") return {{"sbm", {{"m", 50}, {"n", 10}, {"p_in", 0.25}, {"p_out", 0.01}}}};
  throw UsageError("unknown generate preset '" + name + "' (full, desk)");
}

json train_defaults() {
  json t = to_json(TrainConfig{});
  t.erase("seed");
  t["feature_head"] = "auto";
  return {{"seed", 0}, {"train", t}, {"per_task", nullptr}, {"holdout", {{"task", "none"}, {"test_frac", 0.15}}}};
}

json train_preset(const std::string& name) {
  if (name == "full") return json::object();
  if (name == "citation") {
    return {{"train", {{"epochs", 200}, {"hidden_enc", 32}, {"hidden_dec", 32}, {"lr", 0.01}}}, {"per_task", 16}};
  }
  throw UsageError("unknown train preset '" + name + "' (full, citation)");
}

void resolve_split(json& resolved, const json& explicit_layers) {
  const json& per_task = resolved["per_task"];
  if (per_task.is_null()) return;
  if (!per_task.is_number_integer()) throw UsageError("per_task must be an integer");
  const int d = per_task.get<int>();
  json& split = resolved["train"]["split"];
  const int f_ax = split.value("f_ax", 0);
  if (f_ax > d) throw UsageError("f_ax (" + std::to_string(f_ax) + ") exceeds per_task (" + std::to_string(d) + ")");
  const json* given = nullptr;
  if (explicit_layers.contains("train") && explicit_layers["train"].contains("split"))
    given = &explicit_layers["train"]["split"];
  for (const char* k : {"f_a", "f_x"})
    if (!given || !given->contains(k)) split[k] = d - f_ax;
}

std::vector<std::string> preset_names(const std::string& command) {
  if (command == "train") return {"full", "citation"};
  return {"full", "desk"};
}

}  // namespace an2vec::cli
