#include "an2vec/checkpoint.hpp"

#include "an2vec/io.hpp"

namespace an2vec {

using nlohmann::json;

json matrix_to_json(const DenseMatrix& m) {
  std::vector<double> data(m.data(), m.data() + m.size());
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

DenseMatrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size())
    throw ParseError("matrix payload does not match its shape");
  DenseMatrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

json to_json(const Checkpoint& c) {
  const auto& s = c.weights.shape;
  json shape = {{"n_features", s.n_features},
                {"hidden_enc", s.hidden_enc},
                {"hidden_dec", s.hidden_dec},
                {"split", to_json(s.split)},
                {"decoder", std::string(to_string(s.decoder))},
                {"feature_head", std::string(to_string(s.head))}};
  json matrices = json::object();
  const auto names = weight_names(s);
  const auto mats = weight_matrices(c.weights.enc, c.weights.dec);
  for (std::size_t i = 0; i < names.size(); ++i) matrices[names[i]] = matrix_to_json(*mats[i]);
  json j = {{"format_version", Checkpoint::kFormatVersion},
            {"shape", shape},
            {"loss", to_json(c.loss)},
            {"seeds", {{"master", c.master_seed}, {"init", c.init_seed}, {"noise", c.noise_seed}}},
            {"data_source", c.data_source},
            {"renormalize_features", c.renormalize_features},
            {"epochs_trained", c.epochs_trained},
            {"matrices", matrices}};
  if (c.holdout) {
    j["holdout"] = {{"task", c.holdout->task}, {"test_frac", c.holdout->test_frac}, {"split_seed", c.holdout->split_seed}};
  } else {
    j["holdout"] = nullptr;
  }
  return j;
}

Checkpoint checkpoint_from_json(const json& j) {
  try {
    if (j.at("format_version").get<int>() != Checkpoint::kFormatVersion)
      throw ParseError("unsupported checkpoint format version");
    Checkpoint c;
    const auto& js = j.at("shape");
    ModelShape s;
    s.n_features = js.at("n_features").get<Eigen::Index>();
    s.hidden_enc = js.at("hidden_enc").get<int>();
    s.hidden_dec = js.at("hidden_dec").get<int>();
    s.split = {js.at("split").at("f_a").get<int>(), js.at("split").at("f_ax").get<int>(),
               js.at("split").at("f_x").get<int>()};
    s.decoder = parse_adjacency_decoder(js.at("decoder").get<std::string>());
    s.head = parse_feature_head(js.at("feature_head").get<std::string>());
    s.validate();
    c.weights = zero_weights(s);
    const auto names = weight_names(s);
    auto mats = weight_matrices(c.weights.enc, c.weights.dec);
    const auto& jm = j.at("matrices");
    for (std::size_t i = 0; i < names.size(); ++i) {
      DenseMatrix m = matrix_from_json(jm.at(names[i]));
      if (m.rows() != mats[i]->rows() || m.cols() != mats[i]->cols())
        throw ParseError("matrix '" + names[i] + "' has the wrong shape");
      *mats[i] = std::move(m);
    }
    const auto& jl = j.at("loss");
    c.loss.kappa_kl = jl.at("kappa_kl").get<double>();
    c.loss.kappa_theta = jl.at("kappa_theta").get<double>();
    c.loss.clip_eps = jl.at("clip_eps").get<double>();
    c.loss.include_diagonal = jl.at("include_diagonal").get<bool>();
    c.master_seed = j.at("seeds").at("master").get<std::uint64_t>();
    c.init_seed = j.at("seeds").at("init").get<std::uint64_t>();
    c.noise_seed = j.at("seeds").at("noise").get<std::uint64_t>();
    c.data_source = j.at("data_source").get<std::string>();
    c.renormalize_features = j.at("renormalize_features").get<bool>();
    c.epochs_trained = j.at("epochs_trained").get<int>();
    if (const auto& h = j.at("holdout"); !h.is_null())
      c.holdout = Holdout{h.at("task").get<std::string>(), h.at("test_frac").get<double>(),
                          h.at("split_seed").get<std::uint64_t>()};
    if (!c.weights.all_finite()) throw ParseError("checkpoint holds non-finite weights");
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) { write_json(path, to_json(c)); }

Checkpoint load_checkpoint(const std::filesystem::path& path) { return checkpoint_from_json(read_json(path)); }

}  // namespace an2vec
