#include "aqad/regressor/checkpoint.hpp"

#include <json.hpp>

namespace aqad::regressor {
namespace {

using nlohmann::json;

template <typename M>
json to_array(const M& m) {
  return json(std::vector<double>(m.data(), m.data() + m.size()));
}

template <typename M>
void from_array(const json& j, M& m, const char* name) {
  const auto v = j.at(name).get<std::vector<double>>();
  if (static_cast<Eigen::Index>(v.size()) != m.size()) {
    throw Error(Errc::ParseError, std::string("checkpoint field ") + name + " has wrong length");
  }
  std::copy(v.begin(), v.end(), m.data());
}

}  // namespace

std::string write_checkpoint(const Checkpoint& c) {
  json j;
  j["format"] = "aqad.lstm-checkpoint";
  j["version"] = kCheckpointVersion;
  j["input_dim"] = c.params.input_dim();
  j["hidden_dim"] = c.params.hidden_dim();
  j["window_length"] = c.window_length;
  j["input_weights"] = to_array(c.params.input_weights);
  j["recurrent_weights"] = to_array(c.params.recurrent_weights);
  j["bias"] = to_array(c.params.bias);
  j["head_weights"] = to_array(c.params.head_weights);
  j["head_bias"] = c.params.head_bias;
  j["norm"] = {{"mean", to_array(c.norm.mean)},
               {"std", to_array(c.norm.std)},
               {"degenerate", std::vector<bool>(c.norm.degenerate.begin(), c.norm.degenerate.end())}};
  j["config_hash"] = c.config_hash;
  return j.dump();
}

Checkpoint read_checkpoint(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "aqad.lstm-checkpoint") throw Error(Errc::ParseError, "not a checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw Error(Errc::ParseError, "unsupported checkpoint version");
    }
    Checkpoint c;
    c.params = Params::zeros(j.at("input_dim").get<Eigen::Index>(), j.at("hidden_dim").get<Eigen::Index>());
    from_array(j, c.params.input_weights, "input_weights");
    from_array(j, c.params.recurrent_weights, "recurrent_weights");
    from_array(j, c.params.bias, "bias");
    from_array(j, c.params.head_weights, "head_weights");
    c.params.head_bias = j.at("head_bias").get<double>();
    const json& norm = j.at("norm");
    from_array(norm, c.norm.mean, "mean");
    from_array(norm, c.norm.std, "std");
    const auto degenerate = norm.at("degenerate").get<std::vector<bool>>();
    if (degenerate.size() != c.norm.degenerate.size()) throw Error(Errc::ParseError, "bad degenerate flags");
    std::copy(degenerate.begin(), degenerate.end(), c.norm.degenerate.begin());
    c.window_length = j.at("window_length").get<Eigen::Index>();
    c.config_hash = j.at("config_hash").get<std::string>();
    return c;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("checkpoint: ") + e.what());
  }
}

}  // namespace aqad::regressor
