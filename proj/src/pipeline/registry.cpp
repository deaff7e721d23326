#include "aqad/pipeline/config.hpp"

#include <algorithm>

namespace aqad::pipeline {
namespace {

ParamSpec int_param(std::string name, double min, double max, std::int64_t def, std::string doc) {
  return {std::move(name), ParamType::integer, min, max, {}, ParamValue{def}, std::move(doc)};
}

ParamSpec real_param(std::string name, double min, double max, double def, std::string doc) {
  return {std::move(name), ParamType::real, min, max, {}, ParamValue{def}, std::move(doc)};
}

ParamSpec choice_param(std::string name, std::vector<std::string> choices, std::string def, std::string doc) {
  return {std::move(name), ParamType::choice, 0, 0, std::move(choices), ParamValue{std::move(def)}, std::move(doc)};
}

std::vector<BlockInfo> make_registry() {
  using F = Facet;
  std::vector<BlockInfo> r;
  r.push_back({"resample", BlockKind::transform,
               {choice_param("agg", {"mean", "max", "last"}, "mean", "bucket aggregation")},
               {F::raw}, {F::regular},
               "Segments raw readings onto the experiment interval."});
  r.push_back({"join_weather", BlockKind::transform, {}, {F::regular}, {F::features},
               "Adds temperature, humidity, pressure and wind speed columns."});
  r.push_back({"impute", BlockKind::transform,
               {int_param("max_gap", 0, 1e6, 24, "longest gap (steps) still used for training")},
               {F::features}, {F::complete},
               "Fills missing entries by linear interpolation."});
  r.push_back({"normalize", BlockKind::transform, {}, {F::complete}, {F::normalized},
               "Per-column z-score fit on the training split."});
  r.push_back({"window", BlockKind::transform,
               {int_param("l_s", 1, 10000, 24, "input sequence length")},
               {F::complete}, {F::windows},
               "Builds (l_s x 5 window, next pollutant value) pairs."});
  r.push_back({"lstm_regressor", BlockKind::learning,
               {int_param("hidden_dim", 1, 1024, 32, "LSTM hidden units"),
                int_param("epochs", 1, 100000, 35, "training epochs"),
                real_param("learning_rate", 1e-9, 10.0, 1e-3, "optimizer step size"),
                int_param("batch_size", 1, 1000000, 64, "minibatch size"),
                choice_param("optimizer", {"adam", "sgd"}, "adam", "optimizer"),
                real_param("clip_norm", 1e-9, 1e9, 5.0, "global gradient norm clip")},
               {F::windows}, {F::predictions},
               "Single-layer LSTM with a dense scalar head."});
  r.push_back({"persistence_regressor", BlockKind::learning, {}, {F::windows}, {F::predictions},
               "Predicts the last observed pollutant value."});
  r.push_back({"errors", BlockKind::transform, {}, {F::predictions}, {F::errors},
               "Absolute prediction errors."});
  r.push_back({"smooth", BlockKind::transform,
               {int_param("w_ma", 1, 100000, 2, "trailing moving-average width")},
               {F::errors}, {F::smoothed},
               "Moving average of the errors."});
  r.push_back({"find_anomaly", BlockKind::transform,
               {int_param("h", 2, 10000000, 168, "threshold window length (steps)"),
                int_param("stride", 0, 10000000, 0, "window stride (steps); 0 means h/2"),
                real_param("k_min", 0.0, 1000.0, 0.5, "smallest k in the threshold grid"),
                real_param("k_max", 0.0, 1000.0, 12.0, "largest k in the threshold grid"),
                real_param("k_step", 1e-6, 1000.0, 0.5, "threshold grid step"),
                int_param("min_gap", 0, 1000000, 12, "merge events separated by at most this many steps"),
                real_param("calm_level", 0.0, 1000.0, 0.5,
                           "skip windows whose smoothed errors stay below this multiple of the "
                           "pollutant's training standard deviation")},
               {F::smoothed}, {F::events},
               "Dynamic error threshold and anomaly scoring."});
  return r;
}

}  // namespace

std::string_view to_string(BlockKind k) noexcept { return k == BlockKind::transform ? "transform" : "learning"; }

std::string_view to_string(Facet f) noexcept {
  switch (f) {
    case Facet::raw: return "raw";
    case Facet::regular: return "regular";
    case Facet::features: return "features";
    case Facet::complete: return "complete";
    case Facet::normalized: return "normalized";
    case Facet::windows: return "windows";
    case Facet::predictions: return "predictions";
    case Facet::errors: return "errors";
    case Facet::smoothed: return "smoothed";
    case Facet::events: return "events";
  }
  return "";
}

const ParamSpec* BlockInfo::find_param(std::string_view param) const {
  auto it = std::find_if(params.begin(), params.end(), [&](const ParamSpec& p) { return p.name == param; });
  return it == params.end() ? nullptr : &*it;
}

const std::vector<BlockInfo>& registry() {
  static const std::vector<BlockInfo> r = make_registry();
  return r;
}

const BlockInfo* find_block(std::string_view name) {
  const auto& r = registry();
  auto it = std::find_if(r.begin(), r.end(), [&](const BlockInfo& b) { return b.name == name; });
  return it == r.end() ? nullptr : &*it;
}

}  // namespace aqad::pipeline
