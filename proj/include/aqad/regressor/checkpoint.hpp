#pragma once

#include <string>
#include <string_view>

#include "aqad/regressor/lstm.hpp"

namespace aqad::regressor {

inline constexpr int kCheckpointVersion = 1;

/// Everything needed to reproduce predictions for one (station, pollutant)
/// model. Serialized as JSON:
///
///   {"format": "aqad.lstm-checkpoint", "version": 1,
///    "input_dim": D, "hidden_dim": H, "window_length": l_s,
///    "input_weights": [4H*D, column-major], "recurrent_weights": [4H*H],
///    "bias": [4H], "head_weights": [H], "head_bias": b,
///    "norm": {"mean": [5], "std": [5], "degenerate": [5]},
///    "config_hash": "..."}
///
/// Doubles are written with round-trip precision.
struct Checkpoint {
  Params params;
  NormStats norm;
  Eigen::Index window_length = 0;
  std::string config_hash;
};

std::string write_checkpoint(const Checkpoint& c);
Checkpoint read_checkpoint(std::string_view text);  // throws ParseError

}  // namespace aqad::regressor
