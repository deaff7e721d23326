#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "aqad/regressor/lstm.hpp"

namespace aqad::regressor {

enum class Optimizer { adam, sgd };

std::string_view to_string(Optimizer o) noexcept;
Optimizer optimizer_from_string(std::string_view name);

struct TrainConfig {
  int epochs = 35;
  double learning_rate = 1e-3;
  int batch_size = 64;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::adam;
  double clip_norm = 5.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;  // throws InvalidArgument
};

struct TrainResult {
  Params params;
  std::vector<double> loss_history;  // mean squared error per epoch
};

/// Minibatch MSE training with full BPTT and global-norm clipping. Windows
/// whose rows are flagged excluded are skipped. The shuffle stream is seeded
/// from cfg.seed, so identical inputs give bit-identical results. Throws
/// TrainingDiverged when an epoch loss turns non-finite.
TrainResult train(Params params, const WindowedDataset& data, const TrainConfig& cfg);

}  // namespace aqad::regressor
