#include "aqad/regressor/train.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace aqad::regressor {

std::string_view to_string(Optimizer o) noexcept { return o == Optimizer::adam ? "adam" : "sgd"; }

Optimizer optimizer_from_string(std::string_view name) {
  if (name == "adam") return Optimizer::adam;
  if (name == "sgd") return Optimizer::sgd;
  throw Error(Errc::InvalidArgument, "unknown optimizer \"" + std::string(name) + "\"");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(Errc::InvalidArgument, "epochs must be >= 1");
  if (!(learning_rate > 0)) throw Error(Errc::InvalidArgument, "learning_rate must be > 0");
  if (batch_size < 1) throw Error(Errc::InvalidArgument, "batch_size must be >= 1");
  if (!(clip_norm > 0)) throw Error(Errc::InvalidArgument, "clip_norm must be > 0");
}

TrainResult train(Params params, const WindowedDataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.input_dim() != params.input_dim()) {
    throw Error(Errc::ShapeMismatch, "dataset width does not match model input_dim");
  }
  std::vector<Eigen::Index> order;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (data.trainable(i)) order.push_back(i);
  }
  if (order.empty()) throw Error(Errc::InvalidArgument, "no trainable windows");

  std::mt19937_64 rng(cfg.seed);
  Eigen::VectorXd theta = params.flatten();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(theta.size());
  std::int64_t step = 0;
  Params grad;

  TrainResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sse = 0.0;
    for (std::size_t from = 0; from < order.size(); from += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t to = std::min(order.size(), from + static_cast<std::size_t>(cfg.batch_size));
      const auto idx = std::span<const Eigen::Index>(order).subspan(from, to - from);
      const Batch batch = gather_batch(data, idx);
      const double loss = loss_and_gradient(params, batch.steps, batch.targets, grad);
      sse += loss * static_cast<double>(idx.size());

      Eigen::VectorXd g = grad.flatten();
      const double norm = g.norm();
      if (!std::isfinite(norm)) {
        throw TrainingDiverged(epoch, "non-finite gradient in epoch " + std::to_string(epoch));
      }
      if (norm > cfg.clip_norm) g *= cfg.clip_norm / norm;

      ++step;
      if (cfg.optimizer == Optimizer::adam) {
        m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
        v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g.cwiseProduct(g);
        const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
        theta.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.adam_epsilon);
      } else {
        theta -= cfg.learning_rate * g;
      }
      params.assign(theta);
    }
    const double epoch_loss = sse / static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss) || !params.all_finite()) {
      throw TrainingDiverged(epoch, "training loss diverged in epoch " + std::to_string(epoch));
    }
    result.loss_history.push_back(epoch_loss);
  }
  result.params = std::move(params);
  return result;
}

}  // namespace aqad::regressor
