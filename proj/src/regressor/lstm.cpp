#include "aqad/regressor/lstm.hpp"

#include <random>

namespace aqad::regressor {

Params init(Eigen::Index hidden_dim, std::uint64_t seed, Eigen::Index input_dim) {
  if (hidden_dim < 1) throw Error(Errc::InvalidArgument, "hidden_dim must be >= 1");
  if (input_dim < 1) throw Error(Errc::InvalidArgument, "input_dim must be >= 1");
  Params p = Params::zeros(input_dim, hidden_dim);
  std::mt19937_64 rng(seed);
  const double range = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  std::uniform_real_distribution<double> dist(-range, range);
  auto fill = [&](auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  };
  fill(p.input_weights);
  fill(p.recurrent_weights);
  fill(p.head_weights);
  p.bias.segment(hidden_dim, hidden_dim).setOnes();
  return p;
}

double forward(const Params& params, const Eigen::Ref<const Eigen::MatrixXd>& window) {
  if (window.cols() != params.input_dim()) {
    throw Error(Errc::ShapeMismatch, "window width " + std::to_string(window.cols()) + " != input_dim " +
                                         std::to_string(params.input_dim()));
  }
  if (!window.allFinite()) throw Error(Errc::NonFiniteInput, "window contains NaN or inf");
  StepInputs<double> steps;
  steps.reserve(static_cast<std::size_t>(window.rows()));
  for (Eigen::Index t = 0; t < window.rows(); ++t) steps.emplace_back(window.row(t).transpose());
  return forward_batch(params, steps)(0);
}

Batch gather_batch(const WindowedDataset& data, std::span<const Eigen::Index> indices) {
  const Eigen::Index L = data.length();
  const auto B = static_cast<Eigen::Index>(indices.size());
  Batch batch;
  batch.steps.assign(static_cast<std::size_t>(L), Eigen::MatrixXd(data.input_dim(), B));
  batch.targets.resize(B);
  const auto& features = data.features();
  for (Eigen::Index b = 0; b < B; ++b) {
    const Eigen::Index i = indices[static_cast<std::size_t>(b)];
    for (Eigen::Index t = 0; t < L; ++t) {
      batch.steps[static_cast<std::size_t>(t)].col(b) = features.row(i + t).transpose();
    }
    batch.targets(b) = data.target(i);
  }
  return batch;
}

}  // namespace aqad::regressor
