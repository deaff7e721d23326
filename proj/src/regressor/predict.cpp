#include "aqad/regressor/predict.hpp"

#include <numeric>

namespace aqad::regressor {
namespace {

constexpr Eigen::Index kPredictChunk = 256;

PredictionSet aligned_targets(const WindowedDataset& data) {
  PredictionSet out;
  out.y = data.targets();
  out.y_hat = Eigen::VectorXd::Zero(data.size());
  out.times.reserve(static_cast<std::size_t>(data.size()));
  for (Eigen::Index i = 0; i < data.size(); ++i) out.times.push_back(data.target_time(i));
  return out;
}

}  // namespace

PredictionSet predict_series(const Params& params, const WindowedDataset& data) {
  if (data.empty()) return {};
  if (data.input_dim() != params.input_dim()) {
    throw Error(Errc::ShapeMismatch, "dataset width " + std::to_string(data.input_dim()) +
                                         " != model input_dim " + std::to_string(params.input_dim()));
  }
  if (!data.features().allFinite()) throw Error(Errc::NonFiniteInput, "dataset contains NaN or inf");
  PredictionSet out = aligned_targets(data);
  std::vector<Eigen::Index> idx;
  for (Eigen::Index from = 0; from < data.size(); from += kPredictChunk) {
    const Eigen::Index to = std::min(data.size(), from + kPredictChunk);
    idx.resize(static_cast<std::size_t>(to - from));
    std::iota(idx.begin(), idx.end(), from);
    const Batch batch = gather_batch(data, idx);
    out.y_hat.segment(from, to - from) = forward_batch(params, batch.steps).transpose();
  }
  return out;
}

PredictionSet persistence_baseline(const WindowedDataset& data) {
  PredictionSet out = aligned_targets(data);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    out.y_hat(i) = data.features()(i + data.length() - 1, kPollutantColumn);
  }
  return out;
}

double mape(const PredictionSet& p) {
  if (p.y.size() != p.y_hat.size()) throw Error(Errc::ShapeMismatch, "y and y_hat lengths differ");
  if (p.y.size() == 0) throw Error(Errc::EmptySeries, "MAPE of an empty prediction set");
  const Eigen::ArrayXd denom = p.y.array().abs().max(kMapeEpsilon);
  return ((p.y_hat - p.y).array().abs() / denom).mean();
}

}  // namespace aqad::regressor
