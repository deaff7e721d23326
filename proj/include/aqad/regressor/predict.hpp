#pragma once

#include <vector>

#include "aqad/regressor/lstm.hpp"

namespace aqad::regressor {

/// Predictions aligned with the window targets: y(i) is the pollutant at
/// times[i], y_hat(i) its one-step-ahead prediction.
struct PredictionSet {
  Eigen::VectorXd y_hat;
  Eigen::VectorXd y;
  std::vector<Instant> times;

  Eigen::Index size() const { return y.size(); }
  bool empty() const { return y.size() == 0; }
};

PredictionSet predict_series(const Params& params, const WindowedDataset& data);

// y_hat = last pollutant value inside each window.
PredictionSet persistence_baseline(const WindowedDataset& data);

inline constexpr double kMapeEpsilon = 1e-9;

/// mean |y_hat - y| / max(|y|, 1e-9). Throws EmptySeries / ShapeMismatch.
double mape(const PredictionSet& p);

}  // namespace aqad::regressor
