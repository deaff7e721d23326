#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "aqad/core/error.hpp"
#include "aqad/regressor/checkpoint.hpp"
#include "aqad/regressor/lstm.hpp"
#include "aqad/regressor/predict.hpp"
#include "aqad/regressor/train.hpp"

using namespace aqad;
using namespace aqad::regressor;

namespace {

const Instant kT0 = from_epoch_seconds(1704067200);

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// One hidden unit, written out gate by gate.
struct ScalarCell {
  double wi[5], wf[5], wg[5], wo[5];
  double ui, uf, ug, uo;
  double bi, bf, bg, bo;
  double v, b;

  double run(const std::vector<std::array<double, 5>>& xs) const {
    double h = 0, c = 0;
    for (const auto& x : xs) {
      double ai = bi + ui * h, af = bf + uf * h, ag = bg + ug * h, ao = bo + uo * h;
      for (int d = 0; d < 5; ++d) {
        ai += wi[d] * x[d];
        af += wf[d] * x[d];
        ag += wg[d] * x[d];
        ao += wo[d] * x[d];
      }
      c = sig(af) * c + sig(ai) * std::tanh(ag);
      h = sig(ao) * std::tanh(c);
    }
    return v * h + b;
  }

  Params params() const {
    Params p = Params::zeros(5, 1);
    for (int d = 0; d < 5; ++d) {
      p.input_weights(0, d) = wi[d];
      p.input_weights(1, d) = wf[d];
      p.input_weights(2, d) = wg[d];
      p.input_weights(3, d) = wo[d];
    }
    p.recurrent_weights << ui, uf, ug, uo;
    p.bias << bi, bf, bg, bo;
    p.head_weights << v;
    p.head_bias = b;
    return p;
  }
};

WindowedDataset dataset_from(const Eigen::VectorXd& pollutant, Eigen::Index l_s, Eigen::MatrixXd weather = {}) {
  FeatureRows f = FeatureRows::Zero(pollutant.size(), kFeatureDim);
  if (weather.size() > 0) f.leftCols(4) = weather;
  f.col(kPollutantColumn) = pollutant;
  return WindowedDataset(f, l_s, kT0, Duration{3600}, std::vector<bool>(pollutant.size() - l_s, true));
}

template <typename S>
LstmParams<S> cast(const Params& p) {
  LstmParams<S> q;
  q.input_weights = p.input_weights.cast<S>();
  q.recurrent_weights = p.recurrent_weights.cast<S>();
  q.bias = p.bias.cast<S>();
  q.head_weights = p.head_weights.cast<S>();
  q.head_bias = static_cast<S>(p.head_bias);
  return q;
}

}  // namespace

TEST(Lstm, MatchesScalarRecurrence) {
  ScalarCell cell{{0.3, -0.2, 0.5, 0.1, -0.4},
                  {0.2, 0.1, -0.3, 0.4, 0.25},
                  {-0.5, 0.35, 0.2, -0.1, 0.6},
                  {0.15, -0.45, 0.05, 0.3, -0.2},
                  0.7, -0.6, 0.4, 0.9,
                  0.1, 1.0, -0.2, 0.05,
                  1.7, -0.3};
  std::vector<std::array<double, 5>> xs{{0.5, -1.0, 0.25, 2.0, -0.75}, {1.5, 0.2, -0.6, 0.1, 0.9}};
  Eigen::MatrixXd window(2, 5);
  for (int t = 0; t < 2; ++t)
    for (int d = 0; d < 5; ++d) window(t, d) = xs[t][d];
  EXPECT_NEAR(forward(cell.params(), window), cell.run(xs), 1e-14);
}

TEST(Lstm, ZeroNetworkOutputsZero) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Random(7, 5) * 10;
  EXPECT_EQ(forward(Params::zeros(5, 4), w), 0.0);
}

TEST(Lstm, OnlyTheWindowMatters) {
  const auto p = init(6, 3);
  Eigen::MatrixXd big = Eigen::MatrixXd::Random(20, 5);
  const Eigen::MatrixXd window = big.middleRows(5, 8);
  const double before = forward(p, window);
  big.topRows(5).setConstant(1e3);
  big.bottomRows(7).setConstant(-1e3);
  EXPECT_EQ(forward(p, big.middleRows(5, 8)), before);
}

TEST(Lstm, RejectsNonFiniteInput) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 5);
  w(1, 2) = std::nan("");
  try {
    forward(init(2, 1), w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonFiniteInput);
  }
}

TEST(Lstm, OutputFiniteForExtremeInputs) {
  const auto p = init(8, 9);
  Eigen::MatrixXd w = Eigen::MatrixXd::Random(12, 5) * 1e6;
  EXPECT_TRUE(std::isfinite(forward(p, w)));
}

TEST(Init, DeterministicPerSeed) {
  const auto a = init(8, 42), b = init(8, 42), c = init(8, 43);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == c);
  EXPECT_EQ(a.input_weights.rows(), 32);
  EXPECT_EQ(a.input_dim(), 5);
  for (int j = 0; j < 8; ++j) EXPECT_EQ(a.bias(8 + j), 1.0);
  const double bound = 1.0 / std::sqrt(8.0);
  EXPECT_LE(a.input_weights.cwiseAbs().maxCoeff(), bound);
  EXPECT_LE(a.recurrent_weights.cwiseAbs().maxCoeff(), bound);
  EXPECT_THROW(init(0, 1), Error);
}

TEST(Lstm, FlattenAssignRoundTrip) {
  const auto a = init(3, 7);
  Params b = Params::zeros(5, 3);
  b.assign(a.flatten());
  EXPECT_TRUE(a == b);
  EXPECT_THROW(b.assign(Eigen::VectorXd::Zero(3)), Error);
}

// Central differences in long double; analytic gradient in double.
TEST(Lstm, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 100; seed < 105; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    const int H = 4, L = 6, B = 3;
    Params p = init(H, seed);
    p.bias += Eigen::VectorXd::NullaryExpr(4 * H, [&] { return 0.3 * n(rng); });
    p.head_weights = Eigen::VectorXd::NullaryExpr(H, [&] { return n(rng); });
    p.head_bias = n(rng);
    StepInputs<double> steps(L, Eigen::MatrixXd(5, B));
    for (auto& s : steps) s = Eigen::MatrixXd::NullaryExpr(5, B, [&] { return n(rng); });
    Eigen::VectorXd y = Eigen::VectorXd::NullaryExpr(B, [&] { return n(rng); });

    Params g;
    loss_and_gradient(p, steps, y, g);
    const Eigen::VectorXd analytic = g.flatten();

    using LD = long double;
    auto lp = cast<LD>(p);
    StepInputs<LD> lsteps;
    for (const auto& s : steps) lsteps.push_back(s.cast<LD>());
    const Eigen::Matrix<LD, Eigen::Dynamic, 1> ly = y.cast<LD>();
    auto loss_at = [&](const Eigen::Matrix<LD, Eigen::Dynamic, 1>& flat) {
      auto q = lp;
      q.assign(flat);
      const auto out = forward_batch(q, lsteps);
      return (out - ly.transpose()).squaredNorm() / LD(B);
    };
    const auto base = lp.flatten();
    const LD step = 1e-5L;
    for (Eigen::Index i = 0; i < base.size(); ++i) {
      auto up = base, down = base;
      up(i) += step;
      down(i) -= step;
      const double numeric = static_cast<double>((loss_at(up) - loss_at(down)) / (2 * step));
      const double denom = std::max({std::abs(numeric), std::abs(analytic(i)), 1e-8});
      EXPECT_LT(std::abs(numeric - analytic(i)) / denom, 1e-4) << "seed " << seed << " param " << i;
    }
  }
}

TEST(Train, ConstantTargetIsLearned) {
  const auto data = dataset_from(Eigen::VectorXd::Constant(120, 0.7), 6);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.learning_rate = 1e-2;
  cfg.batch_size = 32;
  cfg.seed = 1;
  const auto r = train(init(4, 1), data, cfg);
  EXPECT_LT(r.loss_history.back(), r.loss_history.front());
  const auto pred = predict_series(r.params, data);
  EXPECT_LT((pred.y_hat.array() - 0.7).abs().maxCoeff(), 1e-3);
}

TEST(Train, DeterministicForSeed) {
  Eigen::VectorXd x(80);
  for (int i = 0; i < 80; ++i) x(i) = std::sin(i * 0.3);
  const auto data = dataset_from(x, 8);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 16;
  cfg.seed = 9;
  const auto a = train(init(5, 2), data, cfg);
  const auto b = train(init(5, 2), data, cfg);
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_TRUE(a.params == b.params);
  cfg.seed = 10;
  EXPECT_NE(train(init(5, 2), data, cfg).loss_history, a.loss_history);
}

TEST(Train, SinusoidBeatsPersistence) {
  const int n = 600;
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = std::sin(2 * M_PI * i / 24.0);
  const auto data = dataset_from(x, 24);
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.learning_rate = 5e-3;
  cfg.batch_size = 32;
  cfg.seed = 4;
  const auto r = train(init(16, 4), data, cfg);
  EXPECT_LT(r.loss_history.back(), r.loss_history.front());
  const auto base = persistence_baseline(data);
  const Eigen::ArrayXd res = (base.y_hat - base.y).array();
  const double var = (res - res.mean()).square().mean();
  EXPECT_LT(r.loss_history.back(), var);
}

TEST(Train, SkipsExcludedWindows) {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(60, 0.5);
  FeatureRows f = FeatureRows::Zero(60, 5);
  f.col(kPollutantColumn) = x;
  std::vector<bool> trainable(56, true);
  const WindowedDataset clean(f, 4, kT0, Duration{3600}, trainable);
  for (int i = 30; i < 60; ++i) {
    f(i, kPollutantColumn) = 1e3;
    trainable[i - 4] = false;
  }
  const WindowedDataset dirty(f, 4, kT0, Duration{3600}, trainable);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 3;
  // Same trainable content, so the same result.
  EXPECT_TRUE(train(init(3, 3), clean.head(26), cfg).params == train(init(3, 3), dirty, cfg).params);
}

TEST(Train, ConfigValidation) {
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.learning_rate = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.clip_norm = -1;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Train, DivergenceIsReported) {
  Eigen::VectorXd x(50);
  for (int i = 0; i < 50; ++i) x(i) = (i % 2 ? 1e150 : -1e150);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.optimizer = Optimizer::sgd;
  cfg.clip_norm = 1e300;
  cfg.learning_rate = 1e10;
  try {
    train(init(2, 1), dataset_from(x, 3), cfg);
    FAIL();
  } catch (const TrainingDiverged& e) {
    EXPECT_EQ(e.code(), Errc::TrainingDiverged);
    EXPECT_GE(e.epoch(), 0);
  }
}

TEST(Predict, AlignedWithTargets) {
  Eigen::VectorXd x(30);
  for (int i = 0; i < 30; ++i) x(i) = i;
  const auto data = dataset_from(x, 5);
  const auto p = init(3, 1);
  const auto pred = predict_series(p, data);
  ASSERT_EQ(pred.size(), 25);
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    EXPECT_DOUBLE_EQ(pred.y(i), data.target(i));
    EXPECT_EQ(pred.times[i], data.target_time(i));
    EXPECT_NEAR(pred.y_hat(i), forward(p, data.input(i)), 1e-12);
  }
  EXPECT_TRUE(predict_series(p, data.head(0)).empty());
  EXPECT_THROW(predict_series(init(3, 1, 4), data), Error);
}

TEST(Persistence, ConstantAndRamp) {
  const auto c = persistence_baseline(dataset_from(Eigen::VectorXd::Constant(10, 3.0), 2));
  EXPECT_EQ(c.size(), 8);
  EXPECT_EQ((c.y_hat - c.y).cwiseAbs().maxCoeff(), 0.0);
  Eigen::VectorXd ramp(10);
  for (int i = 0; i < 10; ++i) ramp(i) = 2.5 * i;
  const auto r = persistence_baseline(dataset_from(ramp, 3));
  EXPECT_EQ(r.size(), 7);
  for (Eigen::Index i = 0; i < r.size(); ++i) EXPECT_DOUBLE_EQ(r.y(i) - r.y_hat(i), 2.5);
}

TEST(Mape, HandValues) {
  PredictionSet p;
  p.y = Eigen::Vector2d(2, 4);
  p.y_hat = Eigen::Vector2d(1, 5);
  EXPECT_DOUBLE_EQ(mape(p), 0.375);
  p.y_hat = p.y;
  EXPECT_EQ(mape(p), 0.0);
  p.y = Eigen::Vector2d(0, 1);
  p.y_hat = Eigen::Vector2d(1e-9, 1);
  EXPECT_DOUBLE_EQ(mape(p), 0.5);
  EXPECT_THROW(mape(PredictionSet{}), Error);
}

TEST(Checkpoint, RoundTripIsExact) {
  Checkpoint c;
  c.params = init(5, 77);
  c.params.head_bias = 0.1 + 0.2;
  c.norm.mean << 1.0 / 3, 2, 3, 4, 5;
  c.norm.std << 1, 1, 0.7, 1, 2;
  c.norm.degenerate[1] = true;
  c.window_length = 24;
  c.config_hash = "abc";
  const auto text = write_checkpoint(c);
  const auto back = read_checkpoint(text);
  EXPECT_TRUE(back.params == c.params);
  EXPECT_EQ(back.norm.mean, c.norm.mean);
  EXPECT_EQ(back.norm.std, c.norm.std);
  EXPECT_EQ(back.norm.degenerate, c.norm.degenerate);
  EXPECT_EQ(back.window_length, 24);
  EXPECT_EQ(write_checkpoint(back), text);
  EXPECT_THROW(read_checkpoint("{\"format\": \"other\"}"), Error);
  EXPECT_THROW(read_checkpoint("not json"), Error);
}
