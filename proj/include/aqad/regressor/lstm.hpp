#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "aqad/core/error.hpp"
#include "aqad/core/series.hpp"

namespace aqad::regressor {

/// Single-layer LSTM with a scalar dense head. Gate rows are stacked in the
/// order (input, forget, candidate, output), each block hidden_dim tall.
template <typename Scalar>
struct LstmParams {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix input_weights;      // 4H x D
  Matrix recurrent_weights;  // 4H x H
  Vector bias;               // 4H
  Vector head_weights;       // H
  Scalar head_bias{0};

  static LstmParams zeros(Eigen::Index input_dim, Eigen::Index hidden_dim) {
    LstmParams p;
    p.input_weights = Matrix::Zero(4 * hidden_dim, input_dim);
    p.recurrent_weights = Matrix::Zero(4 * hidden_dim, hidden_dim);
    p.bias = Vector::Zero(4 * hidden_dim);
    p.head_weights = Vector::Zero(hidden_dim);
    p.head_bias = Scalar(0);
    return p;
  }

  Eigen::Index hidden_dim() const { return recurrent_weights.cols(); }
  Eigen::Index input_dim() const { return input_weights.cols(); }
  Eigen::Index parameter_count() const {
    return input_weights.size() + recurrent_weights.size() + bias.size() + head_weights.size() + 1;
  }

  Vector flatten() const {
    Vector flat(parameter_count());
    Eigen::Index at = 0;
    auto put = [&](const auto& m) {
      flat.segment(at, m.size()) = Eigen::Map<const Vector>(m.data(), m.size());
      at += m.size();
    };
    put(input_weights);
    put(recurrent_weights);
    put(bias);
    put(head_weights);
    flat(at) = head_bias;
    return flat;
  }

  void assign(const Eigen::Ref<const Vector>& flat) {
    if (flat.size() != parameter_count()) throw Error(Errc::ShapeMismatch, "flat parameter size mismatch");
    Eigen::Index at = 0;
    auto take = [&](auto& m) {
      Eigen::Map<Vector>(m.data(), m.size()) = flat.segment(at, m.size());
      at += m.size();
    };
    take(input_weights);
    take(recurrent_weights);
    take(bias);
    take(head_weights);
    head_bias = flat(at);
  }

  bool all_finite() const {
    return input_weights.allFinite() && recurrent_weights.allFinite() && bias.allFinite() &&
           head_weights.allFinite() && std::isfinite(static_cast<double>(head_bias));
  }

  friend bool operator==(const LstmParams& a, const LstmParams& b) {
    return a.input_weights == b.input_weights && a.recurrent_weights == b.recurrent_weights &&
           a.bias == b.bias && a.head_weights == b.head_weights && a.head_bias == b.head_bias;
  }
};

using Params = LstmParams<double>;

/// Per-step activations kept for backpropagation. Index 0 of `cells` and
/// `hiddens` is the zero initial state.
template <typename Scalar>
struct LstmTape {
  using Matrix = typename LstmParams<Scalar>::Matrix;
  std::vector<Matrix> gates;  // post-activation, 4H x B
  std::vector<Matrix> cells;
  std::vector<Matrix> hiddens;
};

/// Inputs time-major: steps[t] is D x B, one column per sequence.
template <typename Scalar>
using StepInputs = std::vector<typename LstmParams<Scalar>::Matrix>;

namespace detail {

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
  using S = typename Derived::Scalar;
  return S(1) / (S(1) + (-x).exp());
}

}  // namespace detail

/// Runs the recurrence from zero state and returns the head output per
/// column (1 x B). Fills `tape` when given.
template <typename Scalar>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> forward_batch(const LstmParams<Scalar>& p,
                                                       const StepInputs<Scalar>& steps,
                                                       LstmTape<Scalar>* tape = nullptr) {
  using Matrix = typename LstmParams<Scalar>::Matrix;
  const Eigen::Index H = p.hidden_dim();
  const Eigen::Index B = steps.empty() ? 0 : steps.front().cols();
  Matrix h = Matrix::Zero(H, B);
  Matrix c = Matrix::Zero(H, B);
  if (tape) {
    tape->gates.clear();
    tape->cells.assign(1, c);
    tape->hiddens.assign(1, h);
  }
  Matrix a(4 * H, B);
  for (const Matrix& x : steps) {
    a.noalias() = p.input_weights * x;
    a.noalias() += p.recurrent_weights * h;
    a.colwise() += p.bias;
    a.topRows(2 * H) = detail::sigmoid(a.topRows(2 * H).array()).matrix();
    a.middleRows(2 * H, H) = a.middleRows(2 * H, H).array().tanh().matrix();
    a.bottomRows(H) = detail::sigmoid(a.bottomRows(H).array()).matrix();
    c = (a.middleRows(H, H).array() * c.array() + a.topRows(H).array() * a.middleRows(2 * H, H).array()).matrix();
    h = (a.bottomRows(H).array() * c.array().tanh()).matrix();
    if (tape) {
      tape->gates.push_back(a);
      tape->cells.push_back(c);
      tape->hiddens.push_back(h);
    }
  }
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> out = p.head_weights.transpose() * h;
  out.array() += p.head_bias;
  return out;
}

/// Mean squared error over the batch and its full BPTT gradient.
template <typename Scalar>
Scalar loss_and_gradient(const LstmParams<Scalar>& p, const StepInputs<Scalar>& steps,
                         const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& targets,
                         LstmParams<Scalar>& grad) {
  using Matrix = typename LstmParams<Scalar>::Matrix;
  const Eigen::Index H = p.hidden_dim();
  const Eigen::Index B = targets.size();
  LstmTape<Scalar> tape;
  const auto y_hat = forward_batch(p, steps, &tape);
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> residual = y_hat - targets.transpose();
  const Scalar loss = residual.squaredNorm() / Scalar(B);

  grad = LstmParams<Scalar>::zeros(p.input_dim(), H);
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> d_out = residual * (Scalar(2) / Scalar(B));
  grad.head_weights.noalias() = tape.hiddens.back() * d_out.transpose();
  grad.head_bias = d_out.sum();

  Matrix dh = p.head_weights * d_out;
  Matrix dc = Matrix::Zero(H, B);
  Matrix da(4 * H, B);
  for (auto t = static_cast<Eigen::Index>(steps.size()); t-- > 0;) {
    const Matrix& g = tape.gates[static_cast<std::size_t>(t)];
    const auto in = g.topRows(H).array();
    const auto forget = g.middleRows(H, H).array();
    const auto cand = g.middleRows(2 * H, H).array();
    const auto out = g.bottomRows(H).array();
    const auto c_prev = tape.cells[static_cast<std::size_t>(t)].array();
    const Matrix tanh_c = tape.cells[static_cast<std::size_t>(t) + 1].array().tanh().matrix();

    dc.array() += dh.array() * out * (Scalar(1) - tanh_c.array().square());
    da.topRows(H) = (dc.array() * cand * in * (Scalar(1) - in)).matrix();
    da.middleRows(H, H) = (dc.array() * c_prev * forget * (Scalar(1) - forget)).matrix();
    da.middleRows(2 * H, H) = (dc.array() * in * (Scalar(1) - cand.square())).matrix();
    da.bottomRows(H) = (dh.array() * tanh_c.array() * out * (Scalar(1) - out)).matrix();

    grad.input_weights.noalias() += da * steps[static_cast<std::size_t>(t)].transpose();
    grad.recurrent_weights.noalias() += da * tape.hiddens[static_cast<std::size_t>(t)].transpose();
    grad.bias += da.rowwise().sum();

    dh.noalias() = p.recurrent_weights.transpose() * da;
    dc = (dc.array() * forget).matrix();
  }
  return loss;
}

/// Deterministic initialization: weights uniform in +-1/sqrt(hidden_dim),
/// forget-gate bias 1, everything else zero. Throws InvalidArgument when
/// hidden_dim < 1.
Params init(Eigen::Index hidden_dim, std::uint64_t seed, Eigen::Index input_dim = kFeatureDim);

/// Prediction for one l_s x D window. Throws NonFiniteInput.
double forward(const Params& params, const Eigen::Ref<const Eigen::MatrixXd>& window);

/// Time-major batch built from windows `indices` of `data`.
struct Batch {
  StepInputs<double> steps;
  Eigen::VectorXd targets;
};
Batch gather_batch(const WindowedDataset& data, std::span<const Eigen::Index> indices);

}  // namespace aqad::regressor
