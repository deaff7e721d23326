#pragma once

// Reference computations written without the library, used to check it.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

namespace oracle {

struct Pick {
  double k = 0.0;
  double theta = 0.0;
  long double objective = 0.0;
  std::size_t above = 0;
  std::size_t runs = 0;
  int ties = 0;  // other k values that flag the same set as the winner
};

inline long double mean(const std::vector<long double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0L) / static_cast<long double>(v.size());
}

inline long double pstd(const std::vector<long double>& v) {
  const long double m = mean(v);
  long double s = 0;
  for (long double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<long double>(v.size()));
}

/// Exhaustive argmax of the threshold objective over k_grid. Candidates that
/// flag the same index set share one objective value, so ties between them
/// are exact and resolve to the first (smallest) k.
inline std::optional<Pick> best_threshold(const std::vector<double>& w, const std::vector<double>& k_grid) {
  std::vector<long double> all(w.begin(), w.end());
  const long double mu = mean(all), sd = pstd(all);
  if (mu == 0 || sd == 0) return std::nullopt;
  std::map<std::vector<bool>, long double> seen;
  std::optional<Pick> best;
  std::vector<bool> best_flag;
  for (double k : k_grid) {
    const double theta = static_cast<double>(mu + static_cast<long double>(k) * sd);
    std::vector<bool> flag(w.size());
    std::vector<long double> below;
    std::size_t above = 0, runs = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      flag[i] = w[i] > theta;
      if (flag[i]) {
        ++above;
        if (i == 0 || !flag[i - 1]) ++runs;
      } else if (w[i] < theta) {
        below.push_back(w[i]);
      }
    }
    if (above == 0 || below.empty()) continue;
    long double obj;
    if (auto it = seen.find(flag); it != seen.end()) {
      obj = it->second;
    } else {
      obj = ((mu - mean(below)) / mu + (sd - pstd(below)) / sd) / static_cast<long double>(above + runs * runs);
      seen.emplace(flag, obj);
    }
    if (!best || obj > best->objective) {
      best = Pick{k, theta, obj, above, runs, 0};
      best_flag = flag;
    } else if (flag == best_flag) {
      ++best->ties;
    }
  }
  return best;
}

/// Length-weighted confusion over unit steps: gt and det are lists of
/// half-open [begin, end) integer spans, range [lo, hi).
struct Confusion {
  long long tp = 0, fp = 0, fn = 0;
};

inline Confusion step_confusion(const std::vector<std::pair<long long, long long>>& gt,
                                const std::vector<std::pair<long long, long long>>& det, long long lo,
                                long long hi) {
  auto covered = [](const auto& spans, long long t) {
    return std::any_of(spans.begin(), spans.end(), [&](const auto& s) { return s.first <= t && t < s.second; });
  };
  Confusion c;
  for (long long t = lo; t < hi; ++t) {
    const bool g = covered(gt, t), d = covered(det, t);
    c.tp += g && d;
    c.fp += !g && d;
    c.fn += g && !d;
  }
  return c;
}

}  // namespace oracle
