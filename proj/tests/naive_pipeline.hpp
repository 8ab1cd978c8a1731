#pragma once

// Straightforward reference implementation of expand -> sparsify -> learn ->
// predict on std::vector, used to cross-check the library on small
// instances. Full sorts, explicit loops, no Eigen products.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace naive {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major, one vector per row or per sample

inline Vec expand(const Mat& theta, const Vec& x) {
  Vec y(theta.size(), 0.0);
  for (std::size_t j = 0; j < theta.size(); ++j)
    for (std::size_t c = 0; c < x.size(); ++c) y[j] += theta[j][c] * x[c];
  return y;
}

inline std::vector<long> top_k(const Vec& y, long k) {
  std::vector<long> idx(y.size());
  std::iota(idx.begin(), idx.end(), 0L);
  std::sort(idx.begin(), idx.end(), [&](long a, long b) { return y[a] > y[b] || (y[a] == y[b] && a < b); });
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline std::vector<long> above(const Vec& y, const Vec& tau) {
  std::vector<long> out;
  for (std::size_t j = 0; j < y.size(); ++j)
    if (y[j] >= tau[j]) out.push_back(static_cast<long>(j));
  return out;
}

inline Vec calibrate(const Mat& theta, const Mat& cal, long k) {
  const long m = static_cast<long>(theta.size());
  const long n = static_cast<long>(cal.size());
  Vec tau(theta.size(), std::numeric_limits<double>::lowest());
  if (k == m) return tau;
  const long rank = static_cast<long>(std::ceil((1.0 - double(k) / double(m)) * double(n) - 1e-9));
  for (long j = 0; j < m; ++j) {
    Vec ys;
    for (const Vec& x : cal) ys.push_back(expand({theta[j]}, x)[0]);
    std::sort(ys.begin(), ys.end());
    tau[j] = ys[rank - 1];
  }
  return tau;
}

// Distance from theta to the unit sphere of the first s coordinates.
inline bool good(const Vec& theta, int s, double half_reach) {
  double lead2 = 0.0;
  for (int c = 0; c < s; ++c) lead2 += theta[c] * theta[c];
  if (lead2 == 0.0) return false;
  const double lead = std::sqrt(lead2);
  double d2 = 0.0;
  for (std::size_t c = 0; c < theta.size(); ++c) {
    const double p = c < std::size_t(s) ? theta[c] / lead : 0.0;
    d2 += (theta[c] - p) * (theta[c] - p);
  }
  return std::sqrt(d2) < half_reach;
}

struct Model {
  Mat theta;
  bool wta = true;
  long k = 1;
  Vec tau;
  std::vector<bool> good;
  Vec weights;
  std::vector<std::int64_t> counts;

  std::vector<long> code(const Vec& x) const { return wta ? top_k(expand(theta, x), k) : above(expand(theta, x), tau); }
};

template <typename F>
void learn(Model& model, const Mat& train, F f) {
  const std::size_t m = model.theta.size();
  Vec sums(m, 0.0);
  model.counts.assign(m, 0);
  for (const Vec& x : train) {
    const double v = f(x);
    for (long j : model.code(x)) {
      sums[j] += v;
      ++model.counts[j];
    }
  }
  model.weights.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j)
    if (model.good[j] && model.counts[j] > 0) model.weights[j] = sums[j] / static_cast<double>(model.counts[j]);
}

struct Prediction {
  double value = 0.0;
  bool covered = false;
};

inline Prediction predict(const Model& model, const Vec& x) {
  const std::vector<long> z = model.code(x);
  double sum = 0.0;
  if (model.wta) {
    for (long j : z) sum += model.weights[j];
    return {sum / static_cast<double>(model.k), true};
  }
  long n = 0;
  for (long j : z) {
    if (!model.good[j]) continue;
    sum += model.weights[j];
    ++n;
  }
  if (n == 0) return {0.0, false};
  return {sum / static_cast<double>(n), true};
}

}  // namespace naive
