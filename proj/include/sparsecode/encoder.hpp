#pragma once

// The expand-and-sparsify transform: y = Theta x followed by k-winner-take-all
// or calibrated k-thresholding.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sparsecode/errors.hpp"
#include "sparsecode/geometry.hpp"

namespace sparsecode {

/// The m x d random matrix Theta together with the distribution and seed it
/// was drawn from.
template <typename Scalar = double>
class ExpansionMatrix {
 public:
  ExpansionMatrix(Matrix<Scalar> rows, DistributionSpec dist, std::uint64_t seed)
      : rows_(std::move(rows)), dist_(std::move(dist)), seed_(seed) {
    if (rows_.rows() < 1) throw ParameterError("ExpansionMatrix needs at least one row");
    if (rows_.cols() != dist_.dim()) throw ShapeError("ExpansionMatrix column count differs from distribution dim");
  }

  const Matrix<Scalar>& rows() const noexcept { return rows_; }
  auto row(Index j) const { return rows_.row(j); }
  Index m() const noexcept { return rows_.rows(); }
  Index dim() const noexcept { return rows_.cols(); }
  const DistributionSpec& distribution() const noexcept { return dist_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  Matrix<Scalar> rows_;
  DistributionSpec dist_;
  std::uint64_t seed_;
};

using ExpansionMatrixd = ExpansionMatrix<double>;

template <typename Scalar = double>
ExpansionMatrix<Scalar> build_expansion(const DistributionSpec& dist, Index m, std::uint64_t seed) {
  return ExpansionMatrix<Scalar>(sample_expansion_rows<Scalar>(dist, m, seed), dist, seed);
}

/// Active unit indices of a binary code z in {0,1}^m, strictly increasing.
class SparseCode {
 public:
  SparseCode() = default;
  SparseCode(std::vector<Index> active, Index m) : active_(std::move(active)), m_(m) {
    for (std::size_t i = 0; i < active_.size(); ++i) {
      if (active_[i] < 0 || active_[i] >= m_) throw ParameterError("SparseCode index out of range");
      if (i > 0 && active_[i] <= active_[i - 1]) throw ParameterError("SparseCode indices must be strictly increasing");
    }
  }

  const std::vector<Index>& active() const noexcept { return active_; }
  Index m() const noexcept { return m_; }
  std::size_t size() const noexcept { return active_.size(); }
  bool empty() const noexcept { return active_.empty(); }
  bool contains(Index j) const { return std::binary_search(active_.begin(), active_.end(), j); }

  // Dense 0/1 form.
  Eigen::VectorXd dense() const {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(m_);
    for (Index j : active_) z[j] = 1.0;
    return z;
  }

  bool operator==(const SparseCode&) const = default;

 private:
  std::vector<Index> active_;
  Index m_ = 0;
};

/// Per-unit thresholds calibrated to fire at rate k/m under the input measure.
template <typename Scalar = double>
class ThresholdVector {
 public:
  ThresholdVector(Vector<Scalar> tau, Index k, Index calibration_sample_size)
      : tau_(std::move(tau)), k_(k), n_cal_(calibration_sample_size) {
    if (k_ < 1 || k_ > tau_.size()) throw ParameterError("ThresholdVector: k must lie in [1, m]");
    if (!tau_.allFinite()) throw ParameterError("ThresholdVector entries must be finite");
  }

  const Vector<Scalar>& tau() const noexcept { return tau_; }
  Scalar operator[](Index j) const { return tau_[j]; }
  Index m() const noexcept { return tau_.size(); }
  Index k() const noexcept { return k_; }
  double target_rate() const noexcept { return double(k_) / double(tau_.size()); }
  Index calibration_sample_size() const noexcept { return n_cal_; }

  // Copy with one threshold replaced.
  ThresholdVector with(Index j, Scalar value) const {
    ThresholdVector t = *this;
    t.tau_[j] = value;
    return t;
  }

 private:
  Vector<Scalar> tau_;
  Index k_;
  Index n_cal_;
};

using ThresholdVectord = ThresholdVector<double>;

enum class Scheme { WTA, Threshold };

inline std::string to_string(Scheme s) { return s == Scheme::WTA ? "wta" : "threshold"; }

/// Sparsification step: k-WTA or k-thresholding.
template <typename Scalar = double>
class Sparsifier {
 public:
  static Sparsifier winner_take_all(Index k) {
    if (k < 1) throw ParameterError("k-WTA requires k >= 1");
    return Sparsifier(Scheme::WTA, k, std::nullopt);
  }
  static Sparsifier threshold(ThresholdVector<Scalar> tau) {
    const Index k = tau.k();
    return Sparsifier(Scheme::Threshold, k, std::move(tau));
  }

  Scheme scheme() const noexcept { return scheme_; }
  Index k() const noexcept { return k_; }
  const std::optional<ThresholdVector<Scalar>>& thresholds() const noexcept { return tau_; }

 private:
  Sparsifier(Scheme s, Index k, std::optional<ThresholdVector<Scalar>> tau)
      : scheme_(s), k_(k), tau_(std::move(tau)) {}

  Scheme scheme_;
  Index k_;
  std::optional<ThresholdVector<Scalar>> tau_;
};

using Sparsifierd = Sparsifier<double>;

// ---------------------------------------------------------------------------
// Expansion

template <typename Scalar, typename Derived>
Vector<Scalar> expand(const ExpansionMatrix<Scalar>& theta, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != theta.dim()) throw ShapeError("expand: input dimension differs from Theta");
  return theta.rows() * x.template cast<Scalar>();
}

template <typename Scalar>
Vector<Scalar> expand(const ExpansionMatrix<Scalar>& theta, const UnitVector<Scalar>& x) {
  return expand(theta, x.coords());
}

// ---------------------------------------------------------------------------
// Sparsification kernels writing into a caller-owned buffer.

namespace detail {

// k largest entries of y, ties toward the lower index, output sorted ascending.
// Keeps a heap of the current k best with the worst on top; a later index can
// only displace the worst when strictly larger, which realizes the tie rule.
template <typename Derived>
void top_k_into(const Eigen::DenseBase<Derived>& y, Index k, std::vector<Index>& out,
                std::vector<std::pair<typename Derived::Scalar, Index>>& heap) {
  using Scalar = typename Derived::Scalar;
  using Entry = std::pair<Scalar, Index>;
  const Index m = y.size();
  const auto better = [](const Entry& a, const Entry& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  };
  out.clear();
  if (k >= m) {
    out.resize(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j) out[j] = j;
    return;
  }
  heap.clear();
  for (Index j = 0; j < k; ++j) heap.emplace_back(y[j], j);
  std::make_heap(heap.begin(), heap.end(), better);
  for (Index j = k; j < m; ++j) {
    const Scalar v = y[j];
    if (v > heap.front().first) {
      std::pop_heap(heap.begin(), heap.end(), better);
      heap.back() = Entry(v, j);
      std::push_heap(heap.begin(), heap.end(), better);
    }
  }
  for (const Entry& e : heap) out.push_back(e.second);
  std::sort(out.begin(), out.end());
}

template <typename Derived, typename Scalar>
void threshold_into(const Eigen::DenseBase<Derived>& y, const ThresholdVector<Scalar>& tau, std::vector<Index>& out) {
  out.clear();
  const Index m = y.size();
  for (Index j = 0; j < m; ++j)
    if (y[j] >= tau[j]) out.push_back(j);
}

}  // namespace detail

/// Positions of the k largest entries of y; among equal values the lower
/// index wins.
template <typename Derived>
SparseCode sparsify_kwta(const Eigen::DenseBase<Derived>& y, Index k) {
  if (k < 1 || k > y.size()) throw ParameterError("sparsify_kwta: k must lie in [1, m]");
  std::vector<Index> out;
  std::vector<std::pair<typename Derived::Scalar, Index>> heap;
  heap.reserve(static_cast<std::size_t>(k));
  detail::top_k_into(y, k, out, heap);
  return SparseCode(std::move(out), y.size());
}

/// Units with y_j >= tau_j. The result may be empty.
template <typename Derived, typename Scalar>
SparseCode sparsify_threshold(const Eigen::DenseBase<Derived>& y, const ThresholdVector<Scalar>& tau) {
  if (y.size() != tau.m()) throw ShapeError("sparsify_threshold: length mismatch");
  std::vector<Index> out;
  detail::threshold_into(y, tau, out);
  return SparseCode(std::move(out), y.size());
}

template <typename Derived, typename Scalar>
SparseCode sparsify(const Sparsifier<Scalar>& s, const Eigen::DenseBase<Derived>& y) {
  if (s.scheme() == Scheme::WTA) return sparsify_kwta(y, s.k());
  return sparsify_threshold(y, *s.thresholds());
}

template <typename Scalar, typename Derived>
SparseCode encode(const ExpansionMatrix<Scalar>& theta, const Sparsifier<Scalar>& s,
                  const Eigen::MatrixBase<Derived>& x) {
  if (s.scheme() == Scheme::WTA && s.k() > theta.m()) throw ParameterError("encode: k exceeds m");
  if (s.scheme() == Scheme::Threshold && s.thresholds()->m() != theta.m())
    throw ShapeError("encode: threshold vector length differs from m");
  return sparsify(s, expand(theta, x));
}

template <typename Scalar>
SparseCode encode(const ExpansionMatrix<Scalar>& theta, const Sparsifier<Scalar>& s, const UnitVector<Scalar>& x) {
  return encode(theta, s, x.coords());
}

/// Columns per expansion block so that an m x B block stays around 2 MB.
inline Index batch_columns(Index m) { return std::clamp<Index>((Index(1) << 18) / std::max<Index>(m, 1), 1, 1024); }

/// Encodes every column of X and calls visit(column, active) with the sorted
/// active indices. The span is only valid during the call.
template <typename Scalar, typename Visit>
void encode_batch(const ExpansionMatrix<Scalar>& theta, const Sparsifier<Scalar>& s,
                  const Eigen::Ref<const Matrix<Scalar>>& X, Visit&& visit) {
  if (X.rows() != theta.dim()) throw ShapeError("encode_batch: input dimension differs from Theta");
  if (s.scheme() == Scheme::WTA && s.k() > theta.m()) throw ParameterError("encode_batch: k exceeds m");
  if (s.scheme() == Scheme::Threshold && s.thresholds()->m() != theta.m())
    throw ShapeError("encode_batch: threshold vector length differs from m");
  const Index B = batch_columns(theta.m());
  Matrix<Scalar> Y;
  std::vector<Index> active;
  std::vector<std::pair<Scalar, Index>> heap;
  for (Index c0 = 0; c0 < X.cols(); c0 += B) {
    const Index nb = std::min(B, X.cols() - c0);
    Y.noalias() = theta.rows() * X.middleCols(c0, nb);
    for (Index c = 0; c < nb; ++c) {
      if (s.scheme() == Scheme::WTA)
        detail::top_k_into(Y.col(c), s.k(), active, heap);
      else
        detail::threshold_into(Y.col(c), *s.thresholds(), active);
      visit(c0 + c, std::span<const Index>(active));
    }
  }
}

// ---------------------------------------------------------------------------
// Threshold calibration

/// Smallest admissible calibration sample: n_cal >= 10 m / k.
inline Index min_calibration_size(Index m, Index k) { return (10 * m + k - 1) / k; }

/// Calibrates thresholds from an explicit calibration sample (one point per
/// column). tau_j is the ceil((1 - k/m) n)-th smallest value of theta_j . x_i;
/// when k = m every unit gets the lowest finite value so it always fires.
template <typename Scalar>
ThresholdVector<Scalar> calibrate_thresholds_from_samples(const ExpansionMatrix<Scalar>& theta,
                                                          const Eigen::Ref<const Matrix<Scalar>>& X, Index k) {
  const Index m = theta.m();
  const Index n = X.cols();
  if (k < 1 || k > m) throw ParameterError("calibrate_thresholds: k must lie in [1, m]");
  if (X.rows() != theta.dim()) throw ShapeError("calibrate_thresholds: sample dimension differs from Theta");
  if (n < min_calibration_size(m, k))
    throw CalibrationError("calibrate_thresholds: n_cal must be >= 10 m / k (got " + std::to_string(n) + ")");
  Vector<Scalar> tau(m);
  if (k == m) {
    tau.setConstant(std::numeric_limits<Scalar>::lowest());
    return ThresholdVector<Scalar>(std::move(tau), k, n);
  }
  // 1-based rank, exact integer ceiling of (m - k) n / m.
  const Index rank = ((m - k) * n + m - 1) / m;
  using RowMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Index block = std::max<Index>(1, std::min<Index>(m, (Index(1) << 21) / std::max<Index>(n, 1)));
  RowMajor Y;
  for (Index j0 = 0; j0 < m; j0 += block) {
    const Index nb = std::min(block, m - j0);
    Y.noalias() = theta.rows().middleRows(j0, nb) * X;
    for (Index r = 0; r < nb; ++r) {
      Scalar* first = Y.row(r).data();
      std::nth_element(first, first + (rank - 1), first + n);
      tau[j0 + r] = first[rank - 1];
    }
  }
  return ThresholdVector<Scalar>(std::move(tau), k, n);
}

template <typename Scalar>
ThresholdVector<Scalar> calibrate_thresholds(const ExpansionMatrix<Scalar>& theta, const ManifoldSpec& manifold,
                                             Index k, Index n_cal, std::uint64_t seed) {
  if (manifold.ambient_dim() != theta.dim()) throw ShapeError("calibrate_thresholds: manifold dimension differs from Theta");
  if (k < 1 || k > theta.m()) throw ParameterError("calibrate_thresholds: k must lie in [1, m]");
  if (n_cal < min_calibration_size(theta.m(), k))
    throw CalibrationError("calibrate_thresholds: n_cal must be >= 10 m / k (got " + std::to_string(n_cal) + ")");
  const Matrix<Scalar> X = sample_input<Scalar>(manifold, seed, n_cal);
  return calibrate_thresholds_from_samples<Scalar>(theta, X, k);
}

}  // namespace sparsecode
