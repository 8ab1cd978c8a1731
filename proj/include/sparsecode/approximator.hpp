#pragma once

// Cell-average linear readout on top of an expand-and-sparsify code.
//
// Unit j responds on a region C_j of the input space; its weight is the
// average of the target over C_j, estimated from training samples. Under k-WTA
// the prediction is (1/k) sum_j w_j z_j. Under k-thresholding it is the mean
// weight of the firing units that are "good" (within half the reach of the
// manifold); points where no good unit fires are reported as not covered.

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "sparsecode/encoder.hpp"
#include "sparsecode/geometry.hpp"

namespace sparsecode {

using GoodMask = Eigen::Array<bool, Eigen::Dynamic, 1>;
using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

enum class GoodnessMode { AllGood, ReachBand };

class GoodnessCriterion {
 public:
  static GoodnessCriterion all_good() { return GoodnessCriterion(GoodnessMode::AllGood, std::nullopt); }
  // theta_j is good iff its distance to the manifold is below reach / 2.
  static GoodnessCriterion reach_band(const ManifoldSpec& m) { return GoodnessCriterion(GoodnessMode::ReachBand, m); }

  GoodnessMode mode() const noexcept { return mode_; }
  const std::optional<ManifoldSpec>& manifold() const noexcept { return manifold_; }

 private:
  GoodnessCriterion(GoodnessMode mode, std::optional<ManifoldSpec> m) : mode_(mode), manifold_(std::move(m)) {}
  GoodnessMode mode_;
  std::optional<ManifoldSpec> manifold_;
};

/// Good-unit mask. Rows whose projection is undefined are not good.
GoodMask classify_good(const ExpansionMatrixd& theta, const GoodnessCriterion& crit);

class ApproximatorModel {
 public:
  ApproximatorModel(std::shared_ptr<const ExpansionMatrixd> theta, Sparsifierd sparsifier, Eigen::VectorXd weights,
                    CountVector counts, GoodMask good_mask);

  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  const CountVector& counts() const noexcept { return counts_; }
  const GoodMask& good_mask() const noexcept { return good_; }
  const Sparsifierd& sparsifier() const noexcept { return sparsifier_; }
  Scheme scheme() const noexcept { return sparsifier_.scheme(); }
  Index k() const noexcept { return sparsifier_.k(); }
  const ExpansionMatrixd& theta() const noexcept { return *theta_; }
  const std::shared_ptr<const ExpansionMatrixd>& theta_ptr() const noexcept { return theta_; }
  Index m() const noexcept { return weights_.size(); }

  // Units that are good but saw no training sample.
  std::vector<Index> zero_count_units() const;
  Index used_unit_count() const { return (counts_.array() > 0).count(); }

 private:
  std::shared_ptr<const ExpansionMatrixd> theta_;
  Sparsifierd sparsifier_;
  Eigen::VectorXd weights_;
  CountVector counts_;
  GoodMask good_;
};

/// Per-unit sums and counts of target values, merged after a pass.
class CellAverager {
 public:
  explicit CellAverager(Index m) : sums_(Eigen::VectorXd::Zero(m)), counts_(CountVector::Zero(m)) {}

  void observe(std::span<const Index> active, double value) {
    for (Index j : active) {
      sums_[j] += value;
      ++counts_[j];
    }
  }

  void merge(const CellAverager& other) {
    sums_ += other.sums_;
    counts_ += other.counts_;
  }

  const Eigen::VectorXd& sums() const noexcept { return sums_; }
  const CountVector& counts() const noexcept { return counts_; }

  // sum / count for good units with count > 0, zero elsewhere.
  Eigen::VectorXd weights(const GoodMask& good) const;

 private:
  Eigen::VectorXd sums_;
  CountVector counts_;
};

/// Online form of the same estimate: w_j <- w_j + (f - w_j) / n_j each time
/// unit j fires.
class HebbianLearner {
 public:
  explicit HebbianLearner(Index m) : weights_(Eigen::VectorXd::Zero(m)), counts_(CountVector::Zero(m)) {}

  void observe(std::span<const Index> active, double value) {
    for (Index j : active) {
      ++counts_[j];
      weights_[j] += (value - weights_[j]) / static_cast<double>(counts_[j]);
    }
  }

  Eigen::VectorXd weights(const GoodMask& good) const { return good.select(weights_, 0.0); }
  const CountVector& counts() const noexcept { return counts_; }

 private:
  Eigen::VectorXd weights_;
  CountVector counts_;
};

/// Learns weights from an explicit training sample (one point per column).
ApproximatorModel learn_weights_from_samples(std::shared_ptr<const ExpansionMatrixd> theta, const Sparsifierd& sparsifier,
                                             const TargetFunction& f, const Eigen::Ref<const Eigen::MatrixXd>& X,
                                             const GoodnessCriterion& crit);

/// Learns weights from n_train fresh samples of the manifold's uniform measure.
ApproximatorModel learn_weights(std::shared_ptr<const ExpansionMatrixd> theta, const Sparsifierd& sparsifier,
                                const TargetFunction& f, const ManifoldSpec& manifold, Index n_train, std::uint64_t seed,
                                const GoodnessCriterion& crit);

struct Prediction {
  double value;
  bool covered;
};

/// Prediction from an already computed code.
Prediction predict_code(const ApproximatorModel& model, std::span<const Index> active);

template <typename Derived>
Prediction predict(const ApproximatorModel& model, const Eigen::MatrixBase<Derived>& x) {
  const SparseCode z = encode(model.theta(), model.sparsifier(), x);
  return predict_code(model, std::span<const Index>(z.active()));
}

inline Prediction predict(const ApproximatorModel& model, const UnitVectord& x) { return predict(model, x.coords()); }

struct ErrorReport {
  double sup_abs_err = 0.0;
  double mean_abs_err = 0.0;
  double non_covered_fraction = 0.0;
  Index n_test = 0;
  Index n_covered = 0;
  // Largest empirical cell diameter among the units the prediction reads.
  double max_cell_diam = 0.0;
};

/// Error of the model against f over the columns of X (covered points only).
ErrorReport evaluate_error(const ApproximatorModel& model, const TargetFunction& f,
                           const Eigen::Ref<const Eigen::MatrixXd>& X);

/// Sup and mean absolute error over n_test >= 1000 fresh samples.
ErrorReport sup_error(const ApproximatorModel& model, const TargetFunction& f, const ManifoldSpec& manifold,
                      Index n_test, std::uint64_t seed);

/// Empirical diameter of each unit's cell: the largest pairwise distance among
/// the columns of X that activate the unit (0 for fewer than two points).
/// This is a lower bound on the true diameter.
Eigen::VectorXd empirical_cell_diameters(const ApproximatorModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X);

}  // namespace sparsecode
