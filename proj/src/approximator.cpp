#include "sparsecode/approximator.hpp"

#include <algorithm>
#include <cmath>

namespace sparsecode {
namespace {

constexpr Index kSampleChunk = 8192;

bool reads_unit(const ApproximatorModel& model, Index j) {
  return model.scheme() == Scheme::WTA || model.good_mask()[j];
}

}  // namespace

GoodMask classify_good(const ExpansionMatrixd& theta, const GoodnessCriterion& crit) {
  GoodMask good = GoodMask::Constant(theta.m(), true);
  if (crit.mode() == GoodnessMode::AllGood) return good;
  const ManifoldSpec& manifold = *crit.manifold();
  if (manifold.ambient_dim() != theta.dim()) throw ShapeError("classify_good: manifold dimension differs from Theta");
  const double half_reach = 0.5 * manifold.reach();
  for (Index j = 0; j < theta.m(); ++j) {
    try {
      const auto proj = project_to_manifold(manifold, theta.row(j).transpose());
      good[j] = proj.delta < half_reach;
    } catch (const DegenerateInputError&) {
      good[j] = false;
    }
  }
  return good;
}

ApproximatorModel::ApproximatorModel(std::shared_ptr<const ExpansionMatrixd> theta, Sparsifierd sparsifier,
                                     Eigen::VectorXd weights, CountVector counts, GoodMask good_mask)
    : theta_(std::move(theta)),
      sparsifier_(std::move(sparsifier)),
      weights_(std::move(weights)),
      counts_(std::move(counts)),
      good_(std::move(good_mask)) {
  if (!theta_) throw ParameterError("ApproximatorModel needs an expansion matrix");
  const Index m = theta_->m();
  if (weights_.size() != m || counts_.size() != m || good_.size() != m)
    throw ShapeError("ApproximatorModel: weights, counts and mask must have length m");
  for (Index j = 0; j < m; ++j) {
    if ((!good_[j] || counts_[j] == 0) && weights_[j] != 0.0)
      throw ParameterError("ApproximatorModel: non-good or unobserved units must have zero weight");
  }
}

std::vector<Index> ApproximatorModel::zero_count_units() const {
  std::vector<Index> out;
  for (Index j = 0; j < m(); ++j)
    if (good_[j] && counts_[j] == 0) out.push_back(j);
  return out;
}

Eigen::VectorXd CellAverager::weights(const GoodMask& good) const {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(sums_.size());
  for (Index j = 0; j < sums_.size(); ++j)
    if (good[j] && counts_[j] > 0) w[j] = sums_[j] / static_cast<double>(counts_[j]);
  return w;
}

ApproximatorModel learn_weights_from_samples(std::shared_ptr<const ExpansionMatrixd> theta, const Sparsifierd& sparsifier,
                                             const TargetFunction& f, const Eigen::Ref<const Eigen::MatrixXd>& X,
                                             const GoodnessCriterion& crit) {
  if (!theta) throw ParameterError("learn_weights: null expansion matrix");
  if (X.cols() < 1) throw ParameterError("learn_weights: n_train must be >= 1");
  GoodMask good = classify_good(*theta, crit);
  CellAverager acc(theta->m());
  encode_batch<double>(*theta, sparsifier, X, [&](Index i, std::span<const Index> active) {
    acc.observe(active, f(X.col(i)));
  });
  Eigen::VectorXd w = acc.weights(good);
  return ApproximatorModel(std::move(theta), sparsifier, std::move(w), acc.counts(), std::move(good));
}

ApproximatorModel learn_weights(std::shared_ptr<const ExpansionMatrixd> theta, const Sparsifierd& sparsifier,
                                const TargetFunction& f, const ManifoldSpec& manifold, Index n_train, std::uint64_t seed,
                                const GoodnessCriterion& crit) {
  if (!theta) throw ParameterError("learn_weights: null expansion matrix");
  if (n_train < 1) throw ParameterError("learn_weights: n_train must be >= 1");
  if (manifold.ambient_dim() != theta->dim()) throw ShapeError("learn_weights: manifold dimension differs from Theta");
  GoodMask good = classify_good(*theta, crit);
  CellAverager acc(theta->m());
  ManifoldSampler sampler(manifold, seed);
  Eigen::MatrixXd X;
  for (Index done = 0; done < n_train; done += kSampleChunk) {
    X = sampler.next(std::min(kSampleChunk, n_train - done));
    encode_batch<double>(*theta, sparsifier, X, [&](Index i, std::span<const Index> active) {
      acc.observe(active, f(X.col(i)));
    });
  }
  Eigen::VectorXd w = acc.weights(good);
  return ApproximatorModel(std::move(theta), sparsifier, std::move(w), acc.counts(), std::move(good));
}

Prediction predict_code(const ApproximatorModel& model, std::span<const Index> active) {
  const Eigen::VectorXd& w = model.weights();
  if (model.scheme() == Scheme::WTA) {
    double sum = 0.0;
    for (Index j : active) sum += w[j];
    return {sum / static_cast<double>(model.k()), true};
  }
  double sum = 0.0;
  Index n = 0;
  for (Index j : active) {
    if (!model.good_mask()[j]) continue;
    sum += w[j];
    ++n;
  }
  if (n == 0) return {0.0, false};
  return {sum / static_cast<double>(n), true};
}

namespace {

double max_pairwise_distance(const Eigen::Ref<const Eigen::MatrixXd>& X, const std::vector<Index>& members) {
  const Index n = static_cast<Index>(members.size());
  if (n < 2) return 0.0;
  Eigen::MatrixXd P(X.rows(), n);
  for (Index i = 0; i < n; ++i) P.col(i) = X.col(members[i]);
  double best = 0.0;
  for (Index a = 0; a + 1 < n; ++a) {
    const double d2 = (P.rightCols(n - a - 1).colwise() - P.col(a)).colwise().squaredNorm().maxCoeff();
    best = std::max(best, d2);
  }
  return std::sqrt(best);
}

std::vector<std::vector<Index>> cell_members(const ApproximatorModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X) {
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(model.m()));
  encode_batch<double>(model.theta(), model.sparsifier(), X, [&](Index i, std::span<const Index> active) {
    for (Index j : active)
      if (reads_unit(model, j)) members[j].push_back(i);
  });
  return members;
}

}  // namespace

Eigen::VectorXd empirical_cell_diameters(const ApproximatorModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X) {
  const auto members = cell_members(model, X);
  Eigen::VectorXd diam = Eigen::VectorXd::Zero(model.m());
  for (Index j = 0; j < model.m(); ++j) diam[j] = max_pairwise_distance(X, members[j]);
  return diam;
}

ErrorReport evaluate_error(const ApproximatorModel& model, const TargetFunction& f,
                           const Eigen::Ref<const Eigen::MatrixXd>& X) {
  if (X.rows() != model.theta().dim()) throw ShapeError("evaluate_error: test dimension differs from Theta");
  ErrorReport r;
  r.n_test = X.cols();
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(model.m()));
  double total = 0.0;
  encode_batch<double>(model.theta(), model.sparsifier(), X, [&](Index i, std::span<const Index> active) {
    const Prediction p = predict_code(model, active);
    for (Index j : active)
      if (reads_unit(model, j)) members[j].push_back(i);
    if (!p.covered) return;
    const double err = std::abs(p.value - f(X.col(i)));
    r.sup_abs_err = std::max(r.sup_abs_err, err);
    total += err;
    ++r.n_covered;
  });
  r.mean_abs_err = r.n_covered > 0 ? total / static_cast<double>(r.n_covered) : 0.0;
  r.non_covered_fraction = r.n_test > 0 ? double(r.n_test - r.n_covered) / double(r.n_test) : 0.0;
  for (Index j = 0; j < model.m(); ++j) r.max_cell_diam = std::max(r.max_cell_diam, max_pairwise_distance(X, members[j]));
  return r;
}

ErrorReport sup_error(const ApproximatorModel& model, const TargetFunction& f, const ManifoldSpec& manifold,
                      Index n_test, std::uint64_t seed) {
  if (n_test < 1000) throw ParameterError("sup_error: n_test must be >= 1000");
  if (manifold.ambient_dim() != model.theta().dim()) throw ShapeError("sup_error: manifold dimension differs from Theta");
  const Eigen::MatrixXd X = sample_input(manifold, seed, n_test);
  return evaluate_error(model, f, X);
}

}  // namespace sparsecode
