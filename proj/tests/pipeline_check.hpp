#pragma once

// One random small instance, run through the library and through naive::.

#include <random>
#include <sstream>
#include <string>

#include "naive_pipeline.hpp"
#include "sparsecode/approximator.hpp"

namespace pipeline_check {

struct Instance {
  int d = 3;
  sparsecode::Index m = 8;
  sparsecode::Index k = 1;
  sparsecode::Index n_train = 200;
  bool wta = true;
  bool circle = true;
};

inline Instance random_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Instance in;
  in.d = 3 + int(rng() % 2);
  in.m = 4 + sparsecode::Index(rng() % 13);
  in.k = 1 + sparsecode::Index(rng() % std::min<sparsecode::Index>(in.m, 5));
  in.n_train = 50 + sparsecode::Index(rng() % 451);
  in.wta = rng() % 2 == 0;
  in.circle = rng() % 3 != 0;
  return in;
}

inline naive::Mat to_rows(const Eigen::MatrixXd& A) {
  naive::Mat out(A.rows(), naive::Vec(A.cols()));
  for (sparsecode::Index i = 0; i < A.rows(); ++i)
    for (sparsecode::Index c = 0; c < A.cols(); ++c) out[i][c] = A(i, c);
  return out;
}

/// Empty string when the library and the reference agree bit for bit,
/// otherwise a description of the first difference.
inline std::string compare(const Instance& in, std::uint64_t seed) {
  using namespace sparsecode;
  const ManifoldSpec man = in.circle ? ManifoldSpec::circle(in.d) : ManifoldSpec::full_sphere(in.d);
  const TargetFunction f = in.circle ? TargetFunction::triangular(1.0) : TargetFunction::coordinate(0);
  auto theta = std::make_shared<const ExpansionMatrixd>(
      build_expansion<double>(DistributionSpec::gaussian(in.d, 0.8), in.m, derive_seed(seed, {1})));
  const Eigen::MatrixXd cal = sample_input(man, derive_seed(seed, {2}), 10 * in.m);
  const Eigen::MatrixXd train = sample_input(man, derive_seed(seed, {3}), in.n_train);
  const Eigen::MatrixXd test = sample_input(man, derive_seed(seed, {4}), 300);
  const Sparsifierd s = in.wta ? Sparsifierd::winner_take_all(in.k)
                               : Sparsifierd::threshold(calibrate_thresholds_from_samples<double>(*theta, cal, in.k));
  const auto crit = in.wta ? GoodnessCriterion::all_good() : GoodnessCriterion::reach_band(man);
  const auto model = learn_weights_from_samples(theta, s, f, train, crit);

  naive::Model ref;
  ref.theta = to_rows(theta->rows());
  ref.wta = in.wta;
  ref.k = in.k;
  if (!in.wta) ref.tau = naive::calibrate(ref.theta, to_rows(cal.transpose()), in.k);
  for (const auto& row : ref.theta) ref.good.push_back(in.wta || naive::good(row, man.support_dim(), 0.5));
  naive::learn(ref, to_rows(train.transpose()),
               [&](const naive::Vec& x) { return f(Eigen::Map<const Eigen::VectorXd>(x.data(), Index(x.size()))); });

  std::ostringstream why;
  for (Index j = 0; j < in.m; ++j) {
    if (!in.wta && (*s.thresholds())[j] != ref.tau[j]) why << "tau[" << j << "] ";
    if (model.good_mask()[j] != bool(ref.good[j])) why << "good[" << j << "] ";
    if (model.counts()[j] != ref.counts[j]) why << "count[" << j << "] ";
    if (model.weights()[j] != ref.weights[j]) why << "weight[" << j << "] ";
    if (!why.str().empty()) return why.str();
  }
  const naive::Mat xs = to_rows(test.transpose());
  for (Index i = 0; i < test.cols(); ++i) {
    const Prediction p = predict(model, test.col(i));
    const naive::Prediction q = naive::predict(ref, xs[i]);
    if (p.covered != q.covered || p.value != q.value) {
      why << "prediction at test point " << i;
      return why.str();
    }
  }
  return {};
}

}  // namespace pipeline_check
