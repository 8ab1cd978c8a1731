#include <gtest/gtest.h>

#include <cstring>
#include <limits>
#include <sstream>

#include "sparsecode/persistence.hpp"

using namespace sparsecode;

namespace {

std::string encoder_bytes(const ExpansionMatrixd& theta, const Sparsifierd& s, const std::optional<ManifoldSpec>& m) {
  std::ostringstream os(std::ios::binary);
  write_encoder(os, theta, s, m);
  return os.str();
}

Container read_bytes(const std::string& bytes) {
  std::istringstream is(bytes, std::ios::binary);
  return read_container(is);
}

}  // namespace

TEST(Container, WtaEncoderRoundTrip) {
  const auto theta = build_expansion<double>(DistributionSpec::uniform_sphere(5), 40, 3);
  const std::string bytes = encoder_bytes(theta, Sparsifierd::winner_take_all(4), std::nullopt);
  EXPECT_EQ(bytes.size(), kContainerHeaderBytes + 40 * 5 * 8);
  EXPECT_EQ(bytes.substr(0, 5), "EASP1");
  const Container c = read_bytes(bytes);
  EXPECT_EQ(c.theta->rows(), theta.rows());
  EXPECT_EQ(c.theta->seed(), 3u);
  EXPECT_EQ(c.theta->distribution().kind(), DistributionKind::UniformSphere);
  EXPECT_EQ(c.sparsifier.scheme(), Scheme::WTA);
  EXPECT_EQ(c.sparsifier.k(), 4);
  EXPECT_FALSE(c.manifold);
  EXPECT_FALSE(c.model);
  EXPECT_EQ(encoder_bytes(*c.theta, c.sparsifier, c.manifold), bytes);
}

TEST(Container, ThresholdEncoderRoundTrip) {
  const ManifoldSpec circle = ManifoldSpec::circle(6);
  const auto theta = build_expansion<double>(DistributionSpec::gaussian(6, 0.3), 64, 5);
  const auto s = Sparsifierd::threshold(calibrate_thresholds(theta, circle, 8, 200, 6));
  const std::string bytes = encoder_bytes(theta, s, circle);
  const Container c = read_bytes(bytes);
  ASSERT_TRUE(c.sparsifier.thresholds());
  EXPECT_EQ(c.sparsifier.thresholds()->tau(), s.thresholds()->tau());
  EXPECT_EQ(c.sparsifier.thresholds()->calibration_sample_size(), 200);
  EXPECT_EQ(c.theta->distribution().sigma(), 0.3);
  ASSERT_TRUE(c.manifold);
  EXPECT_EQ(*c.manifold, circle);
  const Eigen::MatrixXd X = sample_input(circle, 7, 50);
  for (Index i = 0; i < X.cols(); ++i)
    EXPECT_EQ(encode(*c.theta, c.sparsifier, X.col(i)), encode(theta, s, X.col(i)));
}

TEST(Container, ModelRoundTrip) {
  const ManifoldSpec circle = ManifoldSpec::circle(4);
  auto theta = std::make_shared<const ExpansionMatrixd>(build_expansion<double>(DistributionSpec::gaussian(4, 0.5), 100, 1));
  const auto s = Sparsifierd::threshold(calibrate_thresholds(*theta, circle, 10, 100, 2));
  const auto model = learn_weights(theta, s, TargetFunction::triangular(1.0), circle, 3000, 3,
                                   GoodnessCriterion::reach_band(circle));
  std::ostringstream os(std::ios::binary);
  write_model(os, model, circle);
  const std::string bytes = os.str();
  EXPECT_EQ(bytes.size(), kContainerHeaderBytes + 100 * 4 * 8 + 100 * 8 + 100 * (8 + 8 + 1));
  const Container c = read_bytes(bytes);
  ASSERT_TRUE(c.model);
  EXPECT_EQ(c.model->weights(), model.weights());
  EXPECT_EQ(c.model->counts(), model.counts());
  EXPECT_TRUE((c.model->good_mask() == model.good_mask()).all());
  std::ostringstream again(std::ios::binary);
  write_model(again, *c.model, c.manifold);
  EXPECT_EQ(again.str(), bytes);
}

TEST(Container, DataAttunedKeepsManifold) {
  const ManifoldSpec sub = ManifoldSpec::sub_sphere(6, 3);
  const auto theta = build_expansion<double>(DistributionSpec::data_attuned(sub), 20, 9);
  const Container c = read_bytes(encoder_bytes(theta, Sparsifierd::winner_take_all(2), std::nullopt));
  EXPECT_EQ(c.theta->distribution().kind(), DistributionKind::DataAttuned);
  ASSERT_TRUE(c.manifold);
  EXPECT_EQ(*c.manifold, sub);
}

TEST(Container, RejectsCorruptInput) {
  const auto theta = build_expansion<double>(DistributionSpec::uniform_sphere(3), 8, 1);
  const std::string good = encoder_bytes(theta, Sparsifierd::winner_take_all(2), std::nullopt);
  EXPECT_NO_THROW(read_bytes(good));

  std::string bad = good;
  bad[0] = 'X';
  EXPECT_THROW(read_bytes(bad), FormatError);
  EXPECT_THROW(read_bytes(good.substr(0, good.size() - 1)), FormatError);
  EXPECT_THROW(read_bytes(good.substr(0, 40)), FormatError);
  EXPECT_THROW(read_bytes(good + "x"), FormatError);
  bad = good;
  bad[21] = 1;  // reserved byte
  EXPECT_THROW(read_bytes(bad), FormatError);
  bad = good;
  bad[16] = 9;  // k > m
  EXPECT_THROW(read_bytes(bad), FormatError);
  bad = good;
  bad[6] = 7;  // unknown scheme
  EXPECT_THROW(read_bytes(bad), FormatError);
  bad = good;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::memcpy(bad.data() + kContainerHeaderBytes, &nan, sizeof nan);
  EXPECT_THROW(read_bytes(bad), FormatError);
  EXPECT_THROW(load_container("/nonexistent/file.easp"), FormatError);
}
