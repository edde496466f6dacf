#include <gtest/gtest.h>

#include <random>

#include "styletalk/gradcheck.hpp"
#include "styletalk/objectives.hpp"

using namespace styletalk;

namespace {

StyleVector random_style(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(kStyleDim);
  for (double& x : v) x = g(rng);
  return StyleVector(v);
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

// Row-by-row softmax cross entropy without Eigen reductions.
double text_loss_oracle(const Eigen::MatrixXd& z, const std::vector<std::size_t>& y) {
  long double acc = 0.0L;
  for (Eigen::Index t = 1; t < z.rows(); ++t) {
    long double denom = 0.0L;
    for (Eigen::Index c = 0; c < z.cols(); ++c) denom += std::exp(static_cast<long double>(z(t, c)));
    acc -= std::log(std::exp(static_cast<long double>(z(t, static_cast<Eigen::Index>(y[t])))) / denom);
  }
  return static_cast<double>(acc / static_cast<long double>(z.rows() - 1));
}

}  // namespace

TEST(Projection, MatchesExplicitProduct) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd w = random_matrix(rng, kStyleDim, 5);
  const Eigen::VectorXd b = random_matrix(rng, kStyleDim, 1), h = random_matrix(rng, 5, 1);
  const StyleVector s = project_out(h, ProjectionOut(w, b));
  for (std::size_t i = 0; i < kStyleDim; ++i) {
    double acc = b(static_cast<Eigen::Index>(i));
    for (Eigen::Index j = 0; j < 5; ++j) acc += w(static_cast<Eigen::Index>(i), j) * h(j);
    EXPECT_NEAR(s[i], acc, 1e-12);
  }
  EXPECT_THROW(project_out(Eigen::VectorXd::Zero(4), ProjectionOut(w, b)), DimensionError);
  EXPECT_THROW(ProjectionOut(w, Eigen::VectorXd::Zero(3)), DimensionError);
  Eigen::MatrixXd bad = w;
  bad(0, 0) = std::nan("");
  EXPECT_THROW(ProjectionOut(bad, b), ArgumentError);
  const ProjectionIn in(random_matrix(rng, 5, kStyleDim), random_matrix(rng, 5, 1));
  EXPECT_EQ(in(s).size(), 5);
  EXPECT_THROW(in(StyleVector({1.0, 2.0})), DimensionError);
}

TEST(StyleLoss, MeanAndSum) {
  const StyleVector a({1.0, -2.0, 0.5, 0, 0, 0, 0, 0}), b({0.0, 0.0, 0.0, 0, 0, 0, 0, 1.0});
  EXPECT_DOUBLE_EQ(style_loss(a, b, Reduction::sum), 4.5);
  EXPECT_DOUBLE_EQ(style_loss(a, b), 4.5 / 8.0);
  EXPECT_THROW(style_loss(a, StyleVector::zeros(StyleKind::acoustic)), KindMismatchError);
  EXPECT_THROW(style_loss(a, StyleVector({1.0})), DimensionError);
}

TEST(StyleLoss, SymmetricAndTriangle) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const StyleVector a = random_style(rng), b = random_style(rng), c = random_style(rng);
    EXPECT_EQ(style_loss(a, b), style_loss(b, a));
    EXPECT_LE(style_loss(a, c), style_loss(a, b) + style_loss(b, c) + 1e-12);
  }
}

TEST(TextLoss, MatchesOracleAndIgnoresFirstRow) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Index t = 2 + i % 6, v = 2 + i % 9;
    const Eigen::MatrixXd z = 3.0 * random_matrix(rng, t, v);
    std::vector<std::size_t> y(static_cast<std::size_t>(t));
    for (auto& id : y) id = std::uniform_int_distribution<std::size_t>(0, static_cast<std::size_t>(v) - 1)(rng);
    EXPECT_NEAR(text_loss(z, y), text_loss_oracle(z, y), 1e-10);
    Eigen::MatrixXd z2 = z;
    z2.row(0).setConstant(100.0);
    std::vector<std::size_t> y2 = y;
    y2[0] = 0;
    EXPECT_EQ(text_loss(z2, y2), text_loss(z, y));
  }
}

TEST(TextLoss, ShiftInvariantPerRow) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const Eigen::MatrixXd z = random_matrix(rng, 5, 7);
    const std::vector<std::size_t> y{0, 3, 6, 1, 2};
    Eigen::MatrixXd shifted = z;
    for (Eigen::Index r = 0; r < z.rows(); ++r) shifted.row(r).array() += 10.0 * (r + 1) - 17.0;
    EXPECT_NEAR(text_loss(shifted, y), text_loss(z, y), 1e-10);
  }
}

TEST(TextLoss, InputChecks) {
  const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(3, 4);
  EXPECT_THROW(text_loss(Eigen::MatrixXd::Zero(1, 4), {0}), ArgumentError);
  EXPECT_THROW(text_loss(z, {0, 1}), DimensionError);
  EXPECT_THROW(text_loss(z, {0, 1, 4}), RangeError);
  EXPECT_NEAR(text_loss(z, {0, 1, 2}), std::log(4.0), 1e-12);
}

TEST(TotalLoss, AffineInLambda) {
  for (double s : {0.0, 0.3, 2.5})
    for (double t : {0.0, 1.1}) {
      EXPECT_EQ(total_loss(s, t, 0.0).total, t);
      for (double l : {0.25, 1.0, 3.0}) {
        EXPECT_EQ(total_loss(s, t, l).total, t + l * s);
        EXPECT_NEAR(total_loss(s, t, l + 1.0).total - total_loss(s, t, l).total, s, 1e-12);
      }
    }
  EXPECT_THROW(total_loss(1.0, 1.0, -0.1), ArgumentError);
  EXPECT_THROW(total_loss(-1.0, 1.0, 1.0), ArgumentError);
}

TEST(Gradients, TextGradientRowsSumToZero) {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd z = random_matrix(rng, 4, 6);
  const Eigen::MatrixXd g = grad_text_loss(z, {1, 2, 3, 4});
  EXPECT_EQ(g.row(0).cwiseAbs().sum(), 0.0);
  for (Eigen::Index r = 1; r < 4; ++r) EXPECT_NEAR(g.row(r).sum(), 0.0, 1e-12);
}

TEST(Gradients, StyleGradientIsOuterProduct) {
  std::mt19937_64 rng(6);
  const ProjectionOut p(random_matrix(rng, kStyleDim, 3), random_matrix(rng, kStyleDim, 1));
  const Eigen::VectorXd h = random_matrix(rng, 3, 1);
  const StyleVector pred = project_out(h, p), target = random_style(rng);
  const StyleGrad g = grad_style_loss(pred, target, h, p, Reduction::sum);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(kStyleDim); ++i) {
    const double sgn = pred[i] > target[i] ? 1.0 : -1.0;
    EXPECT_EQ(g.bias(i), sgn);
    for (Eigen::Index j = 0; j < 3; ++j) EXPECT_EQ(g.weights(i, j), sgn * h(j));
  }
}

TEST(Gradcheck, PassesAcrossSeeds) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    GradcheckOptions o;
    o.trials = 20;
    o.seed = seed;
    const GradcheckReport r = run_gradcheck(o);
    EXPECT_TRUE(r.style_ok) << r.style_max_rel;
    EXPECT_TRUE(r.text_ok) << r.text_max_rel;
    EXPECT_GT(r.style_coords, 0u);
  }
}

TEST(Gradcheck, DetectsWrongSign) {
  GradcheckOptions o;
  o.trials = 3;
  o.flip_style_sign = true;
  EXPECT_FALSE(run_gradcheck(o).style_ok);
  o.flip_style_sign = false;
  o.flip_text_sign = true;
  EXPECT_FALSE(run_gradcheck(o).text_ok);
  o.trials = 0;
  EXPECT_THROW(run_gradcheck(o), ArgumentError);
}

TEST(Gradcheck, RelativeErrorFloor) {
  EXPECT_EQ(relative_error(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(1.0, -1.0), 2.0);
  EXPECT_DOUBLE_EQ(relative_error(1e-10, 0.0), 1e-2);
}
