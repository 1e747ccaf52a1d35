#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "decm/krylov.hpp"

using namespace decm;

namespace {

Eigen::MatrixXd random_matrix(int n, unsigned seed, double shift) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng) / std::sqrt(n);
  a += shift * Eigen::MatrixXd::Identity(n, n);
  return a;
}

LinearMap as_map(const Eigen::MatrixXd& a) {
  return [&a](std::span<const double> x, std::span<double> y) {
    Eigen::Map<Eigen::VectorXd>(y.data(), y.size()) =
        a * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  };
}

}  // namespace

TEST(Gmres, MatchesDenseSolve) {
  const int n = 60;
  const Eigen::MatrixXd a = random_matrix(n, 1, 3.0);
  Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(n, -1.0, 2.0);
  const Eigen::VectorXd x = a.partialPivLu().solve(b);
  GmresOptions opt;
  opt.abs_tol = 1e-12;
  const GmresResult r = gmres(as_map(a), {b.data(), std::size_t(n)}, {}, opt);
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.residual, 1e-12);
  EXPECT_LE((Eigen::Map<const Eigen::VectorXd>(r.x.data(), n) - x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Gmres, RestartsStillConverge) {
  const int n = 80;
  const Eigen::MatrixXd a = random_matrix(n, 2, 2.0);
  Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
  GmresOptions opt;
  opt.restart = 5;
  opt.max_iter = 2000;
  const GmresResult r = gmres(as_map(a), {b.data(), std::size_t(n)}, {}, opt);
  EXPECT_TRUE(r.converged);
  Eigen::VectorXd res = b - a * Eigen::Map<const Eigen::VectorXd>(r.x.data(), n);
  EXPECT_NEAR(res.norm(), r.residual, 1e-14);
}

TEST(Gmres, ZeroRhsAndExactGuess) {
  const int n = 10;
  const Eigen::MatrixXd a = random_matrix(n, 3, 4.0);
  std::vector<double> b(n, 0.0);
  GmresResult r = gmres(as_map(a), b, {}, {});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  for (double v : r.x) EXPECT_EQ(v, 0.0);

  Eigen::VectorXd bb = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd x = a.partialPivLu().solve(bb);
  r = gmres(as_map(a), {bb.data(), std::size_t(n)}, {x.data(), std::size_t(n)}, {});
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 1);
}

TEST(Gmres, ReportsNonConvergence) {
  const int n = 50;
  const Eigen::MatrixXd a = random_matrix(n, 4, 0.0);
  Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
  GmresOptions opt;
  opt.max_iter = 3;
  opt.abs_tol = 1e-14;
  const GmresResult r = gmres(as_map(a), {b.data(), std::size_t(n)}, {}, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_GT(r.residual, 1e-14);
  EXPECT_LE(r.iterations, 3);
}
