#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "decm/eos.hpp"
#include "decm/initial_data.hpp"
#include "test_util.hpp"

using namespace decm;
using decm::test::max_diff;

namespace {

ScalarField band(int n, std::uint64_t seed, double linf = 1.0, int b = 4) {
  return random_band_field(Grid(n), seed, b, linf);
}

EosParams params(double b, EosMethod m = EosMethod::fixed_point) {
  EosParams p;
  p.b = b;
  p.method = m;
  return p;
}

VectorField div_free(int n, std::uint64_t seed) {
  return inverse(riesz_perp(forward(band(n, seed, 1.0, 6))));
}

double vmax(const VectorField& a) { return std::max(max_abs(a.x), max_abs(a.y)); }

// Independent oracle: (I − αL_q) assembled column by column from apply_Lq on grid unit
// vectors and solved with a dense LU.
ScalarField dense_w(const ScalarField& q, double b) {
  const Grid& g = q.grid();
  const int m = static_cast<int>(g.size());
  const double s = 1.0 + b * b, alpha = b / s;
  Eigen::MatrixXd a(m, m);
  ScalarField e(g);
  for (int j = 0; j < m; ++j) {
    e.values()[j] = 1.0;
    const ScalarField col = apply_Lq(q, e);
    for (int i = 0; i < m; ++i) a(i, j) = (i == j ? 1.0 : 0.0) - alpha * col.values()[i];
    e.values()[j] = 0.0;
  }
  const ScalarField rhs = (-1.0 / (s * s)) * apply_Lq(q, q);
  Eigen::VectorXd x = a.partialPivLu().solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), m));
  return ScalarField(g, {x.data(), std::size_t(m)});
}

}  // namespace

TEST(Lq, ConstantQGivesZero) {
  ScalarField q(Grid(16));
  for (double& v : q.values()) v = 1.7;
  EXPECT_LT(max_abs(apply_Lq(q, band(16, 3))), 1e-14);
}

TEST(Lq, HandExpandedExample) {
  const int n = 16;
  const auto q = ScalarField::sample(Grid(n), [](double x, double) { return std::sin(x); });
  const auto f = ScalarField::sample(Grid(n), [](double, double y) { return std::sin(y); });
  const auto expect =
      ScalarField::sample(Grid(n), [](double x, double y) { return -std::cos(x) * std::cos(y) / std::sqrt(2.0); });
  EXPECT_LT(max_diff(apply_Lq(q, f), expect), 1e-14);
  EXPECT_LT(max_diff(apply_Lq_switched(q, f), expect), 1e-14);
}

TEST(Lq, AntiSelfAdjointBothForms) {
  for (unsigned t = 0; t < 10; ++t) {
    const ScalarField q = band(32, 100 + t, 2.0), f = band(32, 200 + t), g = band(32, 300 + t);
    const ScalarField lf = apply_Lq(q, f), lg = apply_Lq(q, g);
    const double scale = l2_norm(lf) * l2_norm(g) + l2_norm(f) * l2_norm(lg);
    EXPECT_LE(std::abs(inner(lf, g) + inner(f, lg)) / scale, 1e-8);
    EXPECT_LE(std::abs(inner(lf, g) + inner(f, apply_Lq_switched(q, g))) / scale, 1e-8);
    EXPECT_LE(std::abs(inner(f, lf)) / (l2_norm(f) * l2_norm(lf)), 1e-8);
  }
}

TEST(Lq, GridMismatchThrows) {
  EXPECT_THROW(apply_Lq(band(16, 1), band(32, 1)), DomainError);
}

TEST(Tq, ZeroQAndZeroB) {
  const VectorField u = div_free(32, 5);
  const double b = 3.0;
  EXPECT_LT(vmax(apply_Tq(ScalarField(Grid(32)), u, b) - (1 + b * b) * u), 1e-13);
  EXPECT_LT(vmax(apply_Tq(band(32, 6), u, 0.0) - u), 1e-13);
}

TEST(Tq, EnergyIdentity) {
  for (unsigned t = 0; t < 20; ++t) {
    const double b = (t % 4) + 0.5;
    const ScalarField q = band(32, 400 + t, 1.5);
    const VectorField u = div_free(32, 500 + t);
    const double uu = inner(u, u);
    EXPECT_LE(std::abs(inner(apply_Tq(q, u, b), u) - (1 + b * b) * uu) / ((1 + b * b) * uu), 1e-8);
  }
}

TEST(SolveW, XOnlyFieldGivesZero) {
  const auto q = ScalarField::sample(Grid(32), [](double x, double) { return 0.7 * std::cos(x); });
  for (auto m : {EosMethod::fixed_point, EosMethod::krylov}) {
    const WSolve w = solve_w(q, params(2.0, m));
    EXPECT_EQ(max_abs(w.w), 0.0);
  }
}

TEST(SolveW, AllMethodsMatchIndependentDenseOracle) {
  int trial = 0;
  for (double b : {0.5, 2.0, 8.0}) {
    for (double amp : {1.0, 2.0}) {
      const ScalarField q = band(16, 600 + trial++, amp);
      const ScalarField oracle = dense_w(q, b);
      for (auto m : {EosMethod::fixed_point, EosMethod::krylov, EosMethod::dense_oracle}) {
        const WSolve w = solve_w(q, params(b, m));
        EXPECT_LE(max_diff(w.w, oracle), 1e-10) << "b=" << b << " method=" << to_string(m);
      }
    }
  }
}

TEST(SolveW, DenseOracleSizeGuard) {
  EXPECT_THROW(solve_w(band(32, 1), params(2.0, EosMethod::dense_oracle)), DomainError);
}

TEST(SolveW, RequiresMeanZero) {
  ScalarField q = band(16, 2);
  for (double& v : q.values()) v += 0.1;
  EXPECT_THROW(solve_w(q, params(1.0)), DomainError);
}

TEST(SolveW, DivergenceIsDetectedAndKrylovRecovers) {
  const ScalarField q = band(32, 7, 60.0, 6);
  EXPECT_THROW(solve_w(q, params(1.0, EosMethod::fixed_point)), ConvergenceError);
  EosParams p = params(1.0, EosMethod::krylov);
  p.max_iter = 5000;
  const WSolve w = solve_w(q, p);
  EXPECT_TRUE(max_abs(w.w) > 0.0);
}

TEST(SolveWBoosted, MatchesUnboosted) {
  for (double b : {0.5, 2.0, 8.0}) {
    const ScalarField q = band(32, 8);
    const WSolve w = solve_w(q, params(b));
    const WSolve W = solve_w_boosted(b * q, params(b));
    EXPECT_LE(max_diff(w.w, W.w), 1e-10);
  }
  EXPECT_EQ(max_abs(solve_w_boosted(ScalarField(Grid(16)), params(2.0)).w), 0.0);
  EXPECT_THROW(solve_w_boosted(band(16, 1), params(0.0)), DomainError);
}

TEST(SolveEos, XOnlyClosedForm) {
  const double a = 0.8;
  for (double b : {0.0, 1.0, 5.0}) {
    const auto q = ScalarField::sample(Grid(32), [a](double x, double) { return a * std::cos(x); });
    const EosSolution e = solve_eos(q, params(b));
    const auto uy = ScalarField::sample(
        Grid(32), [a, b](double x, double) { return -(a * b / (1 + b * b)) * std::sin(x); });
    EXPECT_LT(max_abs(e.u.x), 1e-15);
    EXPECT_LT(max_diff(e.u.y, uy), 1e-14);
  }
}

TEST(SolveEos, ZeroField) {
  const EosSolution e = solve_eos(ScalarField(Grid(16)), params(3.0));
  EXPECT_EQ(max_abs(e.u.x), 0.0);
  EXPECT_EQ(max_abs(e.u.y), 0.0);
  EXPECT_EQ(max_abs(e.w), 0.0);
  EXPECT_EQ(max_abs(e.v), 0.0);
  EXPECT_EQ(max_abs(e.omega), 0.0);
}

TEST(SolveEos, ClosureAndConsistency) {
  const ScalarField q = band(64, 9, 1.0);
  const double b = 4.0;
  const EosSolution e = solve_eos(q, params(b));
  EXPECT_LE(e.residual, 1e-10);
  EXPECT_LE(e.residual, 1e-12 * std::max(1.0, l2_norm(q) * (b + max_abs(q))));
  // Independent closure: ‖T_q u − (B R^⊥q − ℙ(q Rq))‖ from the physical-space API.
  const SpectralField qh = forward(q);
  const VectorField qr = inverse(SpectralVector{dealiased_product(qh, riesz(qh, 1)), dealiased_product(qh, riesz(qh, 2))});
  const VectorField rhs = b * inverse(riesz_perp(qh)) - leray_project(qr);
  EXPECT_LE(l2_norm(apply_Tq(q, e.u, b) - rhs), 1e-10);
  // u = R^⊥v, div u = 0, v = w + αq, ω = curl u.
  EXPECT_LE(vmax(inverse(riesz_perp(forward(e.v))) - e.u), 1e-13);
  EXPECT_LE(max_abs(divergence(forward(e.u))), 1e-12);
  EXPECT_LE(max_diff(e.v, e.w + (b / (1 + b * b)) * q), 1e-14);
  EXPECT_LE(max_diff(inverse(curl(forward(e.u))), e.omega), 1e-10);
}

TEST(TqInverse, ZeroQ) {
  const VectorField f = div_free(32, 10);
  const double b = 2.0;
  EXPECT_LE(vmax(apply_Tq_inverse(ScalarField(Grid(32)), f, params(b)) - (1.0 / (1 + b * b)) * f), 1e-14);
}

TEST(TqInverse, RoundtripAndBounds) {
  for (unsigned t = 0; t < 20; ++t) {
    const double b = (t % 3 == 0) ? 0.5 : (t % 3 == 1 ? 2.0 : 8.0);
    const ScalarField q1 = band(32, 700 + t, 1.5), q2 = band(32, 800 + t, 1.5);
    const VectorField f = div_free(32, 900 + t);
    const VectorField u1 = apply_Tq_inverse(q1, f, params(b));
    EXPECT_LE(l2_norm(apply_Tq(q1, u1, b) - f), 1e-10 * std::max(1.0, l2_norm(f)));
    const double s = 1 + b * b;
    EXPECT_LE(l2_norm(u1), l2_norm(f) / s * (1 + 1e-8));
    const VectorField u2 = apply_Tq_inverse(q2, f, params(b));
    EXPECT_LE(l2_norm(u1 - u2), b / (s * s) * max_abs(q1 - q2) * l2_norm(f) * (1 + 1e-8));
  }
}

TEST(EosParams, Validation) {
  EosParams p;
  p.tol = 0.0;
  EXPECT_THROW(p.validate(), DomainError);
  p = {};
  p.max_iter = 0;
  EXPECT_THROW(p.validate(), DomainError);
  p = {};
  p.b = -1.0;
  EXPECT_THROW(p.validate(), DomainError);
  EXPECT_EQ(parse_eos_method("krylov"), EosMethod::krylov);
  EXPECT_THROW(parse_eos_method("newton"), DomainError);
}
