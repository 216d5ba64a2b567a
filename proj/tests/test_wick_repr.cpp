#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "wickholder/integral_repr.hpp"
#include "wickholder/rng.hpp"

using namespace wickholder;

namespace {

// Rejection-sample an admissible (alpha, beta, t) triple.
void sample_admissible(CounterRng& rng, double& alpha, double& beta, double& t) {
  for (;;) {
    alpha = rng.uniform(-1.0, 1.0);
    beta = rng.uniform(-1.0, 1.0);
    t = rng.uniform(0.0, 2.0);
    const double lhs = (t - 1.0) * (t - 1.0) * alpha * alpha * beta * beta;
    const double rhs = (1.0 - alpha * alpha) * (1.0 - beta * beta);
    if (lhs <= rhs - 1e-6) return;
  }
}

void check_constraints(const PqrsCoeffs& c, double alpha, double beta, double t) {
  CHECK(c.p * c.p + c.q * c.q ==
        Catch::Approx(1.0 - alpha * alpha).margin(1e-11));
  CHECK(c.r * c.r + c.s * c.s ==
        Catch::Approx(1.0 - beta * beta).margin(1e-11));
  CHECK(c.p * c.r + c.q * c.s ==
        Catch::Approx((t - 1.0) * alpha * beta).margin(1e-11));
}

}  // namespace

TEST_CASE("Mixing coefficients: canonical gauge") {
  // Pinned: alpha = beta = 1/sqrt(2), t = 0 sits on the equality manifold.
  const double is2 = 1.0 / std::sqrt(2.0);
  const PqrsCoeffs c = construct_pqrs(is2, is2, 0.0);
  CHECK(c.p == Catch::Approx(-is2).epsilon(1e-14));
  CHECK(c.q == Catch::Approx(0.0).margin(1e-7));
  CHECK(c.r == Catch::Approx(is2).epsilon(1e-14));
  CHECK(c.s == 0.0);

  // Unit beta: the psi leg needs no mixing at all.
  const PqrsCoeffs u = construct_pqrs(0.3, 1.0, 1.0);
  CHECK(u.r == 0.0);
  CHECK(u.s == 0.0);
  CHECK(u.p == Catch::Approx(std::sqrt(1.0 - 0.09)).epsilon(1e-14));

  CHECK_THROWS_AS(construct_pqrs(1.2, 0.0, 1.0), InadmissibleError);
  CHECK_THROWS_AS(construct_pqrs(0.9, 0.9, 0.0), InadmissibleError);

  CounterRng rng(31, 0);
  for (int trial = 0; trial < 300; ++trial) {
    double alpha, beta, t;
    sample_admissible(rng, alpha, beta, t);
    const PqrsCoeffs coeffs = construct_pqrs(alpha, beta, t);
    check_constraints(coeffs, alpha, beta, t);
    CHECK(coeffs.s == 0.0);
    CHECK(coeffs.q >= 0.0);
    CHECK(coeffs.r >= 0.0);
    // The gauge rotation preserves all three constraints.
    check_constraints(rotate_gauge(coeffs, rng.uniform(0.0, 6.28)), alpha, beta, t);
  }
}

TEST_CASE("Mixing coefficients: equality manifold") {
  const PrCoeffs pr = corollary_pr(0.6, 0.8, 2.0);
  CHECK(pr.p == Catch::Approx(0.8).epsilon(1e-14));
  CHECK(pr.r == Catch::Approx(0.6).epsilon(1e-14));
  // sgn(0) = +1 convention at t = 1 (beta = 1 keeps the point on the
  // manifold while the cross term vanishes).
  CHECK(corollary_pr(0.0, 1.0, 1.0).p == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(corollary_pr(0.0, 1.0, 1.0).r == 0.0);

  CHECK_THROWS_AS(corollary_pr(0.5, 0.5, 1.0), NotOnBoundaryError);
  CHECK_THROWS_AS(corollary_pr(1.5, 0.5, 1.0), InadmissibleError);

  // On the boundary the canonical gauge collapses to the single-average form.
  // Keep (t - 1)^2 alpha^2 bounded below: as it vanishes, beta approaches 1
  // and the division by sqrt(1 - beta^2) amplifies rounding error.
  CounterRng rng(37, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const double alpha = rng.uniform(0.3, 0.95);
    const double gap = rng.uniform(0.3, 1.0);
    const double t = 1.0 + (rng.uniform() < 0.5 ? gap : -gap);
    const double a2 = alpha * alpha;
    const double beta =
        std::sqrt((1.0 - a2) / (1.0 - a2 + (t - 1.0) * (t - 1.0) * a2));
    const PrCoeffs boundary = corollary_pr(alpha, beta, t);
    const PqrsCoeffs full = construct_pqrs(alpha, beta, t);
    CHECK(full.q == Catch::Approx(0.0).margin(2e-6));
    CHECK(full.p == Catch::Approx(boundary.p).margin(1e-7));
    CHECK(full.r == Catch::Approx(boundary.r).epsilon(1e-12));
  }
}

TEST_CASE("Integral representation: polynomial inputs") {
  // Low-degree polynomials are integrated exactly by modest rules.
  const DiagonalOperator C = DiagonalOperator::scalar(0.6, 1);
  const DiagonalOperator D = DiagonalOperator::scalar(0.6, 1);
  const DiagonalOperator T = DiagonalOperator::scalar(1.2, 1);
  const TestFunction phi = ChaosExpansion::basis(MultiIndex{1});
  const TestFunction psi = ChaosExpansion::basis(MultiIndex{1});
  const ReprCheckResult res =
      repr_check(phi, psi, C, D, T, {{-1.5}, {0.0}, {2.0}}, 20);
  CHECK(res.points.size() == 3);
  CHECK(res.max_deviation < 1e-12);

  CounterRng rng(41, 0);
  ChaosExpansion f(2), g(2);
  for (int k = 0; k < 4; ++k) {
    f.add_coeff({rng.uniform_int(0, 2), rng.uniform_int(0, 1)}, rng.uniform(-1.0, 1.0));
    g.add_coeff({rng.uniform_int(0, 1), rng.uniform_int(0, 2)}, rng.uniform(-1.0, 1.0));
  }
  f.add_coeff({1, 1}, 0.7);
  g.add_coeff({2, 1}, -0.4);
  std::vector<double> ceigs{0.5, -0.3}, deigs{0.7, 0.2}, teigs{1.4, 0.3};
  const DiagonalOperator C2(ceigs), D2(deigs), T2(teigs);
  const ReprCheckResult res2 = repr_check(TestFunction(f), TestFunction(g), C2, D2, T2,
                                          {{0.3, -0.8}, {1.2, 0.4}}, 12);
  CHECK(res2.max_deviation < 1e-11);
}

TEST_CASE("Integral representation: exponential inputs") {
  const ExponentialVector xi{{0.8, -0.5}}, eta{{-0.4, 0.6}};
  std::vector<double> ceigs{0.5, -0.3}, deigs{0.7, 0.2}, teigs{1.4, 0.3};
  const DiagonalOperator C(ceigs), D(deigs), T(teigs);
  const ReprCheckResult res = repr_check(TestFunction(xi), TestFunction(eta), C, D, T,
                                         {{0.3, -0.8}, {1.2, 0.4}, {0.0, 0.0}}, 30);
  CHECK(res.max_deviation < 1e-9);

  // The z-average closed form agrees with the full double average.
  const PqrsOperators ops = build_pqrs(C, D, T);
  const QuadratureRule rule = gauss_hermite_rule(30);
  for (const std::vector<double>& x : {std::vector<double>{0.3, -0.8}, {1.2, 0.4}}) {
    const double full = repr_rhs(xi, eta, C, D, ops.P, ops.Q, ops.R, ops.S, x, rule);
    const double fast =
        repr_rhs_exponential(xi, eta, C, D, ops.P, ops.Q, ops.R, ops.S, x, rule);
    CHECK(fast == Catch::Approx(full).epsilon(1e-10));
  }
}

TEST_CASE("Integral representation: boundary single average") {
  // (0.6, 0.8, 2.0) lies on the equality manifold; the z leg vanishes.
  const double alpha = 0.6, beta = 0.8, t = 2.0;
  const PrCoeffs pr = corollary_pr(alpha, beta, t);
  const DiagonalOperator C = DiagonalOperator::scalar(alpha, 1);
  const DiagonalOperator D = DiagonalOperator::scalar(beta, 1);
  const DiagonalOperator T = DiagonalOperator::scalar(t, 1);
  const DiagonalOperator P = DiagonalOperator::scalar(pr.p, 1);
  const DiagonalOperator R = DiagonalOperator::scalar(pr.r, 1);

  const ChaosExpansion f = ChaosExpansion::basis(MultiIndex{2});
  const ChaosExpansion lhs = t_wick_product(second_quantization(C, f),
                                            second_quantization(D, f), T);
  Evaluator fe1(f), fe2(f), lhse(lhs);
  const QuadratureRule rule = gauss_hermite_rule(15);
  for (double xv : {-1.0, 0.25, 2.0}) {
    const std::vector<double> x{xv};
    const double want = lhse(x);
    const double got = repr_rhs_boundary(fe1, fe2, C, D, P, R, x, rule);
    CHECK(got == Catch::Approx(want).margin(1e-10).epsilon(1e-10));
  }
}

TEST_CASE("Integral representation: worker-count invariance and errors") {
  const ExponentialVector xi{{0.5}}, eta{{0.2}};
  const DiagonalOperator C = DiagonalOperator::scalar(0.5, 1);
  const DiagonalOperator D = DiagonalOperator::scalar(0.4, 1);
  const DiagonalOperator T = DiagonalOperator::scalar(0.8, 1);
  const std::vector<std::vector<double>> pts{{0.1}, {-0.7}, {1.3}, {0.0}, {2.2}};
  const ReprCheckResult one = repr_check(TestFunction(xi), TestFunction(eta), C, D, T,
                                         pts, 25, 1);
  const ReprCheckResult four = repr_check(TestFunction(xi), TestFunction(eta), C, D, T,
                                          pts, 25, 4);
  REQUIRE(one.points.size() == four.points.size());
  for (std::size_t i = 0; i < one.points.size(); ++i) {
    CHECK(one.points[i].lhs == four.points[i].lhs);
    CHECK(one.points[i].rhs == four.points[i].rhs);
  }
  CHECK(one.max_deviation == four.max_deviation);

  CHECK_THROWS_AS(repr_check(TestFunction(xi), TestFunction(ChaosExpansion(1)), C, D, T,
                             pts, 10),
                  ConfigError);
  // Inadmissible triple: no real mixing coefficients exist.
  CHECK_THROWS_AS(repr_check(TestFunction(xi), TestFunction(eta),
                             DiagonalOperator::scalar(0.9, 1),
                             DiagonalOperator::scalar(0.9, 1),
                             DiagonalOperator::scalar(0.0, 1), pts, 10),
                  InadmissibleError);
  // Budget: order^(2d) past the cap.
  CHECK_THROWS_AS(repr_check(TestFunction(ExponentialVector{{0.1, 0.1, 0.1}}),
                             TestFunction(ExponentialVector{{0.1, 0.1, 0.1}}),
                             DiagonalOperator::scalar(0.5, 3),
                             DiagonalOperator::scalar(0.4, 3),
                             DiagonalOperator::scalar(0.8, 3), {{0.0, 0.0, 0.0}}, 100),
                  BudgetError);
}
