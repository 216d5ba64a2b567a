#pragma once

// Integral representation of the operated T-Wick product. For diagonal
// contractions C, D and diagonal T with, per eigenvalue,
//   p^2 + q^2 = 1 - alpha^2,
//   r^2 + s^2 = 1 - beta^2,
//   p r + q s = (t - 1) alpha beta,
// the product admits the double Gaussian average
//   (Gamma(C)phi <>_T Gamma(D)psi)(x)
//     = integral integral phi(Cx + Py + Qz) psi(Dx + Ry + Sz) dmu(z) dmu(y).
// Solvability of the constraints per eigenvalue is exactly
//   (1 - alpha^2)(1 - beta^2) >= (t - 1)^2 alpha^2 beta^2,
// and the solution is unique up to an orthogonal remixing of the (y, z)
// coordinates. The canonical gauge fixes s = 0, r >= 0, q >= 0. On the
// equality manifold the z leg vanishes (q = s = 0) and a single average
// remains, with p = sgn[(t-1) alpha beta] sqrt(1-alpha^2), r = sqrt(1-beta^2)
// and the convention sgn(0) = +1.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wickholder/chaos.hpp"
#include "wickholder/errors.hpp"
#include "wickholder/parallel.hpp"
#include "wickholder/quadrature.hpp"

namespace wickholder {

// Sign with sgn(0) = +1 (the right-continuous convention used throughout).
inline double sign_nonneg(double x) { return x < 0.0 ? -1.0 : 1.0; }

// Slack for clamping squared coefficients that fall barely negative from
// rounding, and for accepting admissibility up to rounding.
inline constexpr double kPqrsClamp = 1e-12;

inline void require_scalar_admissible(double alpha, double beta, double t,
                                      const char* what) {
  if (!(std::abs(alpha) <= 1.0)) {
    throw InadmissibleError(std::string(what) + ": |alpha| <= 1 fails (alpha = " +
                            std::to_string(alpha) + ")");
  }
  if (!(std::abs(beta) <= 1.0)) {
    throw InadmissibleError(std::string(what) + ": |beta| <= 1 fails (beta = " +
                            std::to_string(beta) + ")");
  }
  const double lhs = (t - 1.0) * (t - 1.0) * alpha * alpha * beta * beta;
  const double rhs = (1.0 - alpha * alpha) * (1.0 - beta * beta);
  if (lhs > rhs + kPqrsClamp) {
    throw InadmissibleError(std::string(what) +
                            ": (1-alpha^2)(1-beta^2) >= (t-1)^2 alpha^2 beta^2 fails");
  }
}

struct PqrsCoeffs {
  double p, q, r, s;
};

// Canonical-gauge solution of the three constraints (s = 0, r >= 0, q >= 0).
inline PqrsCoeffs construct_pqrs(double alpha, double beta, double t) {
  require_scalar_admissible(alpha, beta, t, "construct_pqrs");
  if (beta * beta == 1.0) {
    // r = s = 0; admissibility forces (t-1) alpha = 0, so the cross
    // constraint is vacuous and (p, q) = (sqrt(1-alpha^2), 0).
    return {std::sqrt(1.0 - alpha * alpha), 0.0, 0.0, 0.0};
  }
  const double r = std::sqrt(1.0 - beta * beta);
  const double p = (t - 1.0) * alpha * beta / r;
  double q_sq = 1.0 - alpha * alpha - p * p;
  if (q_sq < 0.0) {
    if (q_sq < -kPqrsClamp) {
      throw InadmissibleError("construct_pqrs: q^2 = " + std::to_string(q_sq) +
                              " below clamp");
    }
    q_sq = 0.0;
  }
  return {p, std::sqrt(q_sq), r, 0.0};
}

struct PrCoeffs {
  double p, r;
};

// Boundary (equality-manifold) coefficients: q = s = 0. Requires
// (1-alpha^2)(1-beta^2) = (t-1)^2 alpha^2 beta^2 within 1e-10.
inline PrCoeffs corollary_pr(double alpha, double beta, double t) {
  if (!(std::abs(alpha) <= 1.0) || !(std::abs(beta) <= 1.0)) {
    throw InadmissibleError("corollary_pr: contraction bounds fail");
  }
  const double residual = (1.0 - alpha * alpha) * (1.0 - beta * beta) -
                          (t - 1.0) * (t - 1.0) * alpha * alpha * beta * beta;
  if (std::abs(residual) > 1e-10) {
    throw NotOnBoundaryError("corollary_pr: equality residual " +
                             std::to_string(residual) + " exceeds 1e-10");
  }
  const double p = sign_nonneg((t - 1.0) * alpha * beta) * std::sqrt(1.0 - alpha * alpha);
  return {p, std::sqrt(1.0 - beta * beta)};
}

// Orthogonal remixing of the (y, z) legs: rotating both (p, q) and (r, s) by
// the same angle preserves all three constraints.
inline PqrsCoeffs rotate_gauge(const PqrsCoeffs& c, double theta) {
  const double co = std::cos(theta), si = std::sin(theta);
  return {c.p * co + c.q * si, -c.p * si + c.q * co,
          c.r * co + c.s * si, -c.r * si + c.s * co};
}

struct PqrsOperators {
  DiagonalOperator P, Q, R, S;
};

// Eigenvalue-wise canonical coefficients for operator inputs.
inline PqrsOperators build_pqrs(const DiagonalOperator& C, const DiagonalOperator& D,
                                const DiagonalOperator& T) {
  require_same_dim(static_cast<std::size_t>(C.dim()), static_cast<std::size_t>(D.dim()),
                   "build_pqrs");
  require_same_dim(static_cast<std::size_t>(C.dim()), static_cast<std::size_t>(T.dim()),
                   "build_pqrs");
  const int d = C.dim();
  std::vector<double> p(static_cast<std::size_t>(d)), q(static_cast<std::size_t>(d)),
      r(static_cast<std::size_t>(d)), s(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const PqrsCoeffs c = construct_pqrs(C.eig(i), D.eig(i), T.eig(i));
    p[static_cast<std::size_t>(i)] = c.p;
    q[static_cast<std::size_t>(i)] = c.q;
    r[static_cast<std::size_t>(i)] = c.r;
    s[static_cast<std::size_t>(i)] = c.s;
  }
  return {DiagonalOperator(std::move(p)), DiagonalOperator(std::move(q)),
          DiagonalOperator(std::move(r)), DiagonalOperator(std::move(s))};
}

// Double Gaussian average
//   integral integral phi(Cx + Py + Qz) psi(Dx + Ry + Sz) dmu(z) dmu(y)
// over the d-fold tensor grid of `rule` in each of y and z (order^(2d)
// evaluations of each function). Phi and Psi are callables on R^d.
template <typename Phi, typename Psi>
double repr_rhs(Phi&& phi, Psi&& psi, const DiagonalOperator& C,
                const DiagonalOperator& D, const DiagonalOperator& P,
                const DiagonalOperator& Q, const DiagonalOperator& R,
                const DiagonalOperator& S, const std::vector<double>& x,
                const QuadratureRule& rule,
                std::int64_t budget = kDefaultEvalBudget) {
  const int d = C.dim();
  require_same_dim(x.size(), static_cast<std::size_t>(d), "repr_rhs");
  const std::int64_t grid = detail::tensor_grid_size(rule.order(), d, budget);
  if (grid > budget / grid) {
    throw BudgetError("repr_rhs: (y, z) grid exceeds evaluation budget");
  }
  const int order = rule.order();
  const std::size_t ud = static_cast<std::size_t>(d);
  std::vector<int> ydig(ud, 0), zdig(ud, 0);
  std::vector<double> cx(ud), dx(ud);
  for (std::size_t i = 0; i < ud; ++i) {
    cx[i] = C.eigs()[i] * x[i];
    dx[i] = D.eigs()[i] * x[i];
  }
  std::vector<double> base1(ud), base2(ud), arg1(ud), arg2(ud);
  double outer = 0.0;
  for (;;) {
    // Fixed y: precompute Cx + Py and Dx + Ry, then average over z.
    double wy = 1.0;
    for (std::size_t i = 0; i < ud; ++i) {
      const double y = rule.nodes[static_cast<std::size_t>(ydig[i])];
      wy *= rule.weights[static_cast<std::size_t>(ydig[i])];
      base1[i] = cx[i] + P.eigs()[i] * y;
      base2[i] = dx[i] + R.eigs()[i] * y;
    }
    double inner = 0.0;
    std::fill(zdig.begin(), zdig.end(), 0);
    for (;;) {
      double wz = 1.0;
      for (std::size_t i = 0; i < ud; ++i) {
        const double z = rule.nodes[static_cast<std::size_t>(zdig[i])];
        wz *= rule.weights[static_cast<std::size_t>(zdig[i])];
        arg1[i] = base1[i] + Q.eigs()[i] * z;
        arg2[i] = base2[i] + S.eigs()[i] * z;
      }
      inner += wz * phi(arg1) * psi(arg2);
      std::size_t j = 0;
      while (j < ud && ++zdig[j] == order) zdig[j++] = 0;
      if (j == ud) break;
    }
    outer += wy * inner;
    std::size_t j = 0;
    while (j < ud && ++ydig[j] == order) ydig[j++] = 0;
    if (j == ud) break;
  }
  return outer;
}

// Boundary path: single Gaussian average with Q = S = 0,
//   integral phi(Cx + Py) psi(Dx + Ry) dmu(y).
template <typename Phi, typename Psi>
double repr_rhs_boundary(Phi&& phi, Psi&& psi, const DiagonalOperator& C,
                         const DiagonalOperator& D, const DiagonalOperator& P,
                         const DiagonalOperator& R, const std::vector<double>& x,
                         const QuadratureRule& rule,
                         std::int64_t budget = kDefaultEvalBudget) {
  const int d = C.dim();
  require_same_dim(x.size(), static_cast<std::size_t>(d), "repr_rhs_boundary");
  detail::tensor_grid_size(rule.order(), d, budget);
  const int order = rule.order();
  const std::size_t ud = static_cast<std::size_t>(d);
  std::vector<int> ydig(ud, 0);
  std::vector<double> arg1(ud), arg2(ud);
  double acc = 0.0;
  for (;;) {
    double wy = 1.0;
    for (std::size_t i = 0; i < ud; ++i) {
      const double y = rule.nodes[static_cast<std::size_t>(ydig[i])];
      wy *= rule.weights[static_cast<std::size_t>(ydig[i])];
      arg1[i] = C.eigs()[i] * x[i] + P.eigs()[i] * y;
      arg2[i] = D.eigs()[i] * x[i] + R.eigs()[i] * y;
    }
    acc += wy * phi(arg1) * psi(arg2);
    std::size_t j = 0;
    while (j < ud && ++ydig[j] == order) ydig[j++] = 0;
    if (j == ud) break;
  }
  return acc;
}

// Exponential fast path: for phi_xi, psi_eta the z average has the closed
// form prod_i exp(u_i^2 / 2) with u = Q xi + S eta (a Gaussian moment
// generating function, by completing the square), leaving quadrature over y
// only. Agrees with the full double average; both routes are tested.
inline double repr_rhs_exponential(const ExponentialVector& xi,
                                   const ExponentialVector& eta,
                                   const DiagonalOperator& C, const DiagonalOperator& D,
                                   const DiagonalOperator& P, const DiagonalOperator& Q,
                                   const DiagonalOperator& R, const DiagonalOperator& S,
                                   const std::vector<double>& x,
                                   const QuadratureRule& rule,
                                   std::int64_t budget = kDefaultEvalBudget) {
  require_same_dim(xi.xi.size(), eta.xi.size(), "repr_rhs_exponential");
  double log_z = 0.0;
  for (std::size_t i = 0; i < xi.xi.size(); ++i) {
    const double u = Q.eigs()[i] * xi.xi[i] + S.eigs()[i] * eta.xi[i];
    log_z += 0.5 * u * u;
  }
  const double z_factor = std::exp(log_z);
  const auto phi = [&xi](const std::vector<double>& v) { return xi(v); };
  const auto psi = [&eta](const std::vector<double>& v) { return eta(v); };
  // The y average of exp-functions without their z parts: evaluating phi_xi
  // at Cx + Py and multiplying the z factor back restores the full product,
  // because exp(<Qz, xi>) integrates independently of y.
  return z_factor * repr_rhs_boundary(phi, psi, C, D, P, R, x, rule, budget);
}

// One evaluable test function: a finite chaos expansion or an exponential.
using TestFunction = std::variant<ChaosExpansion, ExponentialVector>;

inline int dim_of(const TestFunction& f) {
  return std::visit([](const auto& g) { return g.dim(); }, f);
}

// Copyable evaluator for either kind; copies are independent, so workers can
// each own one.
class AnyEvaluator {
 public:
  explicit AnyEvaluator(const TestFunction& f)
      : impl_(std::holds_alternative<ChaosExpansion>(f)
                  ? Impl(Evaluator(std::get<ChaosExpansion>(f)))
                  : Impl(std::get<ExponentialVector>(f))) {}

  double operator()(const std::vector<double>& x) {
    if (auto* ev = std::get_if<Evaluator>(&impl_)) return (*ev)(x);
    return std::get<ExponentialVector>(impl_)(x);
  }

 private:
  using Impl = std::variant<Evaluator, ExponentialVector>;
  Impl impl_;
};

struct ReprPoint {
  std::vector<double> x;
  double lhs = 0.0;
  double rhs = 0.0;
  double deviation = 0.0;  // |lhs - rhs| / max(1, |lhs|)
};

struct ReprCheckResult {
  std::vector<ReprPoint> points;
  double max_deviation = 0.0;
};

// Two-path check of the representation: the left side evaluates
// Gamma(C)phi <>_T Gamma(D)psi through the chaos algebra (or through the
// exponential product law), the right side through the double Gaussian
// average with canonical PQRS. Points may be evaluated concurrently; output
// order and bits are independent of `jobs`.
inline ReprCheckResult repr_check(const TestFunction& phi, const TestFunction& psi,
                                  const DiagonalOperator& C, const DiagonalOperator& D,
                                  const DiagonalOperator& T,
                                  const std::vector<std::vector<double>>& points,
                                  int order, int jobs = 1,
                                  std::int64_t budget = kDefaultEvalBudget) {
  const int d = C.dim();
  require_same_dim(static_cast<std::size_t>(dim_of(phi)), static_cast<std::size_t>(d),
                   "repr_check");
  require_same_dim(static_cast<std::size_t>(dim_of(psi)), static_cast<std::size_t>(d),
                   "repr_check");
  if (std::holds_alternative<ChaosExpansion>(phi) !=
      std::holds_alternative<ChaosExpansion>(psi)) {
    throw ConfigError("repr_check: phi and psi must both be expansions or both "
                      "be exponentials");
  }
  const PqrsOperators ops = build_pqrs(C, D, T);
  const QuadratureRule rule = gauss_hermite_rule(order);

  ReprCheckResult result;
  result.points.resize(points.size());

  const bool polynomial = std::holds_alternative<ChaosExpansion>(phi);
  ChaosExpansion lhs_expansion(d);
  ScaledExponential lhs_exponential{1.0, 0.0, ExponentialVector{}};
  if (polynomial) {
    lhs_expansion = t_wick_product(second_quantization(C, std::get<ChaosExpansion>(phi)),
                                   second_quantization(D, std::get<ChaosExpansion>(psi)), T);
  } else {
    lhs_exponential = t_wick_exponentials(apply(C, std::get<ExponentialVector>(phi)),
                                          apply(D, std::get<ExponentialVector>(psi)), T);
  }

  parallel_chunks(static_cast<std::int64_t>(points.size()), 1, jobs,
                  [&](std::int64_t idx, std::int64_t, std::int64_t) {
                    const auto& x = points[static_cast<std::size_t>(idx)];
                    ReprPoint row;
                    row.x = x;
                    AnyEvaluator fphi(phi), fpsi(psi);
                    if (polynomial) {
                      Evaluator lhs_eval(lhs_expansion);
                      row.lhs = lhs_eval(x);
                    } else {
                      row.lhs = lhs_exponential.scale * lhs_exponential.vec(x);
                    }
                    row.rhs = repr_rhs(fphi, fpsi, C, D, ops.P, ops.Q, ops.R, ops.S,
                                       x, rule, budget);
                    row.deviation = std::abs(row.lhs - row.rhs) /
                                    std::max(1.0, std::abs(row.lhs));
                    result.points[static_cast<std::size_t>(idx)] = std::move(row);
                  });
  for (const auto& row : result.points) {
    result.max_deviation = std::max(result.max_deviation, row.deviation);
  }
  return result;
}

}  // namespace wickholder
