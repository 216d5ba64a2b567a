#pragma once

// Admissibility, verification, sharpness, and proof identities for the
// Holder-Young inequality of operated T-Wick products,
//   || Gamma(C) phi <>_T Gamma(D) psi ||_r <= ||phi||_p ||psi||_q.
//
// Theorem form (p, q, r > 1, 0 <= T <= 2I, contractions C, D), checked per
// eigenvalue (alpha, beta, t):
//   operator condition:  (1-alpha^2)(1-beta^2) >= (t-1)^2 alpha^2 beta^2
//   exponent condition:  r - 1 <= [(p-1)(q-1) - alpha^2 beta^2 t^2] /
//                          [(q-1) alpha^2 + (p-1) beta^2 + 2 alpha^2 beta^2 t]
// with the right side +inf when alpha = beta = 0. The exponent condition is
// equivalent to
//   1/((r-1) + t) >= 1/((p-1)/alpha^2 + t) + 1/((q-1)/beta^2 + t),
// where a term with zero kernel (alpha = 0 or beta = 0) is dropped.
//
// When the exponent condition fails for some eigenvalue, no finite constant
// works: along phi = phi_{s u e_i}, psi = phi_{u e_i} the norm ratio equals
// exp(u^2 f(s)) with
//   f(s) = (r-1)(s alpha + beta)^2 / 2 + t alpha beta s
//          - (p-1) s^2 / 2 - (q-1)/2,
// and sup_s f(s) <= 0 is exactly the exponent condition.
//
// Weighted (corollary) form with invertible diagonal B, C, D and T >= 0:
//   || phi <>_T psi ||_{r,B} <= ||phi||_{p,C} ||psi||_{q,D},
//   ||phi||_{p,B} := ||Gamma(B) phi||_p.
// It reduces to the theorem form through the substitution
//   alpha = b/c, beta = b/d, t' = t/b^2 (per eigenvalue).

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wickholder/chaos.hpp"
#include "wickholder/errors.hpp"
#include "wickholder/integral_repr.hpp"
#include "wickholder/quadrature.hpp"

namespace wickholder {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Exponent-condition bound on r - 1; +inf when alpha = beta = 0.
inline double exponent_bound(double p, double q, double alpha, double beta, double t) {
  const double a2 = alpha * alpha, b2 = beta * beta;
  const double den = (q - 1.0) * a2 + (p - 1.0) * b2 + 2.0 * a2 * b2 * t;
  if (den == 0.0) return kInf;
  return ((p - 1.0) * (q - 1.0) - a2 * b2 * t * t) / den;
}

// Non-throwing theorem-side admissibility of one eigenvalue triple, range
// checks included. Used both directly and as the reduction target of the
// corollary form.
inline bool theorem_admissible_scalar(double p, double q, double r, double alpha,
                                      double beta, double t, double tol = 1e-12) {
  if (!(p > 1.0 && q > 1.0 && r > 1.0)) return false;
  if (std::abs(alpha) > 1.0 + tol || std::abs(beta) > 1.0 + tol) return false;
  if (t < -tol || t > 2.0 + tol) return false;
  const double op_lhs = (t - 1.0) * (t - 1.0) * alpha * alpha * beta * beta;
  const double op_rhs = (1.0 - alpha * alpha) * (1.0 - beta * beta);
  if (op_lhs > op_rhs + tol) return false;
  const double bound = exponent_bound(p, q, alpha, beta, t);
  return r - 1.0 <= bound + tol;
}

struct HolderConfig {
  double p, q, r;
  DiagonalOperator C, D, T;
  std::optional<DiagonalOperator> B;  // present in the weighted (corollary) form

  int dim() const { return C.dim(); }

  // Theorem form: exponents > 1, contractions C and D, 0 <= T <= 2.
  static HolderConfig theorem(double p, double q, double r, DiagonalOperator C,
                              DiagonalOperator D, DiagonalOperator T) {
    check_exponents(p, q, r);
    check_dims(C, D, T);
    for (double v : C.eigs()) {
      if (!(std::abs(v) <= 1.0)) throw ConfigError("theorem form: C must be a contraction");
    }
    for (double v : D.eigs()) {
      if (!(std::abs(v) <= 1.0)) throw ConfigError("theorem form: D must be a contraction");
    }
    for (double v : T.eigs()) {
      if (!(v >= 0.0 && v <= 2.0)) throw ConfigError("theorem form: T outside [0, 2]");
    }
    return {p, q, r, std::move(C), std::move(D), std::move(T), std::nullopt};
  }

  // Weighted form: exponents > 1, invertible B, C, D, T >= 0.
  static HolderConfig corollary(double p, double q, double r, DiagonalOperator B,
                                DiagonalOperator C, DiagonalOperator D,
                                DiagonalOperator T) {
    check_exponents(p, q, r);
    check_dims(C, D, T);
    require_same_dim(static_cast<std::size_t>(B.dim()), static_cast<std::size_t>(C.dim()),
                     "HolderConfig");
    if (!B.is_invertible()) throw SingularOperatorError("corollary form: B is singular");
    if (!C.is_invertible()) throw SingularOperatorError("corollary form: C is singular");
    if (!D.is_invertible()) throw SingularOperatorError("corollary form: D is singular");
    for (double v : T.eigs()) {
      if (!(v >= 0.0)) throw ConfigError("corollary form: T must be >= 0");
    }
    return {p, q, r, std::move(C), std::move(D), std::move(T), std::move(B)};
  }

 private:
  static void check_exponents(double p, double q, double r) {
    if (!(p > 1.0 && q > 1.0 && r > 1.0)) {
      throw ConfigError("exponents p, q, r must all be > 1");
    }
  }
  static void check_dims(const DiagonalOperator& C, const DiagonalOperator& D,
                         const DiagonalOperator& T) {
    require_same_dim(static_cast<std::size_t>(C.dim()), static_cast<std::size_t>(D.dim()),
                     "HolderConfig");
    require_same_dim(static_cast<std::size_t>(C.dim()), static_cast<std::size_t>(T.dim()),
                     "HolderConfig");
  }
};

// One checked inequality, stated as lhs <= rhs; margin = rhs - lhs.
struct EigRow {
  int index;
  double alpha, beta, t;
  std::string condition;
  double lhs, rhs, margin;
  bool pass;
};

struct EigReport {
  std::vector<EigRow> rows;
  bool pass = true;
  double min_margin = kInf;

  void add(int index, double alpha, double beta, double t, std::string condition,
           double lhs, double rhs, double tol) {
    const double margin = rhs - lhs;
    const bool ok = margin >= -tol;
    rows.push_back({index, alpha, beta, t, std::move(condition), lhs, rhs, margin, ok});
    pass = pass && ok;
    min_margin = std::min(min_margin, margin);
  }
};

inline void require_theorem_form(const HolderConfig& cfg, const char* what) {
  if (cfg.B.has_value()) {
    throw ConfigError(std::string(what) + ": expected theorem form (no B)");
  }
}

// Operator and exponent conditions, one pair of rows per eigenvalue.
inline EigReport check_admissible(const HolderConfig& cfg, double tol = 1e-12) {
  require_theorem_form(cfg, "check_admissible");
  EigReport report;
  for (int i = 0; i < cfg.dim(); ++i) {
    const double a = cfg.C.eig(i), b = cfg.D.eig(i), t = cfg.T.eig(i);
    report.add(i, a, b, t, "operator",
               (t - 1.0) * (t - 1.0) * a * a * b * b,
               (1.0 - a * a) * (1.0 - b * b), tol);
    report.add(i, a, b, t, "exponent", cfg.r - 1.0,
               exponent_bound(cfg.p, cfg.q, a, b, t), tol);
  }
  return report;
}

// Reciprocal form of the exponent condition with zero-kernel terms dropped;
// rows state sum-of-reciprocals <= 1/((r-1) + t).
inline EigReport equivalent_condition(const HolderConfig& cfg, double tol = 1e-12) {
  require_theorem_form(cfg, "equivalent_condition");
  EigReport report;
  for (int i = 0; i < cfg.dim(); ++i) {
    const double a = cfg.C.eig(i), b = cfg.D.eig(i), t = cfg.T.eig(i);
    const double term_a = a == 0.0 ? 0.0 : 1.0 / ((cfg.p - 1.0) / (a * a) + t);
    const double term_b = b == 0.0 ? 0.0 : 1.0 / ((cfg.q - 1.0) / (b * b) + t);
    report.add(i, a, b, t, "exponent-reciprocal", term_a + term_b,
               1.0 / ((cfg.r - 1.0) + t), tol);
  }
  return report;
}

// Largest admissible r: 1 + min_i of the exponent bound. +inf when every
// eigenvalue has alpha = beta = 0; can be as low as 1 (no r > 1 admissible).
inline double max_admissible_r(double p, double q, const DiagonalOperator& C,
                               const DiagonalOperator& D, const DiagonalOperator& T) {
  if (!(p > 1.0 && q > 1.0)) throw ConfigError("max_admissible_r: p, q must be > 1");
  require_same_dim(static_cast<std::size_t>(C.dim()), static_cast<std::size_t>(D.dim()),
                   "max_admissible_r");
  require_same_dim(static_cast<std::size_t>(C.dim()), static_cast<std::size_t>(T.dim()),
                   "max_admissible_r");
  double best = kInf;
  for (int i = 0; i < C.dim(); ++i) {
    best = std::min(best, exponent_bound(p, q, C.eig(i), D.eig(i), T.eig(i)));
  }
  return 1.0 + best;
}

// Weighted form checked through the substitution alpha = b/c, beta = b/d,
// t' = t/b^2; each row is a theorem-form condition in the substituted
// variables. Equivalent to the direct five-condition statement
//   |B| >= sqrt(T/2), |C| >= |B|, |D| >= |B|,
//   (C^2-B^2)(D^2-B^2) >= (T-B^2)^2,
//   1/((r-1)B^2+T) >= 1/((p-1)C^2+T) + 1/((q-1)D^2+T),
// an equivalence the test suite verifies on random configurations.
inline EigReport check_corollary(const HolderConfig& cfg, double tol = 1e-12) {
  if (!cfg.B.has_value()) {
    throw ConfigError("check_corollary: expected corollary form (with B)");
  }
  EigReport report;
  for (int i = 0; i < cfg.dim(); ++i) {
    const double b = cfg.B->eig(i), c = cfg.C.eig(i), d = cfg.D.eig(i), t = cfg.T.eig(i);
    const double alpha = b / c, beta = b / d, tp = t / (b * b);
    report.add(i, alpha, beta, tp, "contraction-C", alpha * alpha, 1.0, tol);
    report.add(i, alpha, beta, tp, "contraction-D", beta * beta, 1.0, tol);
    report.add(i, alpha, beta, tp, "interpolation-range", tp, 2.0, tol);
    report.add(i, alpha, beta, tp, "operator",
               (tp - 1.0) * (tp - 1.0) * alpha * alpha * beta * beta,
               (1.0 - alpha * alpha) * (1.0 - beta * beta), tol);
    report.add(i, alpha, beta, tp, "exponent", cfg.r - 1.0,
               exponent_bound(cfg.p, cfg.q, alpha, beta, tp), tol);
  }
  return report;
}

// log of ||Gamma(C) phi_xi <>_T Gamma(D) phi_eta||_r / (||phi_xi||_p ||phi_eta||_q),
// all three norms in closed form.
inline double theorem_log_ratio(const HolderConfig& cfg, const std::vector<double>& xi,
                                const std::vector<double>& eta) {
  require_same_dim(xi.size(), static_cast<std::size_t>(cfg.dim()), "theorem_log_ratio");
  require_same_dim(eta.size(), static_cast<std::size_t>(cfg.dim()), "theorem_log_ratio");
  double tcd = 0.0, sum_sq = 0.0, xi_sq = 0.0, eta_sq = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double cx = cfg.C.eigs()[i] * xi[i];
    const double de = cfg.D.eigs()[i] * eta[i];
    tcd += cfg.T.eigs()[i] * cx * de;
    const double s = cx + de;
    sum_sq += s * s;
    xi_sq += xi[i] * xi[i];
    eta_sq += eta[i] * eta[i];
  }
  return tcd + 0.5 * (cfg.r - 1.0) * sum_sq - 0.5 * (cfg.p - 1.0) * xi_sq -
         0.5 * (cfg.q - 1.0) * eta_sq;
}

enum class NormMethod { Auto, ClosedForm, Quadrature, MonteCarlo };

struct VerifyOptions {
  NormMethod method = NormMethod::Auto;
  double quad_rtol = 1e-7;
  int start_order = 20;
  int max_order = kMaxQuadOrder;
  std::int64_t budget = kDefaultEvalBudget;
  std::int64_t mc_samples = 1'000'000;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct NormInfo {
  double log_value = 0.0;
  double value = 0.0;
  std::string method;
  double stderr_value = 0.0;   // Monte Carlo only
  double achieved_rtol = 0.0;  // quadrature only
  int order = 0;               // quadrature only
};

struct RatioResult {
  double log_ratio = 0.0;
  double ratio = 0.0;  // exp(log_ratio); +inf past exp overflow
  NormInfo num;
  std::vector<NormInfo> den;
};

namespace detail {

inline NormInfo closed_norm(double log_value) {
  return {log_value, std::exp(log_value), "closed-form", 0.0, 0.0, 0};
}

template <typename F>
NormInfo quad_norm(F&& f, double l, int d, const VerifyOptions& opt) {
  const AdaptiveResult res =
      lp_norm_adaptive(f, l, d, opt.quad_rtol, opt.start_order, opt.max_order, opt.budget);
  NormInfo info;
  info.value = res.value;
  info.log_value = std::log(res.value);
  info.method = "quadrature";
  info.achieved_rtol = res.achieved_rtol;
  info.order = res.order;
  return info;
}

template <typename F>
NormInfo mc_norm(const F& f, double l, int d, const VerifyOptions& opt,
                 std::uint64_t seed_offset) {
  const McResult res = mc_lp_norm(f, l, d, opt.mc_samples, opt.seed + seed_offset, opt.jobs);
  NormInfo info;
  info.value = res.value;
  info.log_value = std::log(res.value);
  info.method = "monte-carlo";
  info.stderr_value = res.stderr_value;
  return info;
}

inline void finish_ratio(RatioResult& r) {
  double log_den = 0.0;
  for (const auto& n : r.den) log_den += n.log_value;
  r.log_ratio = r.num.log_value - log_den;
  r.ratio = r.log_ratio > 700.0 ? kInf : std::exp(r.log_ratio);
}

}  // namespace detail

// Norm ratio of the inequality for a pair of test functions. Refuses
// inadmissible configs (use sharpness_probe for those). Closed form requires
// exponential inputs; quadrature and Monte Carlo accept either kind but not
// a mixed pair (the product of an expansion and an exponential is not
// representable here).
inline RatioResult verify_inequality(const HolderConfig& cfg, const TestFunction& phi,
                                     const TestFunction& psi, VerifyOptions opt = {}) {
  require_theorem_form(cfg, "verify_inequality");
  if (!check_admissible(cfg).pass) {
    throw InadmissibleError(
        "verify_inequality: configuration is inadmissible; use sharpness_probe");
  }
  const bool exp_pair = std::holds_alternative<ExponentialVector>(phi) &&
                        std::holds_alternative<ExponentialVector>(psi);
  const bool poly_pair = std::holds_alternative<ChaosExpansion>(phi) &&
                         std::holds_alternative<ChaosExpansion>(psi);
  if (!exp_pair && !poly_pair) {
    throw ConfigError("verify_inequality: mixed expansion/exponential pair");
  }
  NormMethod method = opt.method;
  if (method == NormMethod::Auto) {
    method = exp_pair ? NormMethod::ClosedForm : NormMethod::Quadrature;
  }
  const int d = cfg.dim();
  RatioResult out;

  if (method == NormMethod::ClosedForm) {
    if (!exp_pair) {
      throw ConfigError("verify_inequality: closed form requires exponential inputs");
    }
    const auto& xi = std::get<ExponentialVector>(phi);
    const auto& eta = std::get<ExponentialVector>(psi);
    const ScaledExponential prod =
        t_wick_exponentials(apply(cfg.C, xi), apply(cfg.D, eta), cfg.T);
    out.num = detail::closed_norm(prod.log_scale +
                                  exp_lp_log_norm(prod.vec, cfg.r));
    out.den.push_back(detail::closed_norm(exp_lp_log_norm(xi, cfg.p)));
    out.den.push_back(detail::closed_norm(exp_lp_log_norm(eta, cfg.q)));
    detail::finish_ratio(out);
    return out;
  }

  // The numerator function Gamma(C) phi <>_T Gamma(D) psi.
  if (poly_pair) {
    const ChaosExpansion prod =
        t_wick_product(second_quantization(cfg.C, std::get<ChaosExpansion>(phi)),
                       second_quantization(cfg.D, std::get<ChaosExpansion>(psi)), cfg.T);
    Evaluator num_f(prod);
    Evaluator phi_f(std::get<ChaosExpansion>(phi));
    Evaluator psi_f(std::get<ChaosExpansion>(psi));
    if (method == NormMethod::Quadrature) {
      out.num = detail::quad_norm(num_f, cfg.r, d, opt);
      out.den.push_back(detail::quad_norm(phi_f, cfg.p, d, opt));
      out.den.push_back(detail::quad_norm(psi_f, cfg.q, d, opt));
    } else {
      out.num = detail::mc_norm(num_f, cfg.r, d, opt, 0);
      out.den.push_back(detail::mc_norm(phi_f, cfg.p, d, opt, 1));
      out.den.push_back(detail::mc_norm(psi_f, cfg.q, d, opt, 2));
    }
  } else {
    const auto& xi = std::get<ExponentialVector>(phi);
    const auto& eta = std::get<ExponentialVector>(psi);
    const ScaledExponential prod =
        t_wick_exponentials(apply(cfg.C, xi), apply(cfg.D, eta), cfg.T);
    const auto num_f = [prod](const std::vector<double>& x) {
      return prod.scale * prod.vec(x);
    };
    if (method == NormMethod::Quadrature) {
      out.num = detail::quad_norm(num_f, cfg.r, d, opt);
      out.den.push_back(detail::quad_norm(xi, cfg.p, d, opt));
      out.den.push_back(detail::quad_norm(eta, cfg.q, d, opt));
    } else {
      out.num = detail::mc_norm(num_f, cfg.r, d, opt, 0);
      out.den.push_back(detail::mc_norm(xi, cfg.p, d, opt, 1));
      out.den.push_back(detail::mc_norm(eta, cfg.q, d, opt, 2));
    }
  }
  detail::finish_ratio(out);
  return out;
}

struct SharpnessWitness {
  double u;
  double predicted_log_ratio;  // u^2 f(s*)
  double direct_log_ratio;     // closed-form norm ratio at that witness pair
};

struct SharpnessResult {
  int eig_index = 0;
  double alpha = 0.0, beta = 0.0, t = 0.0;
  double s_star = 0.0;
  double f_star = 0.0;
  bool sup_finite = true;
  std::vector<SharpnessWitness> witnesses;
};

// Witness of unboundedness for a config violating the exponent condition.
// Maximizes f(s) over the worst eigenvalue direction; when the quadratic is
// not negative definite the sup is infinite and a finite witness with
// f(s) >= 1 is located by doubling.
inline SharpnessResult sharpness_probe(const HolderConfig& cfg,
                                       const std::vector<double>& u_list) {
  require_theorem_form(cfg, "sharpness_probe");
  int worst = -1;
  double worst_margin = kInf;
  for (int i = 0; i < cfg.dim(); ++i) {
    const double bound =
        exponent_bound(cfg.p, cfg.q, cfg.C.eig(i), cfg.D.eig(i), cfg.T.eig(i));
    const double margin = bound - (cfg.r - 1.0);
    if (margin < worst_margin) {
      worst_margin = margin;
      worst = i;
    }
  }
  if (worst < 0 || worst_margin >= -1e-12) {
    throw NoWitnessError(
        "sharpness_probe: every eigenvalue satisfies the exponent condition");
  }

  SharpnessResult res;
  res.eig_index = worst;
  const double alpha = res.alpha = cfg.C.eig(worst);
  const double beta = res.beta = cfg.D.eig(worst);
  const double t = res.t = cfg.T.eig(worst);
  const double p = cfg.p, q = cfg.q, r = cfg.r;

  const auto f = [&](double s) {
    const double lin = s * alpha + beta;
    return 0.5 * (r - 1.0) * lin * lin + t * alpha * beta * s -
           0.5 * (p - 1.0) * s * s - 0.5 * (q - 1.0);
  };
  // f(s) = -A s^2 / 2 + B s - C/2 in these coefficients.
  const double A = (p - 1.0) - (r - 1.0) * alpha * alpha;
  const double Bc = (r - 1.0 + t) * alpha * beta;
  const double Cc = (q - 1.0) - (r - 1.0) * beta * beta;
  if (A > 0.0) {
    res.s_star = Bc / A;
    res.f_star = f(res.s_star);
    res.sup_finite = true;
  } else {
    res.sup_finite = false;
    double s = 0.0;
    if (A < 0.0 || Bc != 0.0) {
      const double dir = sign_nonneg(Bc);
      s = dir;
      for (int k = 0; k < 1024 && f(s) < 1.0; ++k) s *= 2.0;
    }
    res.s_star = s;
    res.f_star = f(s);
  }

  for (double u : u_list) {
    std::vector<double> xi(static_cast<std::size_t>(cfg.dim()), 0.0);
    std::vector<double> eta(static_cast<std::size_t>(cfg.dim()), 0.0);
    xi[static_cast<std::size_t>(worst)] = res.s_star * u;
    eta[static_cast<std::size_t>(worst)] = u;
    res.witnesses.push_back(
        {u, u * u * res.f_star, theorem_log_ratio(cfg, xi, eta)});
  }
  return res;
}

struct JensenReport {
  double p = 0.0, q = 0.0, alpha = 0.0, beta = 0.0, t = 0.0;
  double r = 0.0, r_prime = 0.0;
  double gamma = 0.0, delta = 0.0;
  double a = 0.0, b = 0.0, c = 0.0, m = 0.0, n = 0.0;
  double U = 0.0, V = 0.0, W = 0.0;
  // Named residuals, each zero in exact arithmetic on the equality manifold.
  std::vector<std::pair<std::string, double>> residuals;
  double max_residual = 0.0;
  double grid_sup = 0.0;
  double value_at_unit = 0.0;
  double argmax_K = 0.0, argmax_L = 0.0;
};

// Algebraic identities behind the equality case, plus a grid scan of the
// two-parameter objective whose maximum at K = L = 1 is the Jensen step of
// the proof. Requires the equality case of the operator condition; r is the
// exponent that makes the exponent condition an equality.
inline JensenReport jensen_identity_check(double p, double q, double alpha,
                                          double beta, double t) {
  if (!(p > 1.0 && q > 1.0)) throw ConfigError("jensen_identity_check: p, q must be > 1");
  if (std::abs(alpha) > 1.0 || std::abs(beta) > 1.0 || t < 0.0 || t > 2.0) {
    throw ConfigError("jensen_identity_check: (alpha, beta, t) outside theorem range");
  }
  // corollary_pr enforces the equality case within 1e-10 and returns
  // gamma = sgn((t-1) alpha beta) sqrt(1-alpha^2), delta = sqrt(1-beta^2).
  const PrCoeffs pr = corollary_pr(alpha, beta, t);

  JensenReport rep;
  rep.p = p;
  rep.q = q;
  rep.alpha = alpha;
  rep.beta = beta;
  rep.t = t;
  const double gamma = rep.gamma = pr.p;
  const double delta = rep.delta = pr.r;

  const double bound = exponent_bound(p, q, alpha, beta, t);
  if (!(bound > 0.0) || std::isinf(bound)) {
    throw ConfigError("jensen_identity_check: derived r is not finite and > 1");
  }
  const double r = rep.r = 1.0 + bound;
  const double rp = rep.r_prime = r / (r - 1.0);

  const double a = rep.a = 1.0 / r - alpha * alpha / p - beta * beta / q;
  const double b = rep.b = alpha * gamma / p + beta * delta / q;
  const double c = rep.c = 1.0 - gamma * gamma / p - delta * delta / q;
  if (!(c > 0.0)) throw Error("jensen_identity_check: c <= 0");
  if (a < -1e-12) throw Error("jensen_identity_check: a < 0 beyond tolerance");
  const double m = rep.m = std::sqrt(std::max(a, 0.0));
  const double n = rep.n = sign_nonneg(b) * std::sqrt(c);
  const double U = rep.U = alpha * delta - beta * gamma;
  const double V = rep.V = n * alpha + m * gamma;
  const double W = rep.W = n * beta + m * delta;

  auto push = [&](const char* name, double value) {
    rep.residuals.emplace_back(name, std::abs(value));
    rep.max_residual = std::max(rep.max_residual, std::abs(value));
  };
  push("gamma-delta-product", gamma * delta - alpha * beta * (t - 1.0));
  push("b-squared-equals-ac", b * b - a * c);
  push("claim1-unit-row", gamma * gamma / p + delta * delta / q + n * n - 1.0);
  push("claim2-unit-row",
       r * (U * U / (p * q) + V * V / p + W * W / q) - 1.0);
  push("claim3-unit-row-p", gamma * gamma / rp + U * U / q + V * V - 1.0);
  push("claim3-unit-row-q", delta * delta / rp + U * U / p + W * W - 1.0);

  // Grid scan of the objective
  //   G(K, L) = K^{1/2p} L^{1/2q} /
  //     ([g^2/p K + d^2/q L + n^2]^{1/2r'} [r(U^2/(pq) KL + V^2/p K + W^2/q L)]^{1/2r})
  // over a log-spaced grid containing K = L = 1 exactly.
  const auto objective = [&](double K, double L) {
    const double first = gamma * gamma / p * K + delta * delta / q * L + n * n;
    const double second =
        r * (U * U / (p * q) * K * L + V * V / p * K + W * W / q * L);
    return std::log(K) / (2.0 * p) + std::log(L) / (2.0 * q) -
           std::log(first) / (2.0 * rp) - std::log(second) / (2.0 * r);
  };
  rep.grid_sup = -kInf;
  for (int i = 0; i <= 20; ++i) {
    const double K = std::pow(10.0, -1.0 + 0.1 * i);
    for (int j = 0; j <= 20; ++j) {
      const double L = std::pow(10.0, -1.0 + 0.1 * j);
      const double g = std::exp(objective(K, L));
      if (g > rep.grid_sup) {
        rep.grid_sup = g;
        rep.argmax_K = K;
        rep.argmax_L = L;
      }
    }
  }
  rep.value_at_unit = std::exp(objective(1.0, 1.0));
  return rep;
}

// Weighted-form norm ratio || phi <>_T psi ||_{r,B} / (||phi||_{p,C} ||psi||_{q,D}).
inline RatioResult verify_weighted_inequality(const HolderConfig& cfg,
                                              const TestFunction& phi,
                                              const TestFunction& psi,
                                              VerifyOptions opt = {}) {
  if (!cfg.B.has_value()) {
    throw ConfigError("verify_weighted_inequality: expected corollary form");
  }
  if (!check_corollary(cfg).pass) {
    throw InadmissibleError("verify_weighted_inequality: corollary conditions fail");
  }
  const bool exp_pair = std::holds_alternative<ExponentialVector>(phi) &&
                        std::holds_alternative<ExponentialVector>(psi);
  const bool poly_pair = std::holds_alternative<ChaosExpansion>(phi) &&
                         std::holds_alternative<ChaosExpansion>(psi);
  if (!exp_pair && !poly_pair) {
    throw ConfigError("verify_weighted_inequality: mixed pair");
  }
  NormMethod method = opt.method;
  if (method == NormMethod::Auto) {
    method = exp_pair ? NormMethod::ClosedForm : NormMethod::Quadrature;
  }
  const int d = cfg.dim();
  RatioResult out;
  if (exp_pair) {
    const auto& xi = std::get<ExponentialVector>(phi);
    const auto& eta = std::get<ExponentialVector>(psi);
    const ScaledExponential prod = t_wick_exponentials(xi, eta, cfg.T);
    const ExponentialVector bvec = apply(*cfg.B, prod.vec);
    const ExponentialVector cxi = apply(cfg.C, xi);
    const ExponentialVector deta = apply(cfg.D, eta);
    if (method == NormMethod::ClosedForm) {
      out.num = detail::closed_norm(prod.log_scale + exp_lp_log_norm(bvec, cfg.r));
      out.den.push_back(detail::closed_norm(exp_lp_log_norm(cxi, cfg.p)));
      out.den.push_back(detail::closed_norm(exp_lp_log_norm(deta, cfg.q)));
    } else if (method == NormMethod::Quadrature) {
      const auto num_f = [prod, bvec](const std::vector<double>& x) {
        return prod.scale * bvec(x);
      };
      out.num = detail::quad_norm(num_f, cfg.r, d, opt);
      out.den.push_back(detail::quad_norm(cxi, cfg.p, d, opt));
      out.den.push_back(detail::quad_norm(deta, cfg.q, d, opt));
    } else {
      const auto num_f = [prod, bvec](const std::vector<double>& x) {
        return prod.scale * bvec(x);
      };
      out.num = detail::mc_norm(num_f, cfg.r, d, opt, 0);
      out.den.push_back(detail::mc_norm(cxi, cfg.p, d, opt, 1));
      out.den.push_back(detail::mc_norm(deta, cfg.q, d, opt, 2));
    }
  } else {
    if (method == NormMethod::ClosedForm) {
      throw ConfigError("verify_weighted_inequality: closed form requires exponentials");
    }
    const ChaosExpansion prod = t_wick_product(std::get<ChaosExpansion>(phi),
                                               std::get<ChaosExpansion>(psi), cfg.T);
    Evaluator num_f(second_quantization(*cfg.B, prod));
    Evaluator phi_f(second_quantization(cfg.C, std::get<ChaosExpansion>(phi)));
    Evaluator psi_f(second_quantization(cfg.D, std::get<ChaosExpansion>(psi)));
    if (method == NormMethod::Quadrature) {
      out.num = detail::quad_norm(num_f, cfg.r, d, opt);
      out.den.push_back(detail::quad_norm(phi_f, cfg.p, d, opt));
      out.den.push_back(detail::quad_norm(psi_f, cfg.q, d, opt));
    } else {
      out.num = detail::mc_norm(num_f, cfg.r, d, opt, 0);
      out.den.push_back(detail::mc_norm(phi_f, cfg.p, d, opt, 1));
      out.den.push_back(detail::mc_norm(psi_f, cfg.q, d, opt, 2));
    }
  }
  detail::finish_ratio(out);
  return out;
}

// Hypercontractivity special case: ||phi||_r <= ||Gamma(C) phi||_p whenever
// every |c_i| >= sqrt((r-1)/(p-1)). Returns the norm ratio.
inline RatioResult nelson_check(double p, double r, const DiagonalOperator& C,
                                const TestFunction& phi, VerifyOptions opt = {}) {
  if (!(p > 1.0 && r > 1.0)) throw ConfigError("nelson_check: p, r must be > 1");
  const double needed = std::sqrt((r - 1.0) / (p - 1.0));
  for (int i = 0; i < C.dim(); ++i) {
    if (std::abs(C.eig(i)) < needed - 1e-12) {
      throw InadmissibleError("nelson_check: |C| >= sqrt((r-1)/(p-1)) fails at "
                              "eigenvalue " + std::to_string(i));
    }
  }
  require_same_dim(static_cast<std::size_t>(C.dim()),
                   static_cast<std::size_t>(dim_of(phi)), "nelson_check");
  const int d = C.dim();
  RatioResult out;
  NormMethod method = opt.method;
  if (method == NormMethod::Auto) {
    method = std::holds_alternative<ExponentialVector>(phi) ? NormMethod::ClosedForm
                                                            : NormMethod::Quadrature;
  }
  if (method == NormMethod::ClosedForm) {
    if (!std::holds_alternative<ExponentialVector>(phi)) {
      throw ConfigError("nelson_check: closed form requires an exponential input");
    }
    const auto& xi = std::get<ExponentialVector>(phi);
    out.num = detail::closed_norm(exp_lp_log_norm(xi, r));
    out.den.push_back(detail::closed_norm(exp_lp_log_norm(apply(C, xi), p)));
  } else {
    AnyEvaluator f(phi);
    TestFunction gphi = phi;
    if (std::holds_alternative<ChaosExpansion>(gphi)) {
      gphi = second_quantization(C, std::get<ChaosExpansion>(gphi));
    } else {
      gphi = apply(C, std::get<ExponentialVector>(gphi));
    }
    AnyEvaluator gf(gphi);
    if (method == NormMethod::Quadrature) {
      out.num = detail::quad_norm(f, r, d, opt);
      out.den.push_back(detail::quad_norm(gf, p, d, opt));
    } else {
      out.num = detail::mc_norm(f, r, d, opt, 0);
      out.den.push_back(detail::mc_norm(gf, p, d, opt, 1));
    }
  }
  detail::finish_ratio(out);
  return out;
}

}  // namespace wickholder
