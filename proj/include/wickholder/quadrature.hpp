#pragma once

// Numerical integration against the standard Gaussian measure on R^d.
//
// gauss_hermite_rule builds nodes/weights for the weight exp(-x^2/2)/sqrt(2 pi)
// by Golub-Welsch: eigen-decomposition of the symmetric tridiagonal Jacobi
// matrix with zero diagonal and off-diagonal sqrt(k). An order-n rule is exact
// for polynomials of degree 2n - 1. Nodes are exactly symmetric about 0 and
// weights sum to 1.
//
// lp_norm_quadrature evaluates (sum w |f|^p)^(1/p) over the d-fold tensor grid;
// the adaptive variant doubles the order until two consecutive estimates agree.
// mc_lp_norm is a plain Monte Carlo estimator with a standard error, chunked so
// the result is bit-stable for any worker count.
//
// gaussian_integral_closed_form computes
//   (2 pi)^{-1/2} integral exp(-1/2 sum_i (a_i x + b_i)^2) dx
//     = (sum a^2)^{-1/2} exp(-1/2 [sum a^2 sum b^2 - (sum ab)^2] / sum a^2),
// where the bracket also equals sum_{i<j} (a_i b_j - a_j b_i)^2.

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "wickholder/errors.hpp"
#include "wickholder/multi_index.hpp"
#include "wickholder/parallel.hpp"
#include "wickholder/rng.hpp"

namespace wickholder {

inline constexpr int kMaxQuadOrder = 200;
inline constexpr std::int64_t kDefaultEvalBudget = std::int64_t{1} << 26;

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  int order() const { return static_cast<int>(nodes.size()); }
};

inline QuadratureRule gauss_hermite_rule(int order) {
  if (order < 1 || order > kMaxQuadOrder) {
    throw ConfigError("gauss_hermite_rule: order " + std::to_string(order) +
                      " outside [1, " + std::to_string(kMaxQuadOrder) + "]");
  }
  QuadratureRule rule;
  if (order == 1) {
    rule.nodes = {0.0};
    rule.weights = {1.0};
    return rule;
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd sub(order - 1);
  for (int k = 1; k < order; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) {
    throw Error("gauss_hermite_rule: eigensolver failed");
  }
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  for (int j = 0; j < order; ++j) {
    rule.nodes[static_cast<std::size_t>(j)] = es.eigenvalues()[j];
    const double v0 = es.eigenvectors()(0, j);
    rule.weights[static_cast<std::size_t>(j)] = v0 * v0;
  }
  // Enforce exact symmetry (eigenvalues come out sorted ascending).
  for (int i = 0, j = order - 1; i < j; ++i, --j) {
    const double m = 0.5 * (rule.nodes[static_cast<std::size_t>(j)] -
                            rule.nodes[static_cast<std::size_t>(i)]);
    rule.nodes[static_cast<std::size_t>(i)] = -m;
    rule.nodes[static_cast<std::size_t>(j)] = m;
    const double w = 0.5 * (rule.weights[static_cast<std::size_t>(i)] +
                            rule.weights[static_cast<std::size_t>(j)]);
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(j)] = w;
  }
  if (order % 2 == 1) rule.nodes[static_cast<std::size_t>(order / 2)] = 0.0;
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

// Memoized rules; safe to call concurrently. References stay valid for the
// life of the process.
inline const QuadratureRule& cached_gauss_hermite(int order) {
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, gauss_hermite_rule(order)).first;
  return it->second;
}

namespace detail {

inline std::int64_t tensor_grid_size(int order, int d, std::int64_t budget) {
  if (d < 1) throw ConfigError("tensor grid: dimension must be positive");
  std::int64_t total = 1;
  for (int i = 0; i < d; ++i) {
    total *= order;
    if (total > budget) {
      throw BudgetError("tensor grid of order " + std::to_string(order) +
                        "^" + std::to_string(d) + " exceeds evaluation budget " +
                        std::to_string(budget));
    }
  }
  return total;
}

}  // namespace detail

// Mean of |f|^p over the tensor grid: sum over the d-fold grid of
// prod_i w_{k_i} |f(nodes_k)|^p, accumulated with fixed-chunk pairwise sums.
template <typename F>
double mean_abs_pow_quadrature(F&& f, double p, const QuadratureRule& rule, int d,
                               std::int64_t budget = kDefaultEvalBudget) {
  if (!(p >= 1.0)) throw ConfigError("quadrature norm: p must be >= 1");
  const int order = rule.order();
  const std::int64_t total = detail::tensor_grid_size(order, d, budget);
  constexpr std::int64_t kChunk = 4096;
  std::vector<double> chunk_sums;
  chunk_sums.reserve(static_cast<std::size_t>((total + kChunk - 1) / kChunk));
  std::vector<int> digit(static_cast<std::size_t>(d), 0);
  std::vector<double> x(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = rule.nodes[0];
  double acc = 0.0;
  std::int64_t in_chunk = 0;
  for (std::int64_t k = 0;; ++k) {
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      w *= rule.weights[static_cast<std::size_t>(digit[static_cast<std::size_t>(i)])];
    }
    acc += w * std::pow(std::abs(f(x)), p);
    if (++in_chunk == kChunk) {
      chunk_sums.push_back(acc);
      acc = 0.0;
      in_chunk = 0;
    }
    int i = 0;
    while (i < d) {
      auto& di = digit[static_cast<std::size_t>(i)];
      if (++di < order) {
        x[static_cast<std::size_t>(i)] = rule.nodes[static_cast<std::size_t>(di)];
        break;
      }
      di = 0;
      x[static_cast<std::size_t>(i)] = rule.nodes[0];
      ++i;
    }
    if (i == d) break;
  }
  if (in_chunk > 0) chunk_sums.push_back(acc);
  return pairwise_sum(chunk_sums);
}

// (sum w |f|^p)^(1/p) over the tensor grid.
template <typename F>
double lp_norm_quadrature(F&& f, double p, const QuadratureRule& rule, int d,
                          std::int64_t budget = kDefaultEvalBudget) {
  return std::pow(mean_abs_pow_quadrature(f, p, rule, d, budget), 1.0 / p);
}

struct AdaptiveResult {
  double value = 0.0;
  double achieved_rtol = 0.0;  // relative change at the accepted order
  int order = 0;
  bool converged = false;
};

// Doubles the rule order (start_order, 2x, ...) up to max_order until two
// consecutive estimates agree to rtol. Never throws on slow convergence: the
// last estimate and its achieved tolerance are always reported.
template <typename F>
AdaptiveResult lp_norm_adaptive(F&& f, double p, int d, double rtol = 1e-9,
                                int start_order = 25, int max_order = kMaxQuadOrder,
                                std::int64_t budget = kDefaultEvalBudget) {
  if (start_order < 1 || max_order > kMaxQuadOrder || start_order > max_order) {
    throw ConfigError("lp_norm_adaptive: bad order range");
  }
  AdaptiveResult res;
  double prev = 0.0;
  bool have_prev = false;
  for (int order = start_order;; order *= 2) {
    if (order > max_order) order = max_order;
    res.value = lp_norm_quadrature(f, p, cached_gauss_hermite(order), d, budget);
    res.order = order;
    if (have_prev) {
      const double scale = std::max(std::abs(res.value), 1e-300);
      res.achieved_rtol = std::abs(res.value - prev) / scale;
      if (res.achieved_rtol <= rtol) {
        res.converged = true;
        return res;
      }
    }
    prev = res.value;
    have_prev = true;
    if (order == max_order) return res;
  }
}

struct McResult {
  double value = 0.0;
  double stderr_value = 0.0;  // standard error propagated through x -> x^(1/p)
  std::int64_t samples = 0;
};

inline constexpr std::int64_t kMcChunk = 8192;

// Monte Carlo estimate of the Lp norm under N(0, I_d). Sample k of chunk c is
// generated by the counter RNG keyed (seed, c), so the estimate depends only
// on (seed, samples), not on the worker count. F must be copyable; each chunk
// evaluates a private copy.
template <typename F>
McResult mc_lp_norm(const F& f, double p, int d, std::int64_t samples,
                    std::uint64_t seed, int jobs = 1) {
  if (!(p >= 1.0)) throw ConfigError("mc_lp_norm: p must be >= 1");
  if (samples < 2) throw ConfigError("mc_lp_norm: need at least 2 samples");
  if (d < 1) throw ConfigError("mc_lp_norm: dimension must be positive");
  const std::int64_t num_chunks = (samples + kMcChunk - 1) / kMcChunk;
  std::vector<double> sums(static_cast<std::size_t>(num_chunks), 0.0);
  std::vector<double> sq_sums(static_cast<std::size_t>(num_chunks), 0.0);
  parallel_chunks(samples, kMcChunk, jobs,
                  [&](std::int64_t chunk, std::int64_t begin, std::int64_t end) {
                    F local = f;
                    CounterRng rng(seed, static_cast<std::uint64_t>(chunk));
                    std::vector<double> x(static_cast<std::size_t>(d));
                    double s = 0.0, q = 0.0;
                    for (std::int64_t k = begin; k < end; ++k) {
                      for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = rng.normal();
                      const double v = std::pow(std::abs(local(x)), p);
                      s += v;
                      q += v * v;
                    }
                    sums[static_cast<std::size_t>(chunk)] = s;
                    sq_sums[static_cast<std::size_t>(chunk)] = q;
                  });
  const double n = static_cast<double>(samples);
  const double total = pairwise_sum(sums);
  const double total_sq = pairwise_sum(sq_sums);
  const double mean = total / n;
  McResult res;
  res.samples = samples;
  if (mean <= 0.0) return res;
  const double var = std::max(0.0, (total_sq - n * mean * mean) / (n - 1.0));
  const double se_mean = std::sqrt(var / n);
  res.value = std::pow(mean, 1.0 / p);
  res.stderr_value = (1.0 / p) * std::pow(mean, 1.0 / p - 1.0) * se_mean;
  return res;
}

enum class GaussianForm {
  CauchySchwarz,  // [sum a^2 sum b^2 - (sum ab)^2] / sum a^2 in the exponent
  Lagrange,       // sum_{i<j} (a_i b_j - a_j b_i)^2 / sum a^2
};

// (2 pi)^{-1/2} integral exp(-1/2 sum_i (a_i x + b_i)^2) dx. The two forms are
// algebraically identical; Lagrange avoids cancellation when a and b are
// nearly parallel.
inline double gaussian_integral_closed_form(const std::vector<double>& a,
                                            const std::vector<double>& b,
                                            GaussianForm form = GaussianForm::CauchySchwarz) {
  require_same_dim(a.size(), b.size(), "gaussian_integral_closed_form");
  if (a.empty()) throw ConfigError("gaussian_integral_closed_form: empty input");
  double sum_aa = 0.0;
  for (double v : a) sum_aa += v * v;
  if (sum_aa == 0.0) {
    throw DegenerateIntegralError(
        "gaussian_integral_closed_form: coefficient vector a is zero");
  }
  double numerator = 0.0;
  if (form == GaussianForm::CauchySchwarz) {
    double sum_bb = 0.0, sum_ab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      sum_bb += b[i] * b[i];
      sum_ab += a[i] * b[i];
    }
    numerator = sum_aa * sum_bb - sum_ab * sum_ab;
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = i + 1; j < a.size(); ++j) {
        const double cross = a[i] * b[j] - a[j] * b[i];
        numerator += cross * cross;
      }
    }
  }
  return std::exp(-0.5 * numerator / sum_aa) / std::sqrt(sum_aa);
}

}  // namespace wickholder
