#pragma once

// Finite-dimensional Wiener-Ito chaos algebra over R^d with the standard
// Gaussian measure. A ChaosExpansion is a finite sum
//   phi = sum_alpha c_alpha H_alpha,   H_alpha(x) = prod_i h_{alpha_i}(x_i),
// with real coefficients, so ||phi||_2^2 = sum_alpha alpha! c_alpha^2.
//
// Products implemented here, for diagonal T with eigenvalues t_i:
//   Wick:       H_alpha <> H_beta = H_{alpha+beta}
//   pointwise:  coordinatewise Hermite linearization
//   T-Wick:     H_alpha <>_T H_beta =
//       sum_{r <= min(alpha,beta)} (prod_i t_i^{r_i}) r! C(alpha,r) C(beta,r)
//                                  H_{alpha+beta-2r}
// T = I recovers the pointwise product, T = 0 the Wick product (a zero t_i
// simply kills every term with r_i > 0; no limit procedure is needed).
//
// Second quantization of a diagonal operator B acts on the basis by
// Gamma(B) H_alpha = (prod_i b_i^{alpha_i}) H_alpha, with b^0 = 1 even when
// b = 0, so Gamma always preserves the mean.
//
// Exponential functions phi_xi(x) = exp(<x,xi> - |xi|^2/2) have coefficients
// c_alpha = xi^alpha / alpha! and satisfy
//   Gamma(B) phi_xi = phi_{B xi},
//   phi_xi <>_T phi_eta = exp(<T xi, eta>) phi_{xi+eta},
//   ||phi_xi||_l = exp((l-1) |xi|^2 / 2) for l >= 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wickholder/errors.hpp"
#include "wickholder/hermite.hpp"
#include "wickholder/multi_index.hpp"

namespace wickholder {

// b^e for integer e >= 0 with the convention 0^0 = 1.
inline double pow_int(double b, int e) {
  if (e < 0) throw ConfigError("pow_int: negative exponent");
  double out = 1.0;
  for (int k = 0; k < e; ++k) out *= b;
  return out;
}

// Diagonal self-adjoint operator on R^d, stored as its eigenvalue list.
class DiagonalOperator {
 public:
  explicit DiagonalOperator(std::vector<double> eigs) : eigs_(std::move(eigs)) {
    if (eigs_.empty()) throw ConfigError("DiagonalOperator: empty eigenvalue list");
  }

  static DiagonalOperator identity(int dim) {
    return DiagonalOperator(std::vector<double>(check_dim(dim), 1.0));
  }

  static DiagonalOperator scalar(double v, int dim) {
    return DiagonalOperator(std::vector<double>(check_dim(dim), v));
  }

  // Interpolation operator for the T-Wick product family: 0 <= t_i <= 2.
  static DiagonalOperator as_T(std::vector<double> eigs) {
    for (double t : eigs) {
      if (!(t >= 0.0 && t <= 2.0)) {
        throw ConfigError("as_T: eigenvalue " + std::to_string(t) +
                          " outside [0, 2]");
      }
    }
    return DiagonalOperator(std::move(eigs));
  }

  // Contraction: |eig| <= 1.
  static DiagonalOperator as_contraction(std::vector<double> eigs) {
    for (double v : eigs) {
      if (!(std::abs(v) <= 1.0)) {
        throw ConfigError("as_contraction: eigenvalue " + std::to_string(v) +
                          " outside [-1, 1]");
      }
    }
    return DiagonalOperator(std::move(eigs));
  }

  int dim() const { return static_cast<int>(eigs_.size()); }
  const std::vector<double>& eigs() const { return eigs_; }
  double eig(int i) const { return eigs_.at(static_cast<std::size_t>(i)); }

  bool is_invertible() const {
    for (double v : eigs_) {
      if (v == 0.0) return false;
    }
    return true;
  }

  DiagonalOperator inverse() const {
    std::vector<double> out(eigs_.size());
    for (std::size_t i = 0; i < eigs_.size(); ++i) {
      if (eigs_[i] == 0.0) throw SingularOperatorError("inverse of singular operator");
      out[i] = 1.0 / eigs_[i];
    }
    return DiagonalOperator(std::move(out));
  }

  DiagonalOperator sqrt() const {
    std::vector<double> out(eigs_.size());
    for (std::size_t i = 0; i < eigs_.size(); ++i) {
      if (eigs_[i] < 0.0) throw ConfigError("sqrt of operator with negative eigenvalue");
      out[i] = std::sqrt(eigs_[i]);
    }
    return DiagonalOperator(std::move(out));
  }

  friend DiagonalOperator operator*(const DiagonalOperator& a,
                                    const DiagonalOperator& b) {
    require_same_dim(a.eigs_.size(), b.eigs_.size(), "operator product");
    std::vector<double> out(a.eigs_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.eigs_[i] * b.eigs_[i];
    return DiagonalOperator(std::move(out));
  }

  std::vector<double> apply(const std::vector<double>& x) const {
    require_same_dim(eigs_.size(), x.size(), "operator apply");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = eigs_[i] * x[i];
    return out;
  }

  // prod_i eig_i^{alpha_i}, the Gamma(B) weight of H_alpha.
  double power_weight(const MultiIndex& alpha) const {
    require_same_dim(eigs_.size(), alpha.size(), "power_weight");
    double w = 1.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) w *= pow_int(eigs_[i], alpha[i]);
    return w;
  }

  friend bool operator==(const DiagonalOperator&, const DiagonalOperator&) = default;

 private:
  static int check_dim(int dim) {
    if (dim <= 0) throw ConfigError("DiagonalOperator: dimension must be positive");
    return dim;
  }

  std::vector<double> eigs_;
};

// Sparse chaos expansion in canonical form: the term map never stores an
// exact zero coefficient, so equality of maps is equality of functions.
class ChaosExpansion {
 public:
  using TermMap = std::map<MultiIndex, double>;

  explicit ChaosExpansion(int dim, int degree_cap = kDefaultDegreeCap)
      : dim_(dim), degree_cap_(degree_cap) {
    if (dim <= 0) throw ConfigError("ChaosExpansion: dimension must be positive");
    if (degree_cap < 0) throw ConfigError("ChaosExpansion: negative degree cap");
  }

  // coeff * H_alpha.
  static ChaosExpansion basis(const MultiIndex& alpha, double coeff = 1.0,
                              int degree_cap = kDefaultDegreeCap) {
    ChaosExpansion out(static_cast<int>(alpha.size()), degree_cap);
    out.set_coeff(alpha, coeff);
    return out;
  }

  static ChaosExpansion constant(double c, int dim,
                                 int degree_cap = kDefaultDegreeCap) {
    ChaosExpansion out(dim, degree_cap);
    out.set_coeff(MultiIndex(static_cast<std::size_t>(dim), 0), c);
    return out;
  }

  int dim() const { return dim_; }
  int degree_cap() const { return degree_cap_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  // Max total degree over the support; 0 for the zero expansion.
  int degree() const {
    int d = 0;
    for (const auto& [alpha, c] : terms_) d = std::max(d, wickholder::degree(alpha));
    return d;
  }

  double coeff(const MultiIndex& alpha) const {
    auto it = terms_.find(alpha);
    return it == terms_.end() ? 0.0 : it->second;
  }

  // Sets (or erases, when c == 0) one coefficient.
  void set_coeff(const MultiIndex& alpha, double c) {
    require_same_dim(alpha.size(), static_cast<std::size_t>(dim_), "set_coeff");
    require_nonnegative(alpha);
    if (wickholder::degree(alpha) > degree_cap_) {
      throw CapacityError("set_coeff: degree " +
                          std::to_string(wickholder::degree(alpha)) +
                          " exceeds cap " + std::to_string(degree_cap_));
    }
    if (c == 0.0) {
      terms_.erase(alpha);
    } else {
      terms_[alpha] = c;
    }
  }

  void add_coeff(const MultiIndex& alpha, double c) {
    set_coeff(alpha, coeff(alpha) + c);
  }

  ChaosExpansion& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [alpha, c] : terms_) c *= s;
    return *this;
  }

  friend ChaosExpansion operator*(double s, ChaosExpansion phi) {
    phi *= s;
    return phi;
  }

  friend ChaosExpansion operator+(const ChaosExpansion& a, const ChaosExpansion& b) {
    require_same_dim(static_cast<std::size_t>(a.dim_),
                     static_cast<std::size_t>(b.dim_), "expansion sum");
    ChaosExpansion out(a.dim_, std::max(a.degree_cap_, b.degree_cap_));
    out.terms_ = a.terms_;
    for (const auto& [alpha, c] : b.terms_) {
      auto [it, inserted] = out.terms_.try_emplace(alpha, c);
      if (!inserted) {
        it->second += c;
        if (it->second == 0.0) out.terms_.erase(it);
      }
    }
    return out;
  }

  friend ChaosExpansion operator-(const ChaosExpansion& a, const ChaosExpansion& b) {
    return a + (-1.0 * b);
  }

  // Equality as functions: same dimension and identical canonical term maps.
  friend bool operator==(const ChaosExpansion& a, const ChaosExpansion& b) {
    return a.dim_ == b.dim_ && a.terms_ == b.terms_;
  }

 private:
  int dim_;
  int degree_cap_;
  TermMap terms_;
};

// Drops every term of total degree greater than max_degree.
inline ChaosExpansion truncate(const ChaosExpansion& phi, int max_degree) {
  ChaosExpansion out(phi.dim(), phi.degree_cap());
  for (const auto& [alpha, c] : phi.terms()) {
    if (degree(alpha) <= max_degree) out.set_coeff(alpha, c);
  }
  return out;
}

// Largest absolute coefficient difference over the union of supports.
inline double max_coeff_diff(const ChaosExpansion& a, const ChaosExpansion& b) {
  double m = 0.0;
  for (const auto& [alpha, c] : a.terms()) m = std::max(m, std::abs(c - b.coeff(alpha)));
  for (const auto& [alpha, c] : b.terms()) m = std::max(m, std::abs(c - a.coeff(alpha)));
  return m;
}

// Largest relative coefficient difference, |da|/max(|ca|,|cb|,floor).
inline double max_rel_coeff_diff(const ChaosExpansion& a, const ChaosExpansion& b,
                                 double floor = 1.0) {
  double m = 0.0;
  auto visit = [&](const MultiIndex& alpha) {
    const double ca = a.coeff(alpha), cb = b.coeff(alpha);
    const double scale = std::max({std::abs(ca), std::abs(cb), floor});
    m = std::max(m, std::abs(ca - cb) / scale);
  };
  for (const auto& [alpha, c] : a.terms()) visit(alpha);
  for (const auto& [alpha, c] : b.terms()) visit(alpha);
  return m;
}

// Fast repeated evaluation of one expansion: per-coordinate Hermite tables
// are filled by recurrence once per point. Copy per worker when evaluating
// concurrently; operator() uses internal scratch and is not thread-safe.
class Evaluator {
 public:
  explicit Evaluator(const ChaosExpansion& phi)
      : dim_(phi.dim()), maxdeg_(static_cast<std::size_t>(phi.dim()), 0) {
    for (const auto& [alpha, c] : phi.terms()) {
      terms_.emplace_back(alpha, c);
      for (int i = 0; i < dim_; ++i) {
        maxdeg_[static_cast<std::size_t>(i)] =
            std::max(maxdeg_[static_cast<std::size_t>(i)], alpha[static_cast<std::size_t>(i)]);
      }
    }
    stride_ = 1 + *std::max_element(maxdeg_.begin(), maxdeg_.end());
    table_.resize(static_cast<std::size_t>(dim_) * static_cast<std::size_t>(stride_));
  }

  int dim() const { return dim_; }

  double operator()(const std::vector<double>& x) {
    require_same_dim(x.size(), static_cast<std::size_t>(dim_), "Evaluator");
    for (int i = 0; i < dim_; ++i) {
      double* row = table_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(stride_);
      const int n = maxdeg_[static_cast<std::size_t>(i)];
      row[0] = 1.0;
      if (n >= 1) row[1] = x[static_cast<std::size_t>(i)];
      for (int k = 1; k < n; ++k) {
        row[k + 1] = x[static_cast<std::size_t>(i)] * row[k] - static_cast<double>(k) * row[k - 1];
      }
    }
    double sum = 0.0;
    for (const auto& [alpha, c] : terms_) {
      double prod = c;
      for (int i = 0; i < dim_; ++i) {
        prod *= table_[static_cast<std::size_t>(i) * static_cast<std::size_t>(stride_) +
                       static_cast<std::size_t>(alpha[static_cast<std::size_t>(i)])];
      }
      sum += prod;
    }
    return sum;
  }

 private:
  int dim_;
  int stride_;
  std::vector<int> maxdeg_;
  std::vector<std::pair<MultiIndex, double>> terms_;
  std::vector<double> table_;
};

// phi(x).
inline double evaluate(const ChaosExpansion& phi, const std::vector<double>& x) {
  Evaluator ev(phi);
  return ev(x);
}

// ||phi||_2 = sqrt(sum_alpha alpha! c_alpha^2).
inline double l2_norm(const ChaosExpansion& phi) {
  double s = 0.0;
  for (const auto& [alpha, c] : phi.terms()) s += multiindex_factorial(alpha) * c * c;
  return std::sqrt(s);
}

// E[phi] = coefficient of H_0.
inline double mean(const ChaosExpansion& phi) {
  return phi.coeff(MultiIndex(static_cast<std::size_t>(phi.dim()), 0));
}

// Gamma(B) phi: each H_alpha is scaled by prod_i b_i^{alpha_i}.
inline ChaosExpansion second_quantization(const DiagonalOperator& B,
                                          const ChaosExpansion& phi) {
  require_same_dim(static_cast<std::size_t>(B.dim()),
                   static_cast<std::size_t>(phi.dim()), "second_quantization");
  ChaosExpansion out(phi.dim(), phi.degree_cap());
  for (const auto& [alpha, c] : phi.terms()) {
    out.set_coeff(alpha, c * B.power_weight(alpha));
  }
  return out;
}

namespace detail {

inline int product_cap(const ChaosExpansion& a, const ChaosExpansion& b,
                       const char* what) {
  require_same_dim(static_cast<std::size_t>(a.dim()),
                   static_cast<std::size_t>(b.dim()), what);
  const int cap = std::max(a.degree_cap(), b.degree_cap());
  if (!a.is_zero() && !b.is_zero() && a.degree() + b.degree() > cap) {
    throw CapacityError(std::string(what) + ": product degree " +
                        std::to_string(a.degree() + b.degree()) +
                        " exceeds cap " + std::to_string(cap));
  }
  return cap;
}

}  // namespace detail

// Wick product: H_alpha <> H_beta = H_{alpha+beta}, extended bilinearly.
inline ChaosExpansion wick_product(const ChaosExpansion& a, const ChaosExpansion& b) {
  ChaosExpansion out(a.dim(), detail::product_cap(a, b, "wick_product"));
  for (const auto& [alpha, ca] : a.terms()) {
    for (const auto& [beta, cb] : b.terms()) {
      out.add_coeff(add(alpha, beta), ca * cb);
    }
  }
  return out;
}

// Pointwise product, computed coordinate by coordinate from the Hermite
// linearization h_m h_n = sum_r r! C(m,r) C(n,r) h_{m+n-2r}.
inline ChaosExpansion pointwise_product(const ChaosExpansion& a,
                                        const ChaosExpansion& b) {
  ChaosExpansion out(a.dim(), detail::product_cap(a, b, "pointwise_product"));
  const std::size_t d = static_cast<std::size_t>(a.dim());
  std::vector<std::pair<MultiIndex, double>> partial, next;
  for (const auto& [alpha, ca] : a.terms()) {
    for (const auto& [beta, cb] : b.terms()) {
      partial.assign(1, {MultiIndex(), ca * cb});
      for (std::size_t i = 0; i < d; ++i) {
        const auto lin = hermite_linearize(alpha[i], beta[i]);
        next.clear();
        next.reserve(partial.size() * lin.size());
        for (const auto& [prefix, w] : partial) {
          for (const auto& term : lin) {
            MultiIndex ext = prefix;
            ext.push_back(term.degree);
            next.emplace_back(std::move(ext), w * term.coeff);
          }
        }
        partial.swap(next);
      }
      for (const auto& [gamma, w] : partial) out.add_coeff(gamma, w);
    }
  }
  return out;
}

// T-Wick product for diagonal T, via the closed combinatorial form. Any real
// eigenvalues are accepted; t_i = 0 contributes only r_i = 0 terms and t_i = 1
// reproduces the pointwise product.
inline ChaosExpansion t_wick_product(const ChaosExpansion& a, const ChaosExpansion& b,
                                     const DiagonalOperator& T) {
  require_same_dim(static_cast<std::size_t>(T.dim()),
                   static_cast<std::size_t>(a.dim()), "t_wick_product");
  ChaosExpansion out(a.dim(), detail::product_cap(a, b, "t_wick_product"));
  const std::size_t d = static_cast<std::size_t>(a.dim());
  MultiIndex r(d, 0), gamma(d, 0);
  for (const auto& [alpha, ca] : a.terms()) {
    for (const auto& [beta, cb] : b.terms()) {
      // Odometer over 0 <= r <= min(alpha, beta) componentwise.
      std::fill(r.begin(), r.end(), 0);
      while (true) {
        double k = ca * cb;
        for (std::size_t i = 0; i < d; ++i) {
          k *= pow_int(T.eigs()[i], r[i]) * factorial(r[i]) *
               binomial(alpha[i], r[i]) * binomial(beta[i], r[i]);
          gamma[i] = alpha[i] + beta[i] - 2 * r[i];
        }
        if (k != 0.0) out.add_coeff(gamma, k);
        std::size_t j = 0;
        while (j < d) {
          const int rmax = std::min(alpha[j], beta[j]);
          if (r[j] < rmax) {
            ++r[j];
            break;
          }
          r[j] = 0;
          ++j;
        }
        if (j == d) break;
      }
    }
  }
  return out;
}

// Exponential function phi_xi(x) = exp(<x, xi> - |xi|^2/2).
struct ExponentialVector {
  std::vector<double> xi;

  int dim() const { return static_cast<int>(xi.size()); }

  double norm_sq() const {
    double s = 0.0;
    for (double v : xi) s += v * v;
    return s;
  }

  double operator()(const std::vector<double>& x) const {
    require_same_dim(x.size(), xi.size(), "ExponentialVector");
    double ip = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) ip += x[i] * xi[i];
    return std::exp(ip - 0.5 * norm_sq());
  }

  friend bool operator==(const ExponentialVector&, const ExponentialVector&) = default;
};

// Gamma(B) phi_xi = phi_{B xi}.
inline ExponentialVector apply(const DiagonalOperator& B, const ExponentialVector& e) {
  return ExponentialVector{B.apply(e.xi)};
}

// scale * phi_vec, with the scale kept in log form as well.
struct ScaledExponential {
  double scale;
  double log_scale;
  ExponentialVector vec;
};

// phi_xi <>_T phi_eta = exp(<T xi, eta>) phi_{xi+eta}.
inline ScaledExponential t_wick_exponentials(const ExponentialVector& xi,
                                             const ExponentialVector& eta,
                                             const DiagonalOperator& T) {
  require_same_dim(xi.xi.size(), eta.xi.size(), "t_wick_exponentials");
  require_same_dim(static_cast<std::size_t>(T.dim()), xi.xi.size(),
                   "t_wick_exponentials");
  double ip = 0.0;
  for (std::size_t i = 0; i < xi.xi.size(); ++i) ip += T.eigs()[i] * xi.xi[i] * eta.xi[i];
  std::vector<double> sum(xi.xi.size());
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = xi.xi[i] + eta.xi[i];
  return {std::exp(ip), ip, ExponentialVector{std::move(sum)}};
}

struct ExpExpansion {
  ChaosExpansion expansion;
  // Squared L2 error of the truncation: sum_{n > cap} |xi|^{2n} / n!.
  double tail_l2_sq;
};

// Chaos coefficients of phi_xi up to total degree trunc_degree:
// c_alpha = xi^alpha / alpha!.
inline ExpExpansion exp_expansion(const ExponentialVector& e, int trunc_degree,
                                  int degree_cap = kDefaultDegreeCap) {
  if (trunc_degree < 0) throw ConfigError("exp_expansion: negative truncation degree");
  if (trunc_degree > degree_cap) {
    throw CapacityError("exp_expansion: truncation degree exceeds degree cap");
  }
  const std::size_t d = e.xi.size();
  if (d == 0) throw ConfigError("exp_expansion: empty vector");
  ChaosExpansion out(static_cast<int>(d), degree_cap);
  MultiIndex alpha(d, 0);
  // Depth-first enumeration of all alpha with |alpha| <= trunc_degree.
  auto rec = [&](auto&& self, std::size_t i, int left, double coeff) -> void {
    if (i == d) {
      out.set_coeff(alpha, coeff);
      return;
    }
    double c = coeff;
    for (int k = 0; k <= left; ++k) {
      alpha[i] = k;
      self(self, i + 1, left - k, c);
      c *= e.xi[i] / static_cast<double>(k + 1);
      if (c == 0.0) break;
    }
    alpha[i] = 0;
  };
  rec(rec, 0, trunc_degree, 1.0);

  const double s = e.norm_sq();
  double tail = 0.0;
  if (s > 0.0) {
    double term = 1.0;
    for (int n = 1; n <= trunc_degree + 1; ++n) term *= s / static_cast<double>(n);
    for (int n = trunc_degree + 1; term > 0.0; ++n) {
      tail += term;
      if (term <= tail * 1e-18) break;
      term *= s / static_cast<double>(n + 1);
    }
  }
  return {std::move(out), tail};
}

// log ||phi_xi||_l = (l - 1) |xi|^2 / 2, for l >= 1.
inline double exp_lp_log_norm(const ExponentialVector& e, double l) {
  if (!(l >= 1.0)) throw ConfigError("exp_lp_log_norm: l must be >= 1");
  return 0.5 * (l - 1.0) * e.norm_sq();
}

inline double exp_lp_norm(const ExponentialVector& e, double l) {
  return std::exp(exp_lp_log_norm(e, l));
}

// Right-hand route of the transport identity: for invertible B,
// Gamma(B)(phi <>_T psi) = Gamma(B) phi <>_{T B^-2} Gamma(B) psi.
// Returns the right-hand side; callers compare with the left-hand route.
inline ChaosExpansion functorial_transport(const DiagonalOperator& B,
                                           const ChaosExpansion& phi,
                                           const ChaosExpansion& psi,
                                           const DiagonalOperator& T) {
  if (!B.is_invertible()) {
    throw SingularOperatorError("functorial_transport: B must be invertible");
  }
  const DiagonalOperator binv = B.inverse();
  const DiagonalOperator t_adj = T * binv * binv;
  return t_wick_product(second_quantization(B, phi), second_quantization(B, psi), t_adj);
}

}  // namespace wickholder
