#pragma once

// Probabilists' Hermite polynomials:
//   h_0 = 1,  h_1 = x,  h_{n+1}(x) = x h_n(x) - n h_{n-1}(x).
// They are orthogonal for the standard Gaussian weight exp(-x^2/2)/sqrt(2 pi)
// with integral of h_m h_n equal to n! delta_{mn}. The pointwise product
// linearizes as
//   h_m h_n = sum_{r=0}^{min(m,n)} r! C(m,r) C(n,r) h_{m+n-2r}.

#include <vector>

#include "wickholder/errors.hpp"
#include "wickholder/multi_index.hpp"

namespace wickholder {

// Default per-factor degree cap. Keeps every combinatorial weight (up to
// (2*cap)! scale) comfortably inside double range and precision.
inline constexpr int kDefaultDegreeCap = 40;

inline void require_degree(int n, int cap, const char* what) {
  if (n < 0) throw ConfigError(std::string(what) + ": negative degree");
  if (n > cap) {
    throw CapacityError(std::string(what) + ": degree " + std::to_string(n) +
                        " exceeds cap " + std::to_string(cap));
  }
}

// h_n(x).
inline double hermite_eval(int n, double x, int cap = kDefaultDegreeCap) {
  require_degree(n, cap, "hermite_eval");
  if (n == 0) return 1.0;
  double prev = 1.0;  // h_0
  double cur = x;     // h_1
  for (int k = 1; k < n; ++k) {
    double next = x * cur - static_cast<double>(k) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// Fills out[0..n] with h_0(x) .. h_n(x). out is resized to n + 1.
inline void hermite_eval_all(int n, double x, std::vector<double>& out,
                             int cap = kDefaultDegreeCap) {
  require_degree(n, cap, "hermite_eval_all");
  out.resize(static_cast<std::size_t>(n) + 1);
  out[0] = 1.0;
  if (n == 0) return;
  out[1] = x;
  for (int k = 1; k < n; ++k) {
    out[k + 1] = x * out[k] - static_cast<double>(k) * out[k - 1];
  }
}

struct HermiteTerm {
  int degree;
  double coeff;
  friend bool operator==(const HermiteTerm&, const HermiteTerm&) = default;
};

// Expansion of h_m * h_n in the Hermite basis, degrees descending from m + n
// to |m - n| in steps of 2. Coefficients r! C(m,r) C(n,r) are all positive.
inline std::vector<HermiteTerm> hermite_linearize(int m, int n,
                                                  int cap = kDefaultDegreeCap) {
  require_degree(m, cap, "hermite_linearize");
  require_degree(n, cap, "hermite_linearize");
  const int rmax = m < n ? m : n;
  std::vector<HermiteTerm> terms;
  terms.reserve(static_cast<std::size_t>(rmax) + 1);
  for (int r = 0; r <= rmax; ++r) {
    const double coeff = factorial(r) * binomial(m, r) * binomial(n, r);
    terms.push_back({m + n - 2 * r, coeff});
  }
  return terms;
}

}  // namespace wickholder
