#pragma once

// Multi-indices alpha in N^d and the combinatorial weights used throughout
// the chaos algebra: alpha! = prod_i alpha_i! and C(alpha, r) = prod_i
// C(alpha_i, r_i). Factorials and binomials are computed in double; for the
// degrees this library supports (cap 40 per product factor) they stay well
// inside the double range and keep at least 15 significant digits.

#include <cstddef>
#include <string>
#include <vector>

#include "wickholder/errors.hpp"

namespace wickholder {

// Dense nonnegative integer vector. std::vector gives value semantics,
// lexicographic operator< (canonical map key order) and operator==.
using MultiIndex = std::vector<int>;

inline void require_nonnegative(const MultiIndex& a) {
  for (int v : a) {
    if (v < 0) throw ConfigError("multi-index entry is negative");
  }
}

inline void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimensions " +
                         std::to_string(a) + " and " + std::to_string(b) +
                         " differ");
  }
}

// |alpha| = sum of entries.
inline int degree(const MultiIndex& a) {
  int s = 0;
  for (int v : a) s += v;
  return s;
}

// Componentwise r <= a.
inline bool leq(const MultiIndex& r, const MultiIndex& a) {
  require_same_dim(r.size(), a.size(), "leq");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (r[i] > a[i]) return false;
  }
  return true;
}

inline MultiIndex add(const MultiIndex& a, const MultiIndex& b) {
  require_same_dim(a.size(), b.size(), "add");
  MultiIndex out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

// n! for 0 <= n <= 170 (the double overflow bound).
inline double factorial(int n) {
  if (n < 0) throw ConfigError("factorial of negative integer");
  if (n > 170) throw CapacityError("factorial(" + std::to_string(n) +
                                   ") overflows double");
  static const std::vector<double> table = [] {
    std::vector<double> t(171);
    t[0] = 1.0;
    for (int k = 1; k <= 170; ++k) t[k] = t[k - 1] * static_cast<double>(k);
    return t;
  }();
  return table[n];
}

// C(n, k) via the multiplicative formula; exact relative error ~1e-15.
inline double binomial(int n, int k) {
  if (n < 0 || k < 0) throw ConfigError("binomial with negative argument");
  if (k > n) return 0.0;
  if (k > n - k) k = n - k;
  double c = 1.0;
  for (int j = 1; j <= k; ++j) {
    c *= static_cast<double>(n - k + j);
    c /= static_cast<double>(j);
  }
  return c;
}

// alpha! = prod_i alpha_i!.
inline double multiindex_factorial(const MultiIndex& a) {
  require_nonnegative(a);
  double f = 1.0;
  for (int v : a) f *= factorial(v);
  return f;
}

// prod_i C(alpha_i, r_i). Requires r <= alpha componentwise.
inline double multiindex_combinatorics(const MultiIndex& alpha,
                                       const MultiIndex& r) {
  require_nonnegative(alpha);
  require_nonnegative(r);
  if (!leq(r, alpha)) {
    throw ConfigError("multiindex_combinatorics: r exceeds alpha");
  }
  double c = 1.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) c *= binomial(alpha[i], r[i]);
  return c;
}

}  // namespace wickholder
