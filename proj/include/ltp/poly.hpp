#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "ltp/mat.hpp"

namespace ltp {

/// Real polynomial with coefficients in ascending powers.
struct Poly {
  std::vector<double> c;

  Poly() = default;
  Poly(std::initializer_list<double> coeffs) : c(coeffs) {}
  explicit Poly(std::vector<double> coeffs) : c(std::move(coeffs)) {}

  double operator()(double s) const {
    double r = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * s + *it;
    return r;
  }

  Poly derivative() const {
    Poly d;
    for (std::size_t k = 1; k < c.size(); ++k) d.c.push_back(static_cast<double>(k) * c[k]);
    return d;
  }

  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.c.empty() || b.c.empty()) return {};
    Poly p;
    p.c.assign(a.c.size() + b.c.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c.size(); ++i)
      for (std::size_t j = 0; j < b.c.size(); ++j) p.c[i + j] += a.c[i] * b.c[j];
    return p;
  }

  friend Poly operator+(const Poly& a, const Poly& b) {
    Poly p;
    p.c.assign(std::max(a.c.size(), b.c.size()), 0.0);
    for (std::size_t i = 0; i < a.c.size(); ++i) p.c[i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) p.c[i] += b.c[i];
    return p;
  }
};

/// Matrix of polynomials; entry (i,j) at m[i][j].
using PolyMat = std::vector<std::vector<Poly>>;

inline Mat eval(const PolyMat& m, double s) {
  const int rows = static_cast<int>(m.size());
  const int cols = rows ? static_cast<int>(m[0].size()) : 0;
  Mat out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out(i, j) = m[i][j](s);
  return out;
}

inline PolyMat derivative(const PolyMat& m) {
  PolyMat d(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    d[i].reserve(m[i].size());
    for (const Poly& p : m[i]) d[i].push_back(p.derivative());
  }
  return d;
}

}  // namespace ltp
