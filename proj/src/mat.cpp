#include "ltp/mat.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "ltp/errors.hpp"

namespace ltp {

Mat::Mat(int rows, int cols, std::initializer_list<double> entries)
    : rows_(rows), cols_(cols), a_(entries) {
  if (static_cast<int>(a_.size()) != rows * cols)
    throw std::invalid_argument("Mat: initializer size does not match dimensions");
}

Mat Mat::identity(int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

static void require_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string("Mat: shape mismatch in ") + op);
}

Mat& Mat::operator+=(const Mat& o) {
  require_same_shape(*this, o, "+");
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
  return *this;
}

Mat& Mat::operator-=(const Mat& o) {
  require_same_shape(*this, o, "-");
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
  return *this;
}

Mat& Mat::operator*=(double c) {
  for (double& x : a_) x *= c;
  return *this;
}

Mat Mat::transposed() const {
  Mat t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Mat::max_abs() const {
  double m = 0.0;
  for (double x : a_) m = std::max(m, std::fabs(x));
  return m;
}

double Mat::row_sum_norm() const {
  double m = 0.0;
  for (int i = 0; i < rows_; ++i) {
    double r = 0.0;
    for (int j = 0; j < cols_; ++j) r += std::fabs((*this)(i, j));
    m = std::max(m, r);
  }
  return m;
}

bool Mat::finite() const {
  for (double x : a_)
    if (!std::isfinite(x)) return false;
  return true;
}

std::vector<double> Mat::apply(std::span<const double> v) const {
  if (static_cast<int>(v.size()) != cols_)
    throw std::invalid_argument("Mat: vector length does not match columns");
  std::vector<double> r(rows_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

Mat operator+(Mat a, const Mat& b) { return a += b; }
Mat operator-(Mat a, const Mat& b) { return a -= b; }

Mat operator*(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("Mat: shape mismatch in *");
  Mat c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Mat operator*(double c, Mat a) { return a *= c; }
Mat operator*(Mat a, double c) { return a *= c; }

LuFactor::LuFactor(Mat a) : lu_(std::move(a)), a_(lu_) {
  if (!lu_.square()) throw std::invalid_argument("LuFactor: matrix must be square");
  if (!lu_.finite()) throw numeric_error("LuFactor: non-finite entries");
  const int n = lu_.rows();
  piv_.resize(n);
  for (int i = 0; i < n; ++i) piv_[i] = i;
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::fabs(lu_(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double v = std::fabs(lu_(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best == 0.0) {
      singular_ = true;
      return;
    }
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
      std::swap(piv_[k], piv_[p]);
      sign_ = -sign_;
    }
    for (int i = k + 1; i < n; ++i) {
      lu_(i, k) /= lu_(k, k);
      const double m = lu_(i, k);
      if (m == 0.0) continue;
      for (int j = k + 1; j < n; ++j) lu_(i, j) -= m * lu_(k, j);
    }
  }
}

double LuFactor::det() const {
  if (singular_) return 0.0;
  double d = static_cast<double>(sign_);
  for (int i = 0; i < lu_.rows(); ++i) d *= lu_(i, i);
  return d;
}

Mat LuFactor::substitute(const Mat& b) const {
  const int n = lu_.rows();
  Mat x(n, b.cols());
  for (int c = 0; c < b.cols(); ++c) {
    // Ly = Pb
    for (int i = 0; i < n; ++i) {
      double s = b(piv_[i], c);
      for (int j = 0; j < i; ++j) s -= lu_(i, j) * x(j, c);
      x(i, c) = s;
    }
    // Ux = y
    for (int i = n - 1; i >= 0; --i) {
      double s = x(i, c);
      for (int j = i + 1; j < n; ++j) s -= lu_(i, j) * x(j, c);
      x(i, c) = s / lu_(i, i);
    }
  }
  return x;
}

Mat LuFactor::solve(const Mat& b) const {
  if (singular_) throw numeric_error("LuFactor: singular matrix");
  if (b.rows() != lu_.rows()) throw std::invalid_argument("LuFactor: rhs shape mismatch");
  Mat x = substitute(b);
  // One refinement pass: x += A^-1 (b - A x).
  Mat r = b - a_ * x;
  x += substitute(r);
  return x;
}

Mat LuFactor::inverse() const { return solve(Mat::identity(lu_.rows())); }

double condition_estimate(const Mat& a) {
  LuFactor f(a);
  if (f.singular()) return std::numeric_limits<double>::infinity();
  return a.row_sum_norm() * f.inverse().row_sum_norm();
}

double det(const Mat& a) { return LuFactor(a).det(); }

Mat inverse(const Mat& a, double cond_limit) {
  LuFactor f(a);
  if (f.singular()) throw numeric_error("inverse: singular matrix");
  Mat inv = f.inverse();
  const double cond = a.row_sum_norm() * inv.row_sum_norm();
  if (!(cond <= cond_limit))
    throw numeric_error("inverse: condition estimate " + std::to_string(cond) +
                        " exceeds limit " + std::to_string(cond_limit));
  return inv;
}

Mat solve_left(const Mat& a, const Mat& b, double cond_limit) {
  return inverse(a, cond_limit) * b;
}

Mat solve_right(const Mat& b, const Mat& a, double cond_limit) {
  return b * inverse(a, cond_limit);
}

double vec_max_abs(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

bool vec_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

static void require_same_size(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector size mismatch");
}

Vec vec_add(const Vec& a, const Vec& b) {
  require_same_size(a, b);
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vec vec_sub(const Vec& a, const Vec& b) {
  require_same_size(a, b);
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vec vec_scale(double c, const Vec& a) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

Vec vec_combine(double a, const Vec& x, double b, const Vec& y) {
  require_same_size(x, y);
  Vec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = a * x[i] + b * y[i];
  return r;
}

}  // namespace ltp
