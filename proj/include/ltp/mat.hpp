#pragma once

#include <initializer_list>
#include <span>
#include <vector>

namespace ltp {

/// Dense real matrix, row-major. In every transport formula the row index is
/// the superscript slot and the column index the subscript, so H*u acts on
/// component columns directly.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols)
      : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, 0.0) {}
  Mat(int rows, int cols, std::initializer_list<double> entries);

  static Mat identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool square() const { return rows_ == cols_ && rows_ > 0; }
  bool empty() const { return a_.empty(); }

  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

  Mat& operator+=(const Mat& o);
  Mat& operator-=(const Mat& o);
  Mat& operator*=(double c);

  Mat transposed() const;

  /// Entrywise sup norm; the norm used by all residual reports.
  double max_abs() const;
  /// Induced infinity norm (max absolute row sum); used for conditioning.
  double row_sum_norm() const;
  bool finite() const;

  /// Matrix-vector product M v.
  std::vector<double> apply(std::span<const double> v) const;

  const std::vector<double>& data() const { return a_; }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator*(const Mat& a, const Mat& b);
Mat operator*(double c, Mat a);
Mat operator*(Mat a, double c);

/// Condition numbers above this are treated as singular throughout the
/// library: transports are isomorphisms, so anything worse is a failure.
inline constexpr double kConditionLimit = 1e12;

/// LU factorization with partial pivoting for the small dense systems that
/// arise from fibre-dimension-sized matrices.
class LuFactor {
 public:
  explicit LuFactor(Mat a);

  bool singular() const { return singular_; }
  double det() const;

  /// Solves A X = B with one pass of iterative refinement against the
  /// original matrix. Throws numeric_error if the factorization is singular.
  Mat solve(const Mat& b) const;
  Mat inverse() const;

 private:
  Mat substitute(const Mat& b) const;  // raw forward/back substitution

  Mat lu_;
  Mat a_;  // original matrix, kept for the refinement residual
  std::vector<int> piv_;
  int sign_ = 1;
  bool singular_ = false;
};

/// ||A||_inf * ||A^-1||_inf estimate; +infinity when A is exactly singular.
double condition_estimate(const Mat& a);

double det(const Mat& a);

/// Refined inverse; throws numeric_error when the condition estimate exceeds
/// cond_limit.
Mat inverse(const Mat& a, double cond_limit = kConditionLimit);

/// A^-1 B with conditioning guard on A.
Mat solve_left(const Mat& a, const Mat& b, double cond_limit = kConditionLimit);
/// B A^-1 with conditioning guard on A.
Mat solve_right(const Mat& b, const Mat& a, double cond_limit = kConditionLimit);

// Small helpers for component vectors.
using Vec = std::vector<double>;
double vec_max_abs(const Vec& v);
bool vec_finite(const Vec& v);
Vec vec_add(const Vec& a, const Vec& b);
Vec vec_sub(const Vec& a, const Vec& b);
Vec vec_scale(double c, const Vec& a);
/// a*x + b*y
Vec vec_combine(double a, const Vec& x, double b, const Vec& y);

}  // namespace ltp
