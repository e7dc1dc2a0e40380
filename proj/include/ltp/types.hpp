#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ltp/errors.hpp"
#include "ltp/mat.hpp"

namespace ltp {

/// Closed parameter interval of a path.
class Interval {
 public:
  Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(lo < hi)) throw std::invalid_argument("Interval: requires lo < hi");
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double length() const { return hi_ - lo_; }
  double midpoint() const { return 0.5 * (lo_ + hi_); }

  /// Containment with a tiny slack so that end points survive round-off.
  bool contains(double s) const { return s >= lo_ - slack() && s <= hi_ + slack(); }

  /// Throws std::invalid_argument naming `what` when s is outside.
  void require(double s, const char* what) const;

  /// Clamps values that passed contains() back onto [lo, hi].
  double clamp(double s) const { return s < lo_ ? lo_ : (s > hi_ ? hi_ : s); }

 private:
  double slack() const;
  double lo_, hi_;
};

/// Declared continuity class, ordered weakest to strongest. Spline-backed
/// data sits between C1 and analytic: smooth, but an approximation whose
/// accuracy claims reports downgrade.
enum class Smoothness { c0, c1, spline, analytic };

/// The map s -> Gamma(s): the n x n coefficient matrix of a transport along a
/// fixed path. Row index is the superscript.
struct CoefficientField {
  int dim = 0;
  std::function<Mat(double)> eval;
  Smoothness smoothness = Smoothness::c1;

  /// Evaluates with shape and finiteness checks; throws numeric_error naming
  /// the offending parameter.
  Mat operator()(double s) const;
};

/// Vector in the fibre over gamma(param), components in the named frame.
struct FiberVector {
  Vec components;
  std::string frame_id;
  double param = 0.0;
};

/// Matrix of a transport from `from_param` to `to_param` in the named frame.
struct TransportMatrix {
  Mat matrix;
  double to_param = 0.0;
  double from_param = 0.0;
  std::string frame_id;
};

/// Checked constructor: matrix must be square, finite and invertible within
/// the condition limit.
TransportMatrix make_transport_matrix(Mat m, double to_param, double from_param,
                                      std::string frame_id,
                                      double cond_limit = kConditionLimit);

/// Family of invertible matrices over an interval. Two roles appear in the
/// API, always named at the call site: a factorization family F(s) with
/// H(t,s) = F(t)^-1 F(s), or a basis family A(s) whose columns are the frame
/// vectors expressed in a background frame.
struct FrameFamily {
  int dim = 0;
  Interval interval{0.0, 1.0};
  std::function<Mat(double)> eval;
  std::function<Mat(double)> derivative;  // optional

  bool has_derivative() const { return static_cast<bool>(derivative); }

  /// Checked evaluation (shape, finiteness, invertibility guard).
  Mat value(double s) const;
  /// Analytic derivative when present, otherwise second-order differences
  /// with h = interval length * 1e-6.
  Mat dvalue(double s) const;
};

/// Section along a path: s -> components in the named frame.
struct Section {
  int dim = 0;
  Interval interval{0.0, 1.0};
  std::string frame_id;
  std::function<Vec(double)> components;
  std::function<Vec(double)> derivative;  // optional
  Smoothness smoothness = Smoothness::c1;

  Vec value(double s) const;
  /// Analytic derivative when present, otherwise central differences with
  /// h = interval length * 1e-6 (one-sided of the same order at the ends).
  Vec dvalue(double s) const;
};

/// Builds a section from component samples on a uniform grid via natural
/// cubic splines; the result is tagged Smoothness::spline so reports can
/// downgrade accuracy claims.
Section section_from_grid(Interval interval, const std::vector<Vec>& values,
                          std::string frame_id);

/// Invertible frame change A(s) with its parameter derivative, mapping the
/// frame `from_frame` to `to_frame`: e'_i(s) = A^j_i(s) e_j(s).
struct FrameChange {
  Interval interval{0.0, 1.0};
  std::function<Mat(double)> eval;
  std::function<Mat(double)> derivative_fn;  // optional
  std::string from_frame = "e";
  std::string to_frame = "e'";

  Mat value(double s) const;
  /// Analytic derivative when supplied, otherwise central differences with
  /// h = interval length * 1e-6.
  Mat derivative(double s) const;
  bool has_analytic_derivative() const { return static_cast<bool>(derivative_fn); }
};

/// Validating factory: checks invertibility at probe points and, when an
/// analytic derivative is supplied, its consistency with finite differences.
FrameChange make_frame_change(Interval interval, std::function<Mat(double)> eval,
                              std::function<Mat(double)> derivative = nullptr,
                              std::string from_frame = "e", std::string to_frame = "e'");

/// Pointwise inverse change (swaps the frame tags).
FrameChange frame_change_inverse(const FrameChange& a);
/// Pointwise product a(s) b(s) with the product-rule derivative; changing
/// frames by a then b equals changing by the composition.
FrameChange frame_change_compose(const FrameChange& a, const FrameChange& b);

/// A transport presented through its matrix function: h(t, s) maps the fibre
/// at s to the fibre at t. Evaluations must be pure; sources are shared
/// freely across threads.
struct TransportSource {
  int dim = 0;
  Interval interval{0.0, 1.0};
  std::string frame_id;
  std::function<Mat(double, double)> eval_to_from;

  Mat h(double t, double s) const { return eval_to_from(t, s); }
};

/// Parameterized path. Abstract paths carry only the interval; chart paths
/// add coordinates and velocity in a chart of the base.
struct PathSpec {
  Interval interval{0.0, 1.0};
  int base_dim = 0;  // 0 = abstract
  std::function<Vec(double)> position;
  std::function<Vec(double)> velocity;

  bool is_chart() const { return base_dim > 0; }
  Vec position_at(double s) const;
  Vec velocity_at(double s) const;

  /// Checks that velocity is the parameter derivative of position by finite
  /// differences at probe points. Throws std::invalid_argument on mismatch.
  void validate_velocity(double rel_tol = 1e-5) const;
};

PathSpec abstract_path(Interval interval);

/// Chart path; when velocity is omitted it is produced by fourth-order finite
/// differences of the position.
PathSpec chart_path(Interval interval, int base_dim, std::function<Vec(double)> position,
                    std::function<Vec(double)> velocity = nullptr);

/// Same trace walked in the opposite direction.
PathSpec reverse_path(const PathSpec& p);

namespace detail {
/// Second-order finite difference of a matrix-valued map restricted to
/// `domain` (central inside, one-sided of matching order near the ends).
Mat fd_mat(const std::function<Mat(double)>& f, double s, double h, const Interval& domain);
Vec fd_vec(const std::function<Vec(double)>& f, double s, double h, const Interval& domain);
/// Fourth-order variant used for path velocities.
Vec fd4_vec(const std::function<Vec(double)>& f, double s, double h, const Interval& domain);
}  // namespace detail

}  // namespace ltp
