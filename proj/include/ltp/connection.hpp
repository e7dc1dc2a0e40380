#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ltp/types.hpp"

namespace ltp {

/// Rectangular coordinate chart; coordinates may be periodic (loops close
/// modulo the period).
struct ChartDomain {
  Vec lo, hi;
  std::vector<double> period;  // 0 = not periodic; same length as lo/hi

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(std::span<const double> x) const;
  /// Componentwise gap between two points, reduced modulo periods.
  Vec closure_gap(std::span<const double> a, std::span<const double> b) const;
};

ChartDomain box_chart(Vec lo, Vec hi);

/// Point-dependent transport coefficients on a chart: x -> m matrices of
/// size n x n, one per base direction. Contraction with a path velocity
/// yields the path coefficients. An optional fibre metric enables
/// orthonormal-frame holonomy angles.
struct ChristoffelField {
  int fiber_dim = 0;
  int base_dim = 0;
  ChartDomain chart;
  std::string chart_id = "chart";
  std::function<std::vector<Mat>(std::span<const double>)> eval;
  std::function<Mat(std::span<const double>)> metric;  // optional

  /// Checked evaluation: domain membership, count, shapes, finiteness.
  std::vector<Mat> value(std::span<const double> x) const;
};

/// Gamma(s) = sum_alpha Gamma_alpha(gamma(s)) v^alpha(s) for a chart path.
CoefficientField path_coefficients(const ChristoffelField& field, const PathSpec& path);

/// Frame change as a function of the base point, with its coordinate
/// partials.
struct FrameChangeField {
  std::function<Mat(std::span<const double>)> eval;
  /// d(eval)/d x^alpha.
  std::function<Mat(std::span<const double>, int)> partial;
};

/// Coordinate change x -> x' with inverse and forward Jacobian dx'/dx.
struct CoordinateChange {
  int dim = 0;
  std::function<Vec(std::span<const double>)> forward;
  std::function<Vec(std::span<const double>)> inverse;
  std::function<Mat(std::span<const double>)> jacobian;  // at x
};

CoordinateChange identity_coordinates(int dim);

/// The transformed field in the primed chart: for every path, contracting the
/// transformed field along the transformed path equals the frame change of
/// the contracted original coefficients.
ChristoffelField transform_christoffels(const ChristoffelField& field,
                                        const FrameChangeField& frame_change,
                                        const CoordinateChange& coords, ChartDomain new_chart,
                                        std::string new_chart_id = "chart'");

/// The same path expressed in the primed coordinates.
PathSpec transform_path(const PathSpec& path, const CoordinateChange& coords);

struct HolonomyResult {
  Mat matrix;               // transport around the loop, coordinate frame
  double defect_norm = 0.0; // ||matrix - 1||
  /// Rotation angle in [0, 2pi) extracted from the orthonormal-frame matrix;
  /// present for fibre dimension 2 when the matrix is orthogonal there.
  std::optional<double> rotation_angle;
  /// ||H^T g H - g|| at the base point, when the field carries a metric.
  std::optional<double> metric_orthogonality_defect;
  Vec base_point;
};

/// Transport around a closed chart loop. The loop must close (componentwise,
/// modulo chart periods) to 1e-10.
HolonomyResult holonomy(const ChristoffelField& field, const PathSpec& loop, double step);

/// Preset geometries: "flat-euclidean" (all-zero field on the plane),
/// "sphere-levi-civita" (unit sphere in polar/azimuthal coordinates,
/// poles excluded by eps = 1e-3), "constant-custom" (user matrix list).
ChristoffelField tangent_bundle_preset(const std::string& name,
                                       const std::vector<Mat>& custom = {});

}  // namespace ltp
