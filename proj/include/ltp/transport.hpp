#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ltp/types.hpp"

namespace ltp {

/// Fundamental matrix Y(s, s0; -Gamma) of dY/ds = -Gamma(s) Y, Y(s0) = 1,
/// stored on a grid with cubic Hermite dense output (the slopes -Gamma Y are
/// known at the nodes, so interpolation keeps the integrator's order).
/// Immutable after construction; safe for concurrent queries.
class FundamentalSolution {
 public:
  static constexpr int interpolation_order = 4;

  FundamentalSolution() = default;

  bool empty() const { return grid_.empty(); }
  int dim() const { return coeffs_.dim; }
  double base_param() const { return s0_; }
  Interval interval() const { return Interval{lo_, hi_}; }
  const std::string& frame_id() const { return frame_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<Mat>& values() const { return y_; }
  const CoefficientField& coefficients() const { return coeffs_; }
  double max_step() const { return step_; }

  /// Interpolated Y(s); exact at grid nodes, and exactly the identity at s0.
  Mat y(double s) const;
  /// dY/ds = -Gamma(s) Y(s).
  Mat y_derivative(double s) const;

 private:
  friend FundamentalSolution solve_fundamental(const CoefficientField&, double, Interval, double,
                                               std::string);

  CoefficientField coeffs_;
  double lo_ = 0.0, hi_ = 1.0;
  double s0_ = 0.0;
  int i0_ = 0;
  double h_left_ = 0.0, h_right_ = 0.0;
  double step_ = 0.0;
  std::vector<double> grid_;
  std::vector<Mat> y_, f_;
  std::string frame_;
};

/// Integrates the fundamental-matrix initial-value problem with classical
/// fixed-step fourth-order Runge-Kutta (grid spacing <= step, both directions
/// from s0). Throws numeric_error when coefficient evaluation goes non-finite
/// (reporting the parameter) or a stored matrix fails the conditioning guard.
FundamentalSolution solve_fundamental(const CoefficientField& coeffs, double s0,
                                      Interval interval, double step,
                                      std::string frame_id = "e");

/// OpenMP-parallel solve of independent coefficient fields; identical output
/// to the serial reference.
std::vector<FundamentalSolution> solve_fundamental_batch(
    std::span<const CoefficientField> fields, double s0, Interval interval, double step,
    const std::string& frame_id = "e");
std::vector<FundamentalSolution> solve_fundamental_batch_serial(
    std::span<const CoefficientField> fields, double s0, Interval interval, double step,
    const std::string& frame_id = "e");

struct RefinedSolution {
  FundamentalSolution solution;   // solved at the accepted (finest) step
  double error_estimate = 0.0;    // Richardson estimate ||Y_h - Y_h/2|| / 15
  double accepted_step = 0.0;
  int halvings = 0;
};

/// Adaptive refinement: halves the step until the Richardson estimate over
/// probe points drops below tol.
RefinedSolution solve_fundamental_refined(const CoefficientField& coeffs, double s0,
                                          Interval interval, double initial_step, double tol,
                                          int max_halvings = 12);

/// H(t,s) = Y(t) Y(s)^-1: the transport matrix from s to t. Independent of
/// the base parameter of the solution.
TransportMatrix transport_matrix(const FundamentalSolution& sol, double t, double s);

/// Moves u (components at parameter s) to the fibre at t.
FiberVector transport_vector(const FundamentalSolution& sol, double s, double t,
                             const FiberVector& u);

/// H(t,s) = F(t)^-1 F(s) from a factorization family.
TransportMatrix matrix_from_frames(const FrameFamily& factor, double t, double s,
                                   std::string frame_id = "e");

/// Gamma(s) = F(s)^-1 dF/ds, the coefficients generated by a factorization
/// family.
CoefficientField coefficients_from_frames(const FrameFamily& factor);

/// Views a solution / factorization family as a transport source.
TransportSource as_source(FundamentalSolution sol);
TransportSource frames_source(FrameFamily factor, std::string frame_id = "e");
/// The same transport expressed in the frame reached by A:
/// H'(t,s) = A(t)^-1 H(t,s) A(s).
TransportSource in_frame(const TransportSource& src, const FrameChange& a);

/// Residuals of the defining transport laws over seeded random parameter
/// triples, reproducible from the recorded seed.
struct AxiomReport {
  double max_composition_residual = 0.0;  // ||H(r,t)H(t,s) - H(r,s)||
  double max_identity_residual = 0.0;     // ||H(s,s) - 1||
  double max_inverse_residual = 0.0;      // ||H(t,s)H(s,t) - 1||
  int samples = 0;
  std::uint64_t seed = 0;
};

/// OpenMP kernel; the serial variant is the reference implementation and
/// produces bit-identical reports.
AxiomReport check_axioms(const TransportSource& src, int samples, std::uint64_t seed);
AxiomReport check_axioms_serial(const TransportSource& src, int samples, std::uint64_t seed);

/// Decision threshold for "constant over the interval" comparisons, relative
/// to the matrix norm.
inline constexpr double kConstancyTol = 1e-8;

struct GaugeCheck {
  bool equivalent = false;
  Mat witness;           // F2(s) F1(s)^-1 at the first sample
  double max_deviation = 0.0;
};

/// Do two factorization families induce the same transport? True iff
/// D(s) = F2(s) F1(s)^-1 is constant across the sampled grid.
GaugeCheck gauge_equivalent(const FrameFamily& f1, const FrameFamily& f2, int samples);

}  // namespace ltp
