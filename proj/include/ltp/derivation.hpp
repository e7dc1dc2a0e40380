#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ltp/poly.hpp"
#include "ltp/transport.hpp"
#include "ltp/types.hpp"

namespace ltp {

/// Derivation along a path, determined by its coefficient matrix: acting on a
/// C1 section it yields d(sigma)/ds + Gamma(s) sigma(s) componentwise.
struct DerivationOperator {
  CoefficientField coefficients;
  std::string frame_id = "e";
};

/// Value of the derivation at one parameter.
FiberVector derive_section(const DerivationOperator& d, const Section& sigma, double s);

/// The derivation as a section-to-section map (components only; the result
/// carries no analytic derivative).
Section derive(const DerivationOperator& d, const Section& sigma);

/// One-sided difference quotient of the defining limit:
/// (1/eps) (H(s, s+eps) sigma(s+eps) - sigma(s)). First-order in eps.
FiberVector derive_via_limit(const FundamentalSolution& sol, const Section& sigma, double s,
                             double eps);

/// Gamma(s) from the matrix function by central differences in the second
/// argument of H(s, .) at t = s.
Mat coefficients_from_matrix(const TransportSource& src, double s, double h);
/// The equivalent second form, -dH(t,s)/dt at t = s; agrees to O(h^2).
Mat coefficients_from_matrix_alt(const TransportSource& src, double s, double h);

using SectionMap = std::function<Section(const Section&)>;

/// Canonical map of a derivation operator.
SectionMap derivation_map(const DerivationOperator& d);

/// Recovers the coefficient field of a black-box derivation by probing the n
/// basis sections; column j of Gamma(s) is D e_j at s. Linearity of the map
/// is spot-checked on random polynomial sections and violations are rejected
/// with a diagnostic.
CoefficientField coefficients_from_derivation(const SectionMap& d, int dim, Interval interval,
                                              std::string frame_id,
                                              std::uint64_t seed = 0xd221);

/// Scalar C1 function with its derivative.
struct ScalarFunction {
  std::function<double(double)> f;
  std::function<double(double)> df;
};

ScalarFunction scalar_function(const Poly& p);

/// max over sampled s of || D(f sigma) - f' sigma - f D sigma ||.
double leibniz_residual(const SectionMap& d, const ScalarFunction& f, const Section& sigma,
                        int samples);

/// Section with polynomial components (analytic derivative attached).
Section polynomial_section(Interval interval, std::vector<Poly> components,
                           std::string frame_id = "e");

/// Scales and adds sections over the same interval/frame.
Section combine_sections(double a, const Section& x, double b, const Section& y);

struct RoundtripResult {
  double max_error = 0.0;
  int samples = 0;
};

/// Reconstructs the transport from Gamma, extracts coefficients back by
/// finite differences, and reports the worst deviation over a uniform sample
/// grid. OpenMP kernel plus serial reference.
RoundtripResult roundtrip_coefficients(const CoefficientField& gamma, Interval interval,
                                       double step, double h, int samples = 101);
RoundtripResult roundtrip_coefficients_serial(const CoefficientField& gamma, Interval interval,
                                              double step, double h, int samples = 101);

}  // namespace ltp
