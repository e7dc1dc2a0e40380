#pragma once

// Independent oracles for the test suites. Everything here is deliberately
// separate from the library's solution path: the matrix exponential uses
// scaling and squaring, quadrature uses composite Simpson, and Christoffel
// matrices come from differentiating the metric directly.

#include <functional>
#include <vector>

#include "ltp/mat.hpp"
#include "ltp/poly.hpp"
#include "ltp/random.hpp"
#include "ltp/types.hpp"

namespace oracle {

/// exp(A) by scaling and squaring with a Taylor core evaluated at norm <= 0.5.
ltp::Mat expm(const ltp::Mat& a);

/// Composite Simpson quadrature of f over [a, b].
double simpson(const std::function<double(double)>& f, double a, double b, int intervals);

/// Christoffel matrices of a metric at x via central differences:
/// 0.5 * g^{il} (d_j g_{la} + d_a g_{lj} - d_l g_{ja}), one matrix per
/// coordinate direction a.
std::vector<ltp::Mat> christoffels_from_metric(
    const std::function<ltp::Mat(std::vector<double>)>& metric, const std::vector<double>& x,
    double h);

/// Random polynomial matrix, every coefficient uniform in [-1, 1].
ltp::PolyMat random_poly_entries(ltp::Rng& rng, int n, int degree);

/// Coefficient field with those entries.
ltp::CoefficientField random_poly_field(ltp::Rng& rng, int n, int degree);

ltp::CoefficientField field_from_entries(const ltp::PolyMat& entries);

/// The constant rotation generator [[0,-1],[1,0]].
ltp::CoefficientField rotation_field();

/// Well-conditioned random analytic frame change on the interval:
/// A(s) = 1 + 0.3 * sum_k C_k s^k with bounded random C_k, plus its exact
/// polynomial derivative.
ltp::FrameChange random_polynomial_change(ltp::Rng& rng, int n, const ltp::Interval& iv,
                                          std::string from_frame = "e",
                                          std::string to_frame = "e'");

}  // namespace oracle
