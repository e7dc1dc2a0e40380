#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "ltp/transport.hpp"
#include "ltp/types.hpp"

namespace ltp {

/// H'(t,s) = A(t)^-1 H(t,s) A(s): the same transport in the frame reached by
/// the change A. Applying the inverse change restores the original.
TransportMatrix change_frame_matrix(const TransportMatrix& h, const FrameChange& a);

/// Gamma'(s) = A(s)^-1 Gamma(s) A(s) + A(s)^-1 dA/ds.
CoefficientField change_frame_coeffs(const CoefficientField& gamma, const FrameChange& a);

/// Frame along a path in which the transport matrix is the identity: the
/// basis vectors are the anchor basis carried from s0 by the transport
/// itself, e'_i(s) = H(s, s0) f_i. Construction cross-checks the equivalent
/// factorization route and records the residual.
struct SpecialFrame {
  int dim = 0;
  Interval interval{0.0, 1.0};
  double base_param = 0.0;
  Mat anchor_basis;
  std::function<Mat(double)> frame_matrices;   // columns: e'_i(s) in the original frame
  std::function<Mat(double)> frame_derivative; // -Gamma(s) frame_matrices(s)
  double crosscheck_residual = 0.0;
  std::string source_frame;

  /// The frame matrices as a basis family.
  FrameFamily basis_family() const;
  /// The change from the original frame into this one.
  FrameChange as_frame_change(std::string to_frame = "special") const;
};

SpecialFrame special_frame(const FundamentalSolution& sol, double s0, const Mat& anchor);

struct EuclideanCheck {
  bool euclidean = false;
  double max_residual = 0.0;
};

/// Is the transport's matrix the identity in the given basis family, over
/// seeded random parameter pairs?
EuclideanCheck is_euclidean_over_path(const TransportSource& src, const FrameFamily& basis,
                                      int samples, double tol = 1e-8,
                                      std::uint64_t seed = 0x1e7b);

/// Do two factorization families generate the same identity-matrix transport?
/// True iff f2(s) f1(s)^-1 is constant across the sampled grid.
bool same_euclidean_generator(const FrameFamily& f1, const FrameFamily& f2, int samples);

}  // namespace ltp
