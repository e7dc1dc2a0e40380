#pragma once

#include <string>

#include "ltp/types.hpp"

namespace ltp {

/// Transport whose matrix is the identity in its generating frame, for any
/// pair of parameters. The interval only bounds where samplers draw from.
TransportSource euclidean_transport(int dim, Interval domain = Interval{0.0, 1.0},
                                    std::string frame_id = "e");

/// Block-diagonal assembly diag(a, b).
Mat block_diag(const Mat& a, const Mat& b);
/// Kronecker product a (x) b.
Mat kronecker(const Mat& a, const Mat& b);

/// Transport of the direct sum bundle: block-diagonal matrix. Inputs must
/// describe the same parameter pair along the same path.
TransportMatrix direct_sum(const TransportMatrix& h1, const TransportMatrix& h2);

/// Transport of the tensor product bundle: Kronecker product, dim n1*n2.
TransportMatrix tensor_product(const TransportMatrix& h1, const TransportMatrix& h2);

}  // namespace ltp
