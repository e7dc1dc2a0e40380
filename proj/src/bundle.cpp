#include "ltp/bundle.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace ltp {

TransportSource euclidean_transport(int dim, Interval domain, std::string frame_id) {
  if (dim < 1) throw std::invalid_argument("euclidean_transport: dim must be >= 1");
  TransportSource src;
  src.dim = dim;
  src.interval = domain;
  src.frame_id = std::move(frame_id);
  src.eval_to_from = [dim](double, double) { return Mat::identity(dim); };
  return src;
}

Mat block_diag(const Mat& a, const Mat& b) {
  Mat c(a.rows() + b.rows(), a.cols() + b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
  for (int i = 0; i < b.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) c(a.rows() + i, a.cols() + j) = b(i, j);
  return c;
}

Mat kronecker(const Mat& a, const Mat& b) {
  Mat c(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l)
          c(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return c;
}

namespace {

void require_same_pair(const TransportMatrix& h1, const TransportMatrix& h2, const char* op) {
  if (h1.to_param != h2.to_param || h1.from_param != h2.from_param)
    throw std::invalid_argument(std::string(op) +
                                ": operands describe different parameter pairs");
}

}  // namespace

TransportMatrix direct_sum(const TransportMatrix& h1, const TransportMatrix& h2) {
  require_same_pair(h1, h2, "direct_sum");
  return make_transport_matrix(block_diag(h1.matrix, h2.matrix), h1.to_param, h1.from_param,
                               h1.frame_id + "(+)" + h2.frame_id);
}

TransportMatrix tensor_product(const TransportMatrix& h1, const TransportMatrix& h2) {
  require_same_pair(h1, h2, "tensor_product");
  return make_transport_matrix(kronecker(h1.matrix, h2.matrix), h1.to_param, h1.from_param,
                               h1.frame_id + "(x)" + h2.frame_id);
}

}  // namespace ltp
