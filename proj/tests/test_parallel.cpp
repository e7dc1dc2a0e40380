#include <doctest.h>

#include "ltp/derivation.hpp"
#include "ltp/transport.hpp"
#include "support/oracles.hpp"

using namespace ltp;

// The OpenMP kernels must agree bit-for-bit with their serial reference
// implementations: samples are drawn up front and max-reductions are exact.

TEST_CASE("axiom scans match the serial reference bit-for-bit") {
  Rng rng(101);
  for (int n : {2, 4}) {
    const CoefficientField gamma = oracle::random_poly_field(rng, n, 3);
    const FundamentalSolution sol = solve_fundamental(gamma, 0.0, {0.0, 1.0}, 1e-3);
    const TransportSource src = as_source(sol);
    const AxiomReport serial = check_axioms_serial(src, 500, 7);
    const AxiomReport parallel = check_axioms(src, 500, 7);
    CHECK(serial.max_composition_residual == parallel.max_composition_residual);
    CHECK(serial.max_identity_residual == parallel.max_identity_residual);
    CHECK(serial.max_inverse_residual == parallel.max_inverse_residual);
  }
}

TEST_CASE("roundtrip scans match the serial reference bit-for-bit") {
  Rng rng(103);
  const CoefficientField gamma = oracle::random_poly_field(rng, 3, 3);
  const RoundtripResult serial =
      roundtrip_coefficients_serial(gamma, {0.0, 1.0}, 1e-3, 1e-4, 501);
  const RoundtripResult parallel = roundtrip_coefficients(gamma, {0.0, 1.0}, 1e-3, 1e-4, 501);
  CHECK(serial.max_error == parallel.max_error);
}

TEST_CASE("batch solves match the serial reference bit-for-bit") {
  Rng rng(107);
  std::vector<CoefficientField> fields;
  for (int i = 0; i < 8; ++i) fields.push_back(oracle::random_poly_field(rng, 2, 2));
  const auto serial = solve_fundamental_batch_serial(fields, 0.0, {0.0, 1.0}, 1e-2);
  const auto parallel = solve_fundamental_batch(fields, 0.0, {0.0, 1.0}, 1e-2);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i)
    for (double s : {0.3, 1.0})
      CHECK((serial[i].y(s) - parallel[i].y(s)).max_abs() == 0.0);
}

TEST_CASE("batch solve propagates failures") {
  CoefficientField bad;
  bad.dim = 1;
  bad.eval = [](double s) { return Mat(1, 1, {1.0 / (s - 0.5)}); };
  std::vector<CoefficientField> fields{oracle::rotation_field(), bad};
  CHECK_THROWS_AS((void)solve_fundamental_batch(fields, 0.0, {0.0, 1.0}, 1e-2), numeric_error);
}
