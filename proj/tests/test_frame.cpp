#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ltp/bundle.hpp"
#include "ltp/derivation.hpp"
#include "ltp/frame.hpp"
#include "support/oracles.hpp"

using namespace ltp;

namespace {

FrameChange identity_change(const Interval& iv) {
  return make_frame_change(
      iv, [](double) { return Mat::identity(2); }, [](double) { return Mat(2, 2); }, "e", "e'");
}

}  // namespace

TEST_CASE("change_frame_matrix implements the two-point transformation") {
  const Interval iv{0.0, 1.0};

  SUBCASE("identity change leaves the matrix alone") {
    const TransportMatrix h =
        make_transport_matrix(Mat(2, 2, {0.0, 1.0, -1.0, 0.0}), 0.8, 0.1, "e");
    const TransportMatrix hp = change_frame_matrix(h, identity_change(iv));
    CHECK((hp.matrix - h.matrix).max_abs() == 0.0);
    CHECK(hp.frame_id == "e'");
  }

  SUBCASE("constant changes preserve the identity matrix") {
    const Mat r(2, 2, {2.0, 1.0, 0.0, 1.0});
    const FrameChange a = make_frame_change(
        iv, [r](double) { return r; }, [](double) { return Mat(2, 2); }, "e", "e'");
    const TransportMatrix h = make_transport_matrix(Mat::identity(2), 0.9, 0.2, "e");
    CHECK((change_frame_matrix(h, a).matrix - Mat::identity(2)).max_abs() <= 1e-15);
  }

  SUBCASE("frozen example: diagonal stretch") {
    // H = 1 with to=0, from=1 and A(s) = diag(1+s, 1): A(0)^-1 * 1 * A(1)
    const FrameChange a = make_frame_change(
        iv, [](double s) { return Mat(2, 2, {1.0 + s, 0.0, 0.0, 1.0}); },
        [](double) { return Mat(2, 2, {1.0, 0.0, 0.0, 0.0}); }, "e", "e'");
    const TransportMatrix h = make_transport_matrix(Mat::identity(2), 0.0, 1.0, "e");
    const TransportMatrix hp = change_frame_matrix(h, a);
    CHECK((hp.matrix - Mat(2, 2, {2.0, 0.0, 0.0, 1.0})).max_abs() <= 1e-15);
  }

  SUBCASE("mismatched frames are rejected") {
    const TransportMatrix h = make_transport_matrix(Mat::identity(2), 0.8, 0.1, "other");
    CHECK_THROWS_AS((void)change_frame_matrix(h, identity_change(iv)), std::invalid_argument);
  }

  SUBCASE("round trip through the inverse change restores the matrix") {
    Rng rng(23);
    const FrameChange a = oracle::random_polynomial_change(rng, 2, iv);
    const TransportMatrix h =
        make_transport_matrix(Mat(2, 2, {0.9, 0.2, -0.3, 1.1}), 0.75, 0.25, "e");
    const TransportMatrix back =
        change_frame_matrix(change_frame_matrix(h, a), frame_change_inverse(a));
    CHECK((back.matrix - h.matrix).max_abs() <= 1e-12);
  }
}

TEST_CASE("change_frame_coeffs adds the logarithmic derivative") {
  const Interval iv{0.0, 1.0};

  SUBCASE("constant change of a zero field stays zero") {
    CoefficientField zero;
    zero.dim = 2;
    zero.eval = [](double) { return Mat(2, 2); };
    const Mat r(2, 2, {0.0, 1.0, -1.0, 2.0});
    const FrameChange a = make_frame_change(
        iv, [r](double) { return r; }, [](double) { return Mat(2, 2); }, "e", "e'");
    CHECK(change_frame_coeffs(zero, a)(0.3).max_abs() <= 1e-15);
  }

  SUBCASE("constant change acts by similarity") {
    const CoefficientField gamma = oracle::rotation_field();
    const Mat r(2, 2, {2.0, 1.0, 1.0, 1.0});
    const FrameChange a = make_frame_change(
        iv, [r](double) { return r; }, [](double) { return Mat(2, 2); }, "e", "e'");
    const Mat expected = inverse(r) * gamma(0.2) * r;
    CHECK((change_frame_coeffs(gamma, a)(0.2) - expected).max_abs() <= 1e-14);
  }

  SUBCASE("scalar exponential produces the unit coefficient") {
    CoefficientField zero;
    zero.dim = 1;
    zero.eval = [](double) { return Mat(1, 1); };
    const FrameChange a = make_frame_change(
        iv, [](double s) { return Mat(1, 1, {std::exp(s)}); },
        [](double s) { return Mat(1, 1, {std::exp(s)}); }, "e", "e'");
    const CoefficientField prime = change_frame_coeffs(zero, a);
    for (double s : {0.1, 0.5, 0.9}) CHECK(std::fabs(prime(s)(0, 0) - 1.0) <= 1e-12);
  }

  SUBCASE("a finite-difference derivative is used when none is supplied") {
    CoefficientField zero;
    zero.dim = 1;
    zero.eval = [](double) { return Mat(1, 1); };
    FrameChange a;
    a.interval = iv;
    a.eval = [](double s) { return Mat(1, 1, {std::exp(s)}); };
    const CoefficientField prime = change_frame_coeffs(zero, a);
    CHECK(std::fabs(prime(0.5)(0, 0) - 1.0) <= 1e-6);
  }
}

TEST_CASE("frame-change cocycle for matrices and coefficients") {
  const Interval iv{0.0, 1.0};
  Rng rng(31);
  const FrameChange a = oracle::random_polynomial_change(rng, 2, iv, "e", "e'");
  const FrameChange b = oracle::random_polynomial_change(rng, 2, iv, "e'", "e''");
  const FrameChange ab = frame_change_compose(a, b);

  const TransportMatrix h =
      make_transport_matrix(Mat(2, 2, {1.1, 0.4, -0.2, 0.9}), 0.8, 0.3, "e");
  const Mat two_steps = change_frame_matrix(change_frame_matrix(h, a), b).matrix;
  const Mat one_step = change_frame_matrix(h, ab).matrix;
  CHECK((two_steps - one_step).max_abs() <= 1e-10);

  const CoefficientField gamma = oracle::rotation_field();
  const CoefficientField g2 = change_frame_coeffs(change_frame_coeffs(gamma, a), b);
  const CoefficientField g1 = change_frame_coeffs(gamma, ab);
  for (double s : {0.1, 0.45, 0.95}) CHECK((g2(s) - g1(s)).max_abs() <= 1e-10);
}

TEST_CASE("reconstruct-then-transform commutes with transform-then-reconstruct") {
  const Interval iv{0.0, 1.0};
  Rng rng(37);
  const CoefficientField gamma = oracle::rotation_field();
  const FundamentalSolution sol = solve_fundamental(gamma, 0.0, iv, 1e-3);

  for (int trial = 0; trial < 3; ++trial) {
    const FrameChange a = oracle::random_polynomial_change(rng, 2, iv);
    const CoefficientField gamma_prime = change_frame_coeffs(gamma, a);
    const FundamentalSolution sol_prime = solve_fundamental(gamma_prime, 0.0, iv, 1e-3);
    for (double t : {0.2, 0.9})
      for (double s : {0.05, 0.6}) {
        const Mat via_coeffs = transport_matrix(sol_prime, t, s).matrix;
        const Mat via_matrix =
            change_frame_matrix(transport_matrix(sol, t, s), a).matrix;
        CHECK((via_coeffs - via_matrix).max_abs() <= 5e-7);
      }
  }
}

TEST_CASE("special frames make the transport matrix unit") {
  const Interval iv{0.0, 1.0};

  SUBCASE("euclidean transport with identity anchor") {
    CoefficientField zero;
    zero.dim = 2;
    zero.eval = [](double) { return Mat(2, 2); };
    const FundamentalSolution sol = solve_fundamental(zero, 0.0, iv, 1e-3);
    const SpecialFrame sf = special_frame(sol, 0.0, Mat::identity(2));
    for (double s : {0.0, 0.3, 1.0})
      CHECK((sf.frame_matrices(s) - Mat::identity(2)).max_abs() <= 1e-14);
  }

  SUBCASE("rotation: frames are the fundamental solution columns") {
    const FundamentalSolution sol =
        solve_fundamental(oracle::rotation_field(), 0.0, iv, 1e-3);
    const SpecialFrame sf = special_frame(sol, 0.0, Mat::identity(2));
    for (double s : {0.2, 0.77, 1.0})
      CHECK((sf.frame_matrices(s) - sol.y(s)).max_abs() <= 1e-12);

    const EuclideanCheck eu =
        is_euclidean_over_path(as_source(sol), sf.basis_family(), 50, 1e-8, 2024);
    CHECK(eu.euclidean);
    CHECK(eu.max_residual <= 1e-8);
    CHECK(sf.crosscheck_residual <= 1e-9);
  }

  SUBCASE("coefficients vanish in the special frame") {
    const FundamentalSolution sol =
        solve_fundamental(oracle::rotation_field(), 0.0, iv, 1e-3);
    const SpecialFrame sf = special_frame(sol, 0.0, Mat::identity(2));
    const CoefficientField prime =
        change_frame_coeffs(sol.coefficients(), sf.as_frame_change());
    for (double s : {0.1, 0.5, 0.9}) CHECK(prime(s).max_abs() <= 1e-6);

    const TransportSource conj = in_frame(as_source(sol), sf.as_frame_change());
    for (double s : {0.2, 0.6}) {
      CHECK(coefficients_from_matrix(conj, s, 1e-4).max_abs() <= 1e-6);
    }
  }

  SUBCASE("two anchors are related by a constant matrix") {
    const FundamentalSolution sol =
        solve_fundamental(oracle::rotation_field(), 0.0, iv, 1e-3);
    const Mat b1 = Mat(2, 2, {1.0, 0.2, 0.0, 1.0});
    const Mat b2 = Mat(2, 2, {0.8, 0.0, 0.3, 1.2});
    const SpecialFrame f1 = special_frame(sol, 0.25, b1);
    const SpecialFrame f2 = special_frame(sol, 0.25, b2);
    const Mat link = solve_left(b1, b2);  // B1^-1 B2
    for (double s : {0.0, 0.5, 1.0})
      CHECK((f1.frame_matrices(s) * link - f2.frame_matrices(s)).max_abs() <= 1e-9);
  }

  SUBCASE("singular anchors are rejected") {
    const FundamentalSolution sol =
        solve_fundamental(oracle::rotation_field(), 0.0, iv, 1e-3);
    CHECK_THROWS_AS((void)special_frame(sol, 0.0, Mat(2, 2)), numeric_error);
  }
}

TEST_CASE("euclidean predicate over a path") {
  const Interval iv{0.0, std::numbers::pi};
  const FundamentalSolution sol = solve_fundamental(oracle::rotation_field(), 0.0, iv, 1e-3);
  const TransportSource src = as_source(sol);

  SUBCASE("euclidean transport in its generating basis") {
    FrameFamily id{2, iv, [](double) { return Mat::identity(2); }, nullptr};
    const EuclideanCheck eu = is_euclidean_over_path(euclidean_transport(2, iv), id, 100);
    CHECK(eu.euclidean);
    CHECK(eu.max_residual == 0.0);
  }

  SUBCASE("rotation is not euclidean in the original frame") {
    FrameFamily id{2, iv, [](double) { return Mat::identity(2); }, nullptr};
    const EuclideanCheck eu = is_euclidean_over_path(src, id, 200);
    CHECK_FALSE(eu.euclidean);
    CHECK(eu.max_residual > 1.0);  // pairs near a half turn reach ~2
  }

  SUBCASE("rotation is euclidean in its special frame") {
    const SpecialFrame sf = special_frame(sol, 0.0, Mat::identity(2));
    const EuclideanCheck eu = is_euclidean_over_path(src, sf.basis_family(), 100);
    CHECK(eu.euclidean);
    CHECK(eu.max_residual <= 1e-8);
  }
}

TEST_CASE("same generated euclidean transport") {
  const Interval iv{0.0, 1.0};
  FrameFamily f1;
  f1.dim = 2;
  f1.interval = iv;
  f1.eval = [](double s) { return Mat(2, 2, {1.0 + 0.5 * s, 0.1 * s, 0.0, 1.0}); };

  CHECK(same_euclidean_generator(f1, f1, 20));

  FrameFamily f2 = f1;
  auto base = f1.eval;
  const Mat c(2, 2, {2.0, 0.3, -0.4, 1.0});
  f2.eval = [base, c](double s) { return c * base(s); };
  CHECK(same_euclidean_generator(f1, f2, 20));

  FrameFamily f3 = f1;
  f3.eval = [base](double s) { return (1.0 + s * s) * base(s); };
  CHECK_FALSE(same_euclidean_generator(f1, f3, 20));
}
