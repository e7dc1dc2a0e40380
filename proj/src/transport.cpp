#include "ltp/transport.hpp"

#include <array>
#include <cmath>
#include <exception>
#include <memory>
#include <sstream>
#include <utility>

#include "ltp/random.hpp"

namespace ltp {

namespace {

std::string fmt_param(double s) {
  std::ostringstream os;
  os.precision(17);
  os << s;
  return os.str();
}

// One classical RK4 step of dY/ds = -Gamma(s) Y over [s, s+h].
Mat rk4_step(const CoefficientField& gamma, double s, double h, const Mat& y) {
  const Mat g0 = gamma(s);
  const Mat gm = gamma(s + 0.5 * h);
  const Mat g1 = gamma(s + h);
  const Mat k1 = -1.0 * (g0 * y);
  const Mat k2 = -1.0 * (gm * (y + (0.5 * h) * k1));
  const Mat k3 = -1.0 * (gm * (y + (0.5 * h) * k2));
  const Mat k4 = -1.0 * (g1 * (y + h * k3));
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Mat FundamentalSolution::y(double s) const {
  if (empty()) throw std::invalid_argument("FundamentalSolution: empty");
  const Interval iv{lo_, hi_};
  iv.require(s, "FundamentalSolution");
  s = iv.clamp(s);

  const int nodes = static_cast<int>(grid_.size());
  int idx;
  if (s >= s0_) {
    const int n_right = nodes - 1 - i0_;
    if (n_right == 0) return y_[i0_];
    int k = static_cast<int>((s - s0_) / h_right_);
    if (k > n_right - 1) k = n_right - 1;
    if (k < 0) k = 0;
    idx = i0_ + k;
  } else {
    const int n_left = i0_;
    if (n_left == 0) return y_[0];
    int k = static_cast<int>((s0_ - s) / h_left_);
    if (k > n_left - 1) k = n_left - 1;
    if (k < 0) k = 0;
    idx = i0_ - 1 - k;
  }

  const double a = grid_[idx], b = grid_[idx + 1];
  const double hh = b - a;
  const double th = (s - a) / hh;
  if (th < 1e-14) return y_[idx];
  if (th > 1.0 - 1e-14) return y_[idx + 1];

  // Cubic Hermite with node values and node slopes f_ = -Gamma Y.
  const double t2 = th * th, t3 = t2 * th;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + th;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * y_[idx] + (h10 * hh) * f_[idx] + h01 * y_[idx + 1] + (h11 * hh) * f_[idx + 1];
}

Mat FundamentalSolution::y_derivative(double s) const {
  return -1.0 * (coeffs_(s) * y(s));
}

FundamentalSolution solve_fundamental(const CoefficientField& coeffs, double s0,
                                      Interval interval, double step, std::string frame_id) {
  if (!(step > 0.0)) throw std::invalid_argument("solve_fundamental: step must be positive");
  if (coeffs.dim < 1) throw std::invalid_argument("solve_fundamental: dim must be >= 1");
  interval.require(s0, "solve_fundamental: base parameter");
  s0 = interval.clamp(s0);

  const int n_left = s0 > interval.lo()
                         ? static_cast<int>(std::ceil((s0 - interval.lo()) / step - 1e-12))
                         : 0;
  const int n_right = s0 < interval.hi()
                          ? static_cast<int>(std::ceil((interval.hi() - s0) / step - 1e-12))
                          : 0;

  FundamentalSolution sol;
  sol.coeffs_ = coeffs;
  sol.lo_ = interval.lo();
  sol.hi_ = interval.hi();
  sol.s0_ = s0;
  sol.i0_ = n_left;
  sol.h_left_ = n_left ? (s0 - interval.lo()) / n_left : 0.0;
  sol.h_right_ = n_right ? (interval.hi() - s0) / n_right : 0.0;
  sol.step_ = step;
  sol.frame_ = std::move(frame_id);

  const int nodes = n_left + n_right + 1;
  sol.grid_.resize(nodes);
  sol.y_.resize(nodes);
  sol.f_.resize(nodes);
  for (int k = 0; k <= n_right; ++k) sol.grid_[n_left + k] = s0 + k * sol.h_right_;
  for (int k = 0; k <= n_left; ++k) sol.grid_[n_left - k] = s0 - k * sol.h_left_;
  sol.grid_.front() = interval.lo();
  sol.grid_.back() = interval.hi();

  try {
    sol.y_[n_left] = Mat::identity(coeffs.dim);  // (initial condition, held exactly)
    for (int k = 0; k < n_right; ++k) {
      const double s = sol.grid_[n_left + k];
      sol.y_[n_left + k + 1] = rk4_step(coeffs, s, sol.grid_[n_left + k + 1] - s, sol.y_[n_left + k]);
      if (!sol.y_[n_left + k + 1].finite())
        throw numeric_error("integration produced non-finite values near s=" +
                            fmt_param(sol.grid_[n_left + k + 1]));
    }
    for (int k = 0; k < n_left; ++k) {
      const double s = sol.grid_[n_left - k];
      sol.y_[n_left - k - 1] = rk4_step(coeffs, s, sol.grid_[n_left - k - 1] - s, sol.y_[n_left - k]);
      if (!sol.y_[n_left - k - 1].finite())
        throw numeric_error("integration produced non-finite values near s=" +
                            fmt_param(sol.grid_[n_left - k - 1]));
    }
    for (int i = 0; i < nodes; ++i) {
      sol.f_[i] = -1.0 * (coeffs(sol.grid_[i]) * sol.y_[i]);
      const double cond = condition_estimate(sol.y_[i]);
      if (!(cond <= kConditionLimit))
        throw numeric_error("fundamental matrix ill-conditioned at s=" + fmt_param(sol.grid_[i]));
    }
  } catch (const numeric_error& e) {
    throw numeric_error(std::string("solve_fundamental: integration aborted: ") + e.what());
  }
  return sol;
}

std::vector<FundamentalSolution> solve_fundamental_batch_serial(
    std::span<const CoefficientField> fields, double s0, Interval interval, double step,
    const std::string& frame_id) {
  std::vector<FundamentalSolution> out(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i)
    out[i] = solve_fundamental(fields[i], s0, interval, step, frame_id);
  return out;
}

std::vector<FundamentalSolution> solve_fundamental_batch(
    std::span<const CoefficientField> fields, double s0, Interval interval, double step,
    const std::string& frame_id) {
  std::vector<FundamentalSolution> out(fields.size());
  std::exception_ptr err = nullptr;
  const int n = static_cast<int>(fields.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      out[i] = solve_fundamental(fields[i], s0, interval, step, frame_id);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

RefinedSolution solve_fundamental_refined(const CoefficientField& coeffs, double s0,
                                          Interval interval, double initial_step, double tol,
                                          int max_halvings) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_fundamental_refined: tol must be positive");
  RefinedSolution out;
  double step = initial_step;
  FundamentalSolution coarse = solve_fundamental(coeffs, s0, interval, step);
  for (int halving = 0; halving <= max_halvings; ++halving) {
    const double half = step / 2.0;
    FundamentalSolution fine = solve_fundamental(coeffs, s0, interval, half);
    double estimate = 0.0;
    for (int k = 0; k <= 8; ++k) {  // order-4 pair: ||Y_h - Y_h/2|| / (2^4 - 1)
      const double s = interval.lo() + interval.length() * k / 8.0;
      estimate = std::max(estimate, (coarse.y(s) - fine.y(s)).max_abs() / 15.0);
    }
    out.solution = std::move(fine);
    out.error_estimate = estimate;
    out.accepted_step = half;
    out.halvings = halving;
    if (estimate <= tol) return out;
    coarse = out.solution;
    step = half;
  }
  throw numeric_error("solve_fundamental_refined: tolerance " + std::to_string(tol) +
                      " not reached after " + std::to_string(max_halvings) + " halvings");
}

TransportMatrix transport_matrix(const FundamentalSolution& sol, double t, double s) {
  const Mat h = sol.y(t) * inverse(sol.y(s));
  return make_transport_matrix(h, t, s, sol.frame_id());
}

FiberVector transport_vector(const FundamentalSolution& sol, double s, double t,
                             const FiberVector& u) {
  const double tol = 1e-12 * std::max(1.0, std::fabs(s));
  if (std::fabs(u.param - s) > tol)
    throw std::invalid_argument("transport_vector: vector parameter does not match s");
  if (u.frame_id != sol.frame_id())
    throw std::invalid_argument("transport_vector: frame mismatch (" + u.frame_id + " vs " +
                                sol.frame_id() + ")");
  if (static_cast<int>(u.components.size()) != sol.dim())
    throw std::invalid_argument("transport_vector: component count mismatch");
  const TransportMatrix h = transport_matrix(sol, t, s);
  return FiberVector{h.matrix.apply(u.components), u.frame_id, t};
}

TransportMatrix matrix_from_frames(const FrameFamily& factor, double t, double s,
                                   std::string frame_id) {
  factor.interval.require(t, "matrix_from_frames");
  factor.interval.require(s, "matrix_from_frames");
  const Mat h = solve_left(factor.value(t), factor.value(s));
  return make_transport_matrix(h, t, s, std::move(frame_id));
}

CoefficientField coefficients_from_frames(const FrameFamily& factor) {
  CoefficientField g;
  g.dim = factor.dim;
  g.smoothness = factor.has_derivative() ? Smoothness::analytic : Smoothness::c1;
  FrameFamily f = factor;
  g.eval = [f](double s) { return solve_left(f.value(s), f.dvalue(s)); };
  return g;
}

TransportSource as_source(FundamentalSolution sol) {
  auto sp = std::make_shared<const FundamentalSolution>(std::move(sol));
  TransportSource src;
  src.dim = sp->dim();
  src.interval = Interval{sp->grid().front(), sp->grid().back()};
  src.frame_id = sp->frame_id();
  src.eval_to_from = [sp](double t, double s) { return transport_matrix(*sp, t, s).matrix; };
  return src;
}

TransportSource frames_source(FrameFamily factor, std::string frame_id) {
  TransportSource src;
  src.dim = factor.dim;
  src.interval = factor.interval;
  src.frame_id = std::move(frame_id);
  auto f = std::make_shared<const FrameFamily>(std::move(factor));
  src.eval_to_from = [f](double t, double s) { return solve_left(f->value(t), f->value(s)); };
  return src;
}

TransportSource in_frame(const TransportSource& src, const FrameChange& a) {
  if (src.frame_id != a.from_frame)
    throw std::invalid_argument("in_frame: source frame " + src.frame_id +
                                " does not match change origin " + a.from_frame);
  TransportSource out;
  out.dim = src.dim;
  out.interval = src.interval;
  out.frame_id = a.to_frame;
  auto base = src.eval_to_from;
  FrameChange change = a;
  out.eval_to_from = [base, change](double t, double s) {
    return inverse(change.value(t)) * base(t, s) * change.value(s);
  };
  return out;
}

namespace {

struct Triple {
  double r, s, t;
};

std::vector<Triple> sample_triples(const Interval& iv, int samples, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Triple> triples(samples);
  for (Triple& tr : triples) {
    tr.r = rng.uniform(iv.lo(), iv.hi());
    tr.s = rng.uniform(iv.lo(), iv.hi());
    tr.t = rng.uniform(iv.lo(), iv.hi());
  }
  return triples;
}

// Shared body; the only difference between the serial and OpenMP kernels is
// the pragma, and max-reductions are exact regardless of evaluation order.
template <bool Parallel>
AxiomReport axioms_impl(const TransportSource& src, int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("check_axioms: samples must be >= 1");
  if (!src.eval_to_from) throw std::invalid_argument("check_axioms: source has no matrix map");
  const std::vector<Triple> triples = sample_triples(src.interval, samples, seed);
  const Mat eye = Mat::identity(src.dim);

  double comp = 0.0, ident = 0.0, inv = 0.0;
#pragma omp parallel for schedule(static) reduction(max : comp, ident, inv) if (Parallel)
  for (int i = 0; i < samples; ++i) {
    const Triple& tr = triples[i];
    const Mat h_rt = src.h(tr.r, tr.t);
    const Mat h_ts = src.h(tr.t, tr.s);
    const Mat h_rs = src.h(tr.r, tr.s);
    const Mat h_ss = src.h(tr.s, tr.s);
    const Mat h_st = src.h(tr.s, tr.t);
    comp = std::max(comp, (h_rt * h_ts - h_rs).max_abs());
    ident = std::max(ident, (h_ss - eye).max_abs());
    inv = std::max(inv, (h_ts * h_st - eye).max_abs());
  }

  AxiomReport rep;
  rep.max_composition_residual = comp;
  rep.max_identity_residual = ident;
  rep.max_inverse_residual = inv;
  rep.samples = samples;
  rep.seed = seed;
  return rep;
}

}  // namespace

AxiomReport check_axioms(const TransportSource& src, int samples, std::uint64_t seed) {
  return axioms_impl<true>(src, samples, seed);
}

AxiomReport check_axioms_serial(const TransportSource& src, int samples, std::uint64_t seed) {
  return axioms_impl<false>(src, samples, seed);
}

GaugeCheck gauge_equivalent(const FrameFamily& f1, const FrameFamily& f2, int samples) {
  if (f1.dim != f2.dim) throw std::invalid_argument("gauge_equivalent: dimension mismatch");
  if (std::fabs(f1.interval.lo() - f2.interval.lo()) > 1e-12 ||
      std::fabs(f1.interval.hi() - f2.interval.hi()) > 1e-12)
    throw std::invalid_argument("gauge_equivalent: interval mismatch");
  if (samples < 1) throw std::invalid_argument("gauge_equivalent: samples must be >= 1");

  GaugeCheck out;
  const Interval& iv = f1.interval;
  const double span = iv.length();
  for (int k = 0; k < samples; ++k) {
    const double s = samples == 1 ? iv.lo() : iv.lo() + span * k / (samples - 1);
    const Mat d = solve_right(f2.value(s), f1.value(s));
    if (k == 0) {
      out.witness = d;
    } else {
      out.max_deviation = std::max(out.max_deviation, (d - out.witness).max_abs());
    }
  }
  out.equivalent = out.max_deviation <= kConstancyTol * std::max(1.0, out.witness.max_abs());
  return out;
}

}  // namespace ltp
