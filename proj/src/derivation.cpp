#include "ltp/derivation.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <utility>

#include "ltp/random.hpp"

namespace ltp {

FiberVector derive_section(const DerivationOperator& d, const Section& sigma, double s) {
  if (sigma.frame_id != d.frame_id)
    throw std::invalid_argument("derive_section: frame mismatch (" + sigma.frame_id + " vs " +
                                d.frame_id + ")");
  if (sigma.dim != d.coefficients.dim)
    throw std::invalid_argument("derive_section: dimension mismatch");
  sigma.interval.require(s, "derive_section");
  const Vec ds = sigma.dvalue(s);
  const Vec gs = d.coefficients(s).apply(sigma.value(s));
  return FiberVector{vec_add(ds, gs), d.frame_id, s};
}

Section derive(const DerivationOperator& d, const Section& sigma) {
  Section out;
  out.dim = sigma.dim;
  out.interval = sigma.interval;
  out.frame_id = d.frame_id;
  out.smoothness = Smoothness::c0;
  DerivationOperator dd = d;
  Section sg = sigma;
  out.components = [dd, sg](double s) { return derive_section(dd, sg, s).components; };
  return out;
}

FiberVector derive_via_limit(const FundamentalSolution& sol, const Section& sigma, double s,
                             double eps) {
  if (eps == 0.0) throw std::invalid_argument("derive_via_limit: eps must be nonzero");
  const Interval iv = sol.interval();
  iv.require(s, "derive_via_limit");
  iv.require(s + eps, "derive_via_limit: s+eps");
  if (sigma.frame_id != sol.frame_id())
    throw std::invalid_argument("derive_via_limit: frame mismatch");
  const Mat h = transport_matrix(sol, s, s + eps).matrix;
  const Vec moved = h.apply(sigma.value(s + eps));
  return FiberVector{vec_scale(1.0 / eps, vec_sub(moved, sigma.value(s))), sigma.frame_id, s};
}

Mat coefficients_from_matrix(const TransportSource& src, double s, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("coefficients_from_matrix: h must be positive");
  src.interval.require(s - h, "coefficients_from_matrix");
  src.interval.require(s + h, "coefficients_from_matrix");
  return (1.0 / (2.0 * h)) * (src.h(s, s + h) - src.h(s, s - h));
}

Mat coefficients_from_matrix_alt(const TransportSource& src, double s, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("coefficients_from_matrix: h must be positive");
  src.interval.require(s - h, "coefficients_from_matrix");
  src.interval.require(s + h, "coefficients_from_matrix");
  return (-1.0 / (2.0 * h)) * (src.h(s + h, s) - src.h(s - h, s));
}

SectionMap derivation_map(const DerivationOperator& d) {
  DerivationOperator dd = d;
  return [dd](const Section& sigma) { return derive(dd, sigma); };
}

namespace {

Poly random_poly(Rng& rng, int degree) {
  Poly p;
  p.c.resize(degree + 1);
  for (double& c : p.c) c = rng.uniform(-1.0, 1.0);
  return p;
}

Section random_polynomial_section(Rng& rng, int dim, const Interval& iv,
                                  const std::string& frame) {
  std::vector<Poly> comps;
  comps.reserve(dim);
  for (int i = 0; i < dim; ++i) comps.push_back(random_poly(rng, 2));
  return polynomial_section(iv, std::move(comps), frame);
}

}  // namespace

CoefficientField coefficients_from_derivation(const SectionMap& d, int dim, Interval interval,
                                              std::string frame_id, std::uint64_t seed) {
  if (!d) throw std::invalid_argument("coefficients_from_derivation: missing map");
  if (dim < 1) throw std::invalid_argument("coefficients_from_derivation: dim must be >= 1");

  // Linearity gate: a derivation is R-linear, so probe random combinations.
  Rng rng(seed);
  for (int probe = 0; probe < 10; ++probe) {
    const Section s1 = random_polynomial_section(rng, dim, interval, frame_id);
    const Section s2 = random_polynomial_section(rng, dim, interval, frame_id);
    const double l1 = rng.uniform(-2.0, 2.0);
    const double l2 = rng.uniform(-2.0, 2.0);
    const Section combined = combine_sections(l1, s1, l2, s2);
    const Section d_comb = d(combined);
    const Section d1 = d(s1);
    const Section d2 = d(s2);
    for (int k = 0; k <= 4; ++k) {
      const double s = interval.lo() + interval.length() * (0.1 + 0.2 * k);
      const Vec lhs = d_comb.value(s);
      const Vec rhs = vec_combine(l1, d1.value(s), l2, d2.value(s));
      const double dev = vec_max_abs(vec_sub(lhs, rhs));
      const double scale = std::max(1.0, std::max(vec_max_abs(lhs), vec_max_abs(rhs)));
      if (dev > 1e-9 * scale) {
        std::ostringstream os;
        os << "coefficients_from_derivation: map is not linear (residual " << dev
           << " at s=" << s << ", probe " << probe << ")";
        throw std::invalid_argument(os.str());
      }
    }
  }

  // Column j of Gamma(s) is D e_j at s, for the constant basis sections.
  auto images = std::make_shared<std::vector<Section>>();
  images->reserve(dim);
  for (int j = 0; j < dim; ++j) {
    Section ej;
    ej.dim = dim;
    ej.interval = interval;
    ej.frame_id = frame_id;
    ej.smoothness = Smoothness::analytic;
    ej.components = [dim, j](double) {
      Vec v(dim, 0.0);
      v[j] = 1.0;
      return v;
    };
    ej.derivative = [dim](double) { return Vec(dim, 0.0); };
    images->push_back(d(ej));
  }

  CoefficientField out;
  out.dim = dim;
  out.smoothness = Smoothness::c0;
  out.eval = [images, dim](double s) {
    Mat g(dim, dim);
    for (int j = 0; j < dim; ++j) {
      const Vec col = (*images)[j].value(s);
      for (int i = 0; i < dim; ++i) g(i, j) = col[i];
    }
    return g;
  };
  return out;
}

ScalarFunction scalar_function(const Poly& p) {
  const Poly dp = p.derivative();
  return ScalarFunction{[p](double s) { return p(s); }, [dp](double s) { return dp(s); }};
}

double leibniz_residual(const SectionMap& d, const ScalarFunction& f, const Section& sigma,
                        int samples) {
  if (samples < 1) throw std::invalid_argument("leibniz_residual: samples must be >= 1");
  if (!f.f || !f.df) throw std::invalid_argument("leibniz_residual: f and df required");

  // Product section f*sigma, with the product-rule derivative when sigma has
  // an analytic one.
  Section prod;
  prod.dim = sigma.dim;
  prod.interval = sigma.interval;
  prod.frame_id = sigma.frame_id;
  prod.smoothness = sigma.smoothness;
  Section sg = sigma;
  ScalarFunction ff = f;
  prod.components = [ff, sg](double s) { return vec_scale(ff.f(s), sg.value(s)); };
  if (sigma.derivative) {
    prod.derivative = [ff, sg](double s) {
      return vec_combine(ff.df(s), sg.value(s), ff.f(s), sg.dvalue(s));
    };
  }

  const Section d_prod = d(prod);
  const Section d_sigma = d(sg);
  const Interval& iv = sigma.interval;
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double s = samples == 1 ? iv.midpoint()
                                  : iv.lo() + iv.length() * k / (samples - 1);
    const Vec lhs = d_prod.value(s);
    const Vec rhs = vec_combine(ff.df(s), sg.value(s), ff.f(s), d_sigma.value(s));
    worst = std::max(worst, vec_max_abs(vec_sub(lhs, rhs)));
  }
  return worst;
}

Section polynomial_section(Interval interval, std::vector<Poly> components,
                           std::string frame_id) {
  const int dim = static_cast<int>(components.size());
  if (dim < 1) throw std::invalid_argument("polynomial_section: need at least one component");
  std::vector<Poly> derivs;
  derivs.reserve(dim);
  for (const Poly& p : components) derivs.push_back(p.derivative());

  Section out;
  out.dim = dim;
  out.interval = interval;
  out.frame_id = std::move(frame_id);
  out.smoothness = Smoothness::analytic;
  out.components = [components, dim](double s) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = components[i](s);
    return v;
  };
  out.derivative = [derivs, dim](double s) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = derivs[i](s);
    return v;
  };
  return out;
}

Section combine_sections(double a, const Section& x, double b, const Section& y) {
  if (x.dim != y.dim) throw std::invalid_argument("combine_sections: dimension mismatch");
  if (x.frame_id != y.frame_id) throw std::invalid_argument("combine_sections: frame mismatch");
  Section out;
  out.dim = x.dim;
  out.interval = x.interval;
  out.frame_id = x.frame_id;
  out.smoothness = std::min(x.smoothness, y.smoothness);
  Section sx = x, sy = y;
  out.components = [a, b, sx, sy](double s) {
    return vec_combine(a, sx.value(s), b, sy.value(s));
  };
  if (x.derivative && y.derivative) {
    out.derivative = [a, b, sx, sy](double s) {
      return vec_combine(a, sx.dvalue(s), b, sy.dvalue(s));
    };
  }
  return out;
}

namespace {

template <bool Parallel>
RoundtripResult roundtrip_impl(const CoefficientField& gamma, Interval interval, double step,
                               double h, int samples) {
  if (samples < 2) throw std::invalid_argument("roundtrip_coefficients: samples must be >= 2");
  if (!(h > 0.0) || 2.0 * h >= interval.length())
    throw std::invalid_argument("roundtrip_coefficients: h must fit inside the interval");

  const FundamentalSolution sol =
      solve_fundamental(gamma, interval.lo(), interval, step);
  const TransportSource src = as_source(sol);

  const double a = interval.lo() + h, b = interval.hi() - h;
  double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst) if (Parallel)
  for (int k = 0; k < samples; ++k) {
    const double s = a + (b - a) * k / (samples - 1);
    const Mat extracted = coefficients_from_matrix(src, s, h);
    worst = std::max(worst, (extracted - gamma(s)).max_abs());
  }
  return RoundtripResult{worst, samples};
}

}  // namespace

RoundtripResult roundtrip_coefficients(const CoefficientField& gamma, Interval interval,
                                       double step, double h, int samples) {
  return roundtrip_impl<true>(gamma, interval, step, h, samples);
}

RoundtripResult roundtrip_coefficients_serial(const CoefficientField& gamma, Interval interval,
                                              double step, double h, int samples) {
  return roundtrip_impl<false>(gamma, interval, step, h, samples);
}

}  // namespace ltp
