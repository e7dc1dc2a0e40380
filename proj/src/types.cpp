#include "ltp/types.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace ltp {

namespace {

std::string fmt_param(double s) {
  std::ostringstream os;
  os.precision(17);
  os << s;
  return os.str();
}

}  // namespace

double Interval::slack() const {
  const double scale = std::max({1.0, std::fabs(lo_), std::fabs(hi_)});
  return 1e-12 * scale;
}

void Interval::require(double s, const char* what) const {
  if (!contains(s)) {
    std::ostringstream os;
    os << what << ": s=" << fmt_param(s) << " outside [" << fmt_param(lo_) << ", "
       << fmt_param(hi_) << "]";
    throw std::invalid_argument(os.str());
  }
}

Mat CoefficientField::operator()(double s) const {
  if (!eval) throw std::invalid_argument("CoefficientField: missing eval");
  Mat m = eval(s);
  if (m.rows() != dim || m.cols() != dim)
    throw numeric_error("CoefficientField: wrong shape at s=" + fmt_param(s));
  if (!m.finite())
    throw numeric_error("CoefficientField: non-finite entries at s=" + fmt_param(s));
  return m;
}

TransportMatrix make_transport_matrix(Mat m, double to_param, double from_param,
                                      std::string frame_id, double cond_limit) {
  if (!m.square()) throw std::invalid_argument("TransportMatrix: matrix must be square");
  if (!m.finite()) throw numeric_error("TransportMatrix: non-finite entries");
  const double cond = condition_estimate(m);
  if (!(cond <= cond_limit))
    throw numeric_error("TransportMatrix: condition estimate " + std::to_string(cond) +
                        " exceeds limit; transports must be invertible");
  return TransportMatrix{std::move(m), to_param, from_param, std::move(frame_id)};
}

Mat FrameFamily::value(double s) const {
  if (!eval) throw std::invalid_argument("FrameFamily: missing eval");
  Mat m = eval(s);
  if (m.rows() != dim || m.cols() != dim)
    throw numeric_error("FrameFamily: wrong shape at s=" + fmt_param(s));
  if (!m.finite()) throw numeric_error("FrameFamily: non-finite entries at s=" + fmt_param(s));
  const double cond = condition_estimate(m);
  if (!(cond <= kConditionLimit))
    throw numeric_error("FrameFamily: singular frame matrix at s=" + fmt_param(s));
  return m;
}

Mat FrameFamily::dvalue(double s) const {
  if (derivative) return derivative(s);
  return detail::fd_mat(eval, s, interval.length() * 1e-6, interval);
}

Vec Section::value(double s) const {
  if (!components) throw std::invalid_argument("Section: missing components");
  Vec v = components(s);
  if (static_cast<int>(v.size()) != dim)
    throw numeric_error("Section: wrong component count at s=" + fmt_param(s));
  if (!vec_finite(v)) throw numeric_error("Section: non-finite components at s=" + fmt_param(s));
  return v;
}

Vec Section::dvalue(double s) const {
  if (derivative) return derivative(s);
  return detail::fd_vec(components, s, interval.length() * 1e-6, interval);
}

Section section_from_grid(Interval interval, const std::vector<Vec>& values,
                          std::string frame_id) {
  const int npts = static_cast<int>(values.size());
  if (npts < 2) throw std::invalid_argument("section_from_grid: need at least two samples");
  const int dim = static_cast<int>(values[0].size());
  for (const Vec& v : values)
    if (static_cast<int>(v.size()) != dim)
      throw std::invalid_argument("section_from_grid: ragged samples");

  const double h = interval.length() / (npts - 1);
  // Natural cubic spline second derivatives per component (Thomas algorithm).
  std::vector<Vec> m(npts, Vec(dim, 0.0));
  if (npts > 2) {
    const int n = npts - 2;
    for (int c = 0; c < dim; ++c) {
      std::vector<double> diag(n, 2.0 * h / 3.0), rhs(n);
      for (int k = 0; k < n; ++k)
        rhs[k] = (values[k + 2][c] - 2.0 * values[k + 1][c] + values[k][c]) / h;
      const double off = h / 6.0;
      for (int k = 1; k < n; ++k) {
        const double w = off / diag[k - 1];
        diag[k] -= w * off;
        rhs[k] -= w * rhs[k - 1];
      }
      m[n][c] = rhs[n - 1] / diag[n - 1];
      for (int k = n - 2; k >= 0; --k) m[k + 1][c] = (rhs[k] - off * m[k + 2][c]) / diag[k];
    }
  }

  const double lo = interval.lo();
  auto segment = [npts, h, lo](double s) {
    int k = static_cast<int>((s - lo) / h);
    if (k < 0) k = 0;
    if (k > npts - 2) k = npts - 2;
    return k;
  };

  Section out;
  out.dim = dim;
  out.interval = interval;
  out.frame_id = std::move(frame_id);
  out.smoothness = Smoothness::spline;
  out.components = [values, m, interval, segment, h, lo, dim](double s) {
    interval.require(s, "Section (spline)");
    s = interval.clamp(s);
    const int k = segment(s);
    const double xa = lo + k * h, xb = xa + h;
    Vec v(dim);
    for (int c = 0; c < dim; ++c) {
      const double da = xb - s, db = s - xa;
      v[c] = m[k][c] * da * da * da / (6.0 * h) + m[k + 1][c] * db * db * db / (6.0 * h) +
             (values[k][c] / h - m[k][c] * h / 6.0) * da +
             (values[k + 1][c] / h - m[k + 1][c] * h / 6.0) * db;
    }
    return v;
  };
  out.derivative = [values, m, interval, segment, h, lo, dim](double s) {
    interval.require(s, "Section (spline derivative)");
    s = interval.clamp(s);
    const int k = segment(s);
    const double xa = lo + k * h, xb = xa + h;
    Vec v(dim);
    for (int c = 0; c < dim; ++c) {
      const double da = xb - s, db = s - xa;
      v[c] = -m[k][c] * da * da / (2.0 * h) + m[k + 1][c] * db * db / (2.0 * h) -
             (values[k][c] / h - m[k][c] * h / 6.0) + (values[k + 1][c] / h - m[k + 1][c] * h / 6.0);
    }
    return v;
  };
  return out;
}

Mat FrameChange::value(double s) const {
  if (!eval) throw std::invalid_argument("FrameChange: missing eval");
  Mat m = eval(s);
  if (!m.square()) throw numeric_error("FrameChange: matrix must be square");
  if (!m.finite()) throw numeric_error("FrameChange: non-finite entries at s=" + fmt_param(s));
  const double cond = condition_estimate(m);
  if (!(cond <= kConditionLimit))
    throw numeric_error("FrameChange: singular at s=" + fmt_param(s));
  return m;
}

Mat FrameChange::derivative(double s) const {
  if (derivative_fn) return derivative_fn(s);
  return detail::fd_mat(eval, s, interval.length() * 1e-6, interval);
}

FrameChange make_frame_change(Interval interval, std::function<Mat(double)> eval,
                              std::function<Mat(double)> derivative, std::string from_frame,
                              std::string to_frame) {
  FrameChange a;
  a.interval = interval;
  a.eval = std::move(eval);
  a.derivative_fn = std::move(derivative);
  a.from_frame = std::move(from_frame);
  a.to_frame = std::move(to_frame);
  const double h = interval.length() * 1e-6;
  for (int k = 0; k <= 4; ++k) {
    const double s = interval.lo() + interval.length() * (0.1 + 0.2 * k);
    a.value(s);  // invertibility probe
    if (a.derivative_fn) {
      Mat fd = detail::fd_mat(a.eval, s, h, interval);
      const double dev = (a.derivative_fn(s) - fd).max_abs();
      if (dev > 1e-4 * std::max(1.0, fd.max_abs()) + 1e-8)
        throw std::invalid_argument(
            "FrameChange: supplied derivative inconsistent with eval at s=" + fmt_param(s));
    }
  }
  return a;
}

FrameChange frame_change_inverse(const FrameChange& a) {
  FrameChange r;
  r.interval = a.interval;
  r.from_frame = a.to_frame;
  r.to_frame = a.from_frame;
  auto eval = a.eval;
  r.eval = [eval](double s) { return inverse(eval(s)); };
  if (a.derivative_fn) {
    auto deriv = a.derivative_fn;
    r.derivative_fn = [eval, deriv](double s) {
      Mat inv = inverse(eval(s));
      return -1.0 * (inv * deriv(s) * inv);
    };
  }
  return r;
}

FrameChange frame_change_compose(const FrameChange& a, const FrameChange& b) {
  if (a.to_frame != b.from_frame)
    throw std::invalid_argument("frame_change_compose: frame tags do not chain (" + a.to_frame +
                                " vs " + b.from_frame + ")");
  FrameChange r;
  r.interval = a.interval;
  r.from_frame = a.from_frame;
  r.to_frame = b.to_frame;
  auto ea = a.eval, eb = b.eval;
  r.eval = [ea, eb](double s) { return ea(s) * eb(s); };
  if (a.derivative_fn && b.derivative_fn) {
    auto da = a.derivative_fn, db = b.derivative_fn;
    r.derivative_fn = [ea, eb, da, db](double s) { return da(s) * eb(s) + ea(s) * db(s); };
  }
  return r;
}

Vec PathSpec::position_at(double s) const {
  if (!is_chart()) throw std::invalid_argument("PathSpec: abstract path has no coordinates");
  interval.require(s, "PathSpec position");
  Vec x = position(s);
  if (static_cast<int>(x.size()) != base_dim)
    throw numeric_error("PathSpec: wrong coordinate count at s=" + fmt_param(s));
  if (!vec_finite(x)) throw numeric_error("PathSpec: non-finite position at s=" + fmt_param(s));
  return x;
}

Vec PathSpec::velocity_at(double s) const {
  if (!is_chart()) throw std::invalid_argument("PathSpec: abstract path has no velocity");
  interval.require(s, "PathSpec velocity");
  if (velocity) {
    Vec v = velocity(s);
    if (static_cast<int>(v.size()) != base_dim)
      throw numeric_error("PathSpec: wrong velocity count at s=" + fmt_param(s));
    return v;
  }
  return detail::fd4_vec(position, s, interval.length() * 1e-5, interval);
}

void PathSpec::validate_velocity(double rel_tol) const {
  if (!is_chart() || !velocity) return;  // derived velocities are consistent by construction
  const double h = interval.length() * 1e-6;
  for (int k = 0; k <= 6; ++k) {
    const double s = interval.lo() + interval.length() * (0.05 + 0.15 * k);
    Vec fd = detail::fd_vec(position, s, h, interval);
    Vec v = velocity_at(s);
    const double dev = vec_max_abs(vec_sub(v, fd));
    if (dev > rel_tol * std::max(1.0, vec_max_abs(v)))
      throw std::invalid_argument(
          "PathSpec: velocity is not the parameter derivative of position at s=" + fmt_param(s));
  }
}

PathSpec abstract_path(Interval interval) {
  PathSpec p;
  p.interval = interval;
  return p;
}

PathSpec chart_path(Interval interval, int base_dim, std::function<Vec(double)> position,
                    std::function<Vec(double)> velocity) {
  if (base_dim < 1) throw std::invalid_argument("chart_path: base_dim must be >= 1");
  if (!position) throw std::invalid_argument("chart_path: position map required");
  PathSpec p;
  p.interval = interval;
  p.base_dim = base_dim;
  p.position = std::move(position);
  p.velocity = std::move(velocity);
  return p;
}

PathSpec reverse_path(const PathSpec& p) {
  PathSpec r = p;
  if (!p.is_chart()) return r;
  const double mirror = p.interval.lo() + p.interval.hi();
  auto pos = p.position;
  r.position = [pos, mirror](double s) { return pos(mirror - s); };
  if (p.velocity) {
    auto vel = p.velocity;
    r.velocity = [vel, mirror](double s) { return vec_scale(-1.0, vel(mirror - s)); };
  } else {
    r.velocity = nullptr;
  }
  return r;
}

namespace detail {

Mat fd_mat(const std::function<Mat(double)>& f, double s, double h, const Interval& domain) {
  if (domain.contains(s - h) && domain.contains(s + h))
    return (1.0 / (2.0 * h)) * (f(s + h) - f(s - h));
  if (domain.contains(s + 2.0 * h))
    return (1.0 / (2.0 * h)) * (-3.0 * f(s) + 4.0 * f(s + h) - f(s + 2.0 * h));
  return (1.0 / (2.0 * h)) * (3.0 * f(s) - 4.0 * f(s - h) + f(s - 2.0 * h));
}

Vec fd_vec(const std::function<Vec(double)>& f, double s, double h, const Interval& domain) {
  if (domain.contains(s - h) && domain.contains(s + h))
    return vec_scale(1.0 / (2.0 * h), vec_sub(f(s + h), f(s - h)));
  if (domain.contains(s + 2.0 * h)) {
    Vec r = vec_combine(-3.0, f(s), 4.0, f(s + h));
    return vec_scale(1.0 / (2.0 * h), vec_combine(1.0, r, -1.0, f(s + 2.0 * h)));
  }
  Vec r = vec_combine(3.0, f(s), -4.0, f(s - h));
  return vec_scale(1.0 / (2.0 * h), vec_combine(1.0, r, 1.0, f(s - 2.0 * h)));
}

Vec fd4_vec(const std::function<Vec(double)>& f, double s, double h, const Interval& domain) {
  h = std::min(h, domain.length() / 8.0);
  if (domain.contains(s - 2.0 * h) && domain.contains(s + 2.0 * h)) {
    Vec r = vec_combine(-1.0, f(s + 2.0 * h), 8.0, f(s + h));
    r = vec_combine(1.0, r, -8.0, f(s - h));
    r = vec_combine(1.0, r, 1.0, f(s - 2.0 * h));
    return vec_scale(1.0 / (12.0 * h), r);
  }
  const double sign = domain.contains(s + 4.0 * h) ? 1.0 : -1.0;
  Vec r = vec_combine(-25.0, f(s), 48.0, f(s + sign * h));
  r = vec_combine(1.0, r, -36.0, f(s + sign * 2.0 * h));
  r = vec_combine(1.0, r, 16.0, f(s + sign * 3.0 * h));
  r = vec_combine(1.0, r, -3.0, f(s + sign * 4.0 * h));
  return vec_scale(sign / (12.0 * h), r);
}

}  // namespace detail

}  // namespace ltp
