#include "ltp/connection.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "ltp/transport.hpp"

namespace ltp {

namespace {

std::string fmt_param(double s) {
  std::ostringstream os;
  os.precision(17);
  os << s;
  return os.str();
}

constexpr double kPoleEps = 1e-3;      // sphere chart keeps cot(theta) finite
constexpr double kClosureTol = 1e-10;
constexpr double kChartBound = 1e6;

}  // namespace

bool ChartDomain::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    const double slack = 1e-9 * std::max({1.0, std::fabs(lo[i]), std::fabs(hi[i])});
    if (period[i] > 0.0) continue;  // periodic coordinate: any representative is fine
    if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
  }
  return true;
}

Vec ChartDomain::closure_gap(std::span<const double> a, std::span<const double> b) const {
  Vec gap(dim());
  for (int i = 0; i < dim(); ++i) {
    double d = a[i] - b[i];
    if (period[i] > 0.0) d = std::remainder(d, period[i]);
    gap[i] = d;
  }
  return gap;
}

ChartDomain box_chart(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || lo.empty())
    throw std::invalid_argument("box_chart: bounds must agree and be nonempty");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i])) throw std::invalid_argument("box_chart: requires lo < hi");
  ChartDomain c;
  c.lo = std::move(lo);
  c.hi = std::move(hi);
  c.period.assign(c.lo.size(), 0.0);
  return c;
}

std::vector<Mat> ChristoffelField::value(std::span<const double> x) const {
  if (!eval) throw std::invalid_argument("ChristoffelField: missing eval");
  if (!chart.contains(x)) {
    std::ostringstream os;
    os << "ChristoffelField: point outside chart " << chart_id << " (";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << fmt_param(x[i]);
    os << ")";
    throw numeric_error(os.str());
  }
  std::vector<Mat> mats = eval(x);
  if (static_cast<int>(mats.size()) != base_dim)
    throw numeric_error("ChristoffelField: wrong matrix count");
  for (const Mat& m : mats) {
    if (m.rows() != fiber_dim || m.cols() != fiber_dim)
      throw numeric_error("ChristoffelField: wrong matrix shape");
    if (!m.finite()) throw numeric_error("ChristoffelField: non-finite entries");
  }
  return mats;
}

CoefficientField path_coefficients(const ChristoffelField& field, const PathSpec& path) {
  if (!path.is_chart())
    throw std::invalid_argument("path_coefficients: path must be in chart form");
  if (path.base_dim != field.base_dim)
    throw std::invalid_argument("path_coefficients: base dimension mismatch");
  path.validate_velocity();

  CoefficientField out;
  out.dim = field.fiber_dim;
  out.smoothness = Smoothness::c1;
  ChristoffelField f = field;
  PathSpec p = path;
  out.eval = [f, p](double s) {
    const Vec x = p.position_at(s);
    if (!f.chart.contains(x))
      throw numeric_error("path_coefficients: path leaves chart domain at s=" + fmt_param(s));
    const std::vector<Mat> mats = f.value(x);
    const Vec v = p.velocity_at(s);
    Mat g(f.fiber_dim, f.fiber_dim);
    for (int alpha = 0; alpha < f.base_dim; ++alpha) g += v[alpha] * mats[alpha];
    return g;
  };
  return out;
}

CoordinateChange identity_coordinates(int dim) {
  CoordinateChange c;
  c.dim = dim;
  c.forward = [](std::span<const double> x) { return Vec(x.begin(), x.end()); };
  c.inverse = [](std::span<const double> x) { return Vec(x.begin(), x.end()); };
  c.jacobian = [dim](std::span<const double>) { return Mat::identity(dim); };
  return c;
}

ChristoffelField transform_christoffels(const ChristoffelField& field,
                                        const FrameChangeField& frame_change,
                                        const CoordinateChange& coords, ChartDomain new_chart,
                                        std::string new_chart_id) {
  if (!frame_change.eval || !frame_change.partial)
    throw std::invalid_argument("transform_christoffels: frame change needs eval and partials");
  if (!coords.forward || !coords.inverse || !coords.jacobian)
    throw std::invalid_argument("transform_christoffels: incomplete coordinate change");
  if (coords.dim != field.base_dim)
    throw std::invalid_argument("transform_christoffels: coordinate dimension mismatch");

  ChristoffelField out;
  out.fiber_dim = field.fiber_dim;
  out.base_dim = field.base_dim;
  out.chart = std::move(new_chart);
  out.chart_id = std::move(new_chart_id);
  ChristoffelField src = field;
  FrameChangeField change = frame_change;
  CoordinateChange co = coords;
  out.eval = [src, change, co](std::span<const double> xp) {
    const Vec x = co.inverse(xp);
    const Mat jac = co.jacobian(x);                  // dx'/dx
    const Mat jac_inv = inverse(jac);                // dx/dx', entry (alpha, alpha')
    const Mat a = change.eval(x);
    const Mat a_inv = inverse(a);
    const std::vector<Mat> mats = src.value(x);

    std::vector<Mat> terms(src.base_dim);
    for (int alpha = 0; alpha < src.base_dim; ++alpha)
      terms[alpha] = a_inv * mats[alpha] * a + a_inv * change.partial(x, alpha);

    std::vector<Mat> primed(src.base_dim);
    for (int ap = 0; ap < src.base_dim; ++ap) {
      Mat g(src.fiber_dim, src.fiber_dim);
      for (int alpha = 0; alpha < src.base_dim; ++alpha) g += jac_inv(alpha, ap) * terms[alpha];
      primed[ap] = g;
    }
    return primed;
  };
  if (field.metric) {
    auto metric = field.metric;
    out.metric = [metric, change, co](std::span<const double> xp) {
      const Vec x = co.inverse(xp);
      const Mat a = change.eval(x);
      return a.transposed() * metric(x) * a;
    };
  }
  return out;
}

PathSpec transform_path(const PathSpec& path, const CoordinateChange& coords) {
  if (!path.is_chart()) throw std::invalid_argument("transform_path: abstract path");
  if (coords.dim != path.base_dim)
    throw std::invalid_argument("transform_path: dimension mismatch");
  PathSpec p = path;
  CoordinateChange co = coords;
  PathSpec src = path;
  p.position = [src, co](double s) { return co.forward(src.position_at(s)); };
  p.velocity = [src, co](double s) {
    return co.jacobian(src.position_at(s)).apply(src.velocity_at(s));
  };
  return p;
}

namespace {

// Lower-triangular Cholesky factor of a small SPD matrix.
Mat cholesky(const Mat& g) {
  const int n = g.rows();
  Mat l(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = g(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (!(s > 0.0)) throw numeric_error("holonomy: metric is not positive definite");
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return l;
}

}  // namespace

HolonomyResult holonomy(const ChristoffelField& field, const PathSpec& loop, double step) {
  if (!loop.is_chart()) throw std::invalid_argument("holonomy: loop must be in chart form");
  const Vec start = loop.position_at(loop.interval.lo());
  const Vec end = loop.position_at(loop.interval.hi());
  const Vec gap = field.chart.closure_gap(end, start);
  if (vec_max_abs(gap) > kClosureTol)
    throw std::invalid_argument("holonomy: loop is not closed (gap " +
                                std::to_string(vec_max_abs(gap)) + ")");

  const CoefficientField gamma = path_coefficients(field, loop);
  const FundamentalSolution sol =
      solve_fundamental(gamma, loop.interval.lo(), loop.interval, step);
  const TransportMatrix h = transport_matrix(sol, loop.interval.hi(), loop.interval.lo());

  HolonomyResult out;
  out.matrix = h.matrix;
  out.defect_norm = (h.matrix - Mat::identity(field.fiber_dim)).max_abs();
  out.base_point = start;

  Mat ortho = h.matrix;
  if (field.metric) {
    const Mat g = field.metric(start);
    out.metric_orthogonality_defect = (h.matrix.transposed() * g * h.matrix - g).max_abs();
    // Conjugate into a g-orthonormal basis: columns of L^-T are orthonormal.
    const Mat l = cholesky(g);
    const Mat lt = l.transposed();
    ortho = lt * h.matrix * inverse(lt);
  }
  if (field.fiber_dim == 2) {
    const Mat defect = ortho.transposed() * ortho - Mat::identity(2);
    if (defect.max_abs() <= 1e-6) {
      double angle = std::atan2(ortho(1, 0), ortho(0, 0));
      if (angle < 0.0) angle += 2.0 * std::numbers::pi;
      out.rotation_angle = angle;
    }
  }
  return out;
}

ChristoffelField tangent_bundle_preset(const std::string& name,
                                       const std::vector<Mat>& custom) {
  if (name == "flat-euclidean") {
    ChristoffelField f;
    f.fiber_dim = 2;
    f.base_dim = 2;
    f.chart = box_chart({-kChartBound, -kChartBound}, {kChartBound, kChartBound});
    f.chart_id = "plane";
    f.eval = [](std::span<const double>) { return std::vector<Mat>{Mat(2, 2), Mat(2, 2)}; };
    f.metric = [](std::span<const double>) { return Mat::identity(2); };
    return f;
  }
  if (name == "sphere-levi-civita") {
    ChristoffelField f;
    f.fiber_dim = 2;
    f.base_dim = 2;
    f.chart = box_chart({kPoleEps, -kChartBound}, {std::numbers::pi - kPoleEps, kChartBound});
    f.chart.period[1] = 2.0 * std::numbers::pi;  // azimuthal coordinate
    f.chart_id = "sphere-polar";
    f.eval = [](std::span<const double> x) {
      const double th = x[0];
      const double cot = std::cos(th) / std::sin(th);
      Mat g_theta(2, 2), g_phi(2, 2);
      g_theta(1, 1) = cot;
      g_phi(0, 1) = -std::sin(th) * std::cos(th);
      g_phi(1, 0) = cot;
      return std::vector<Mat>{g_theta, g_phi};
    };
    f.metric = [](std::span<const double> x) {
      Mat g = Mat::identity(2);
      g(1, 1) = std::sin(x[0]) * std::sin(x[0]);
      return g;
    };
    return f;
  }
  if (name == "constant-custom") {
    if (custom.empty())
      throw std::invalid_argument("tangent_bundle_preset: constant-custom needs matrices");
    const int n = custom[0].rows();
    for (const Mat& m : custom)
      if (!m.square() || m.rows() != n)
        throw std::invalid_argument("tangent_bundle_preset: custom matrices must share shape");
    const int m_dim = static_cast<int>(custom.size());
    ChristoffelField f;
    f.fiber_dim = n;
    f.base_dim = m_dim;
    f.chart = box_chart(Vec(m_dim, -kChartBound), Vec(m_dim, kChartBound));
    f.chart_id = "custom";
    f.eval = [custom](std::span<const double>) { return custom; };
    return f;
  }
  throw std::invalid_argument("tangent_bundle_preset: unknown preset '" + name + "'");
}

}  // namespace ltp
