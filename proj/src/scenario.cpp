#include "ltp/scenario.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

#include "ltp/bundle.hpp"
#include "ltp/derivation.hpp"
#include "ltp/frame.hpp"
#include "ltp/random.hpp"
#include "ltp/transport.hpp"

namespace ltp {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

std::string matrix_csv(const Mat& m) {
  std::string out = "i,j,value\n";
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      out += std::to_string(i);
      out += ',';
      out += std::to_string(j);
      out += ',';
      out += format_double(m(i, j));
      out += '\n';
    }
  return out;
}

json to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string settings_fingerprint(const json& scenario_echo, const std::string& command) {
  const std::string text = scenario_echo.dump() + "\n" + command;
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw schema_error(path + ": " + msg);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

const json& need(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(path.empty() ? key : path + "." + key, "missing");
  return j.at(key);
}

std::string need_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

double need_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double need_positive(const json& j, const std::string& path) {
  const double v = need_number(j, path);
  if (!(v > 0.0) || !std::isfinite(v)) fail(path, "must be a positive finite number");
  return v;
}

int need_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

Poly parse_poly(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty coefficient array");
  Poly p;
  for (std::size_t k = 0; k < j.size(); ++k)
    p.c.push_back(need_number(j[k], path + "[" + std::to_string(k) + "]"));
  return p;
}

PolyMat parse_poly_matrix(const json& j, const std::string& path, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    fail(path, "expected " + std::to_string(n) + " rows of polynomial entries");
  PolyMat m(n);
  for (int i = 0; i < n; ++i) {
    const json& row = j[i];
    const std::string rp = path + "[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      fail(rp, "expected " + std::to_string(n) + " entries");
    for (int k = 0; k < n; ++k) m[i].push_back(parse_poly(row[k], rp + "[" + std::to_string(k) + "]"));
  }
  return m;
}

Mat parse_matrix(const json& j, const std::string& path, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) fail(path, "expected an n x n matrix");
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    const json& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      fail(path + "[" + std::to_string(i) + "]", "expected " + std::to_string(n) + " numbers");
    for (int k = 0; k < n; ++k)
      m(i, k) = need_number(row[k], path + "[" + std::to_string(i) + "][" + std::to_string(k) + "]");
  }
  return m;
}

json poly_to_json(const Poly& p) {
  json a = json::array();
  for (double c : p.c) a.push_back(c);
  return a;
}

json poly_matrix_to_json(const PolyMat& m) {
  json rows = json::array();
  for (const auto& row : m) {
    json r = json::array();
    for (const Poly& p : row) r.push_back(poly_to_json(p));
    rows.push_back(std::move(r));
  }
  return rows;
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

const std::vector<std::string> kCommands = {"transport", "check", "holonomy",
                                            "frame",     "derive", "roundtrip"};

}  // namespace

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw schema_error("scenario: expected a JSON object");
  check_keys(j, "", {"schema", "name", "fiber_dim", "interval", "coefficients", "solver",
                     "outputs", "section"});

  Scenario sc;
  if (need_string(need(j, "", "schema"), "schema") != kScenarioSchema)
    fail("schema", std::string("expected \"") + kScenarioSchema + "\"");
  sc.name = need_string(need(j, "", "name"), "name");
  if (!valid_name(sc.name)) fail("name", "use [A-Za-z0-9_-]+");
  sc.fiber_dim = need_int(need(j, "", "fiber_dim"), "fiber_dim");
  if (sc.fiber_dim < 1) fail("fiber_dim", "must be >= 1");

  {
    const json& iv = need(j, "", "interval");
    if (!iv.is_array() || iv.size() != 2) fail("interval", "expected [lo, hi]");
    const double lo = need_number(iv[0], "interval[0]");
    const double hi = need_number(iv[1], "interval[1]");
    if (!(lo < hi)) fail("interval", "requires lo < hi");
    sc.interval = Interval{lo, hi};
  }

  {
    const json& co = need(j, "", "coefficients");
    if (!co.is_object()) fail("coefficients", "expected an object");
    const std::string type = need_string(need(co, "coefficients", "type"), "coefficients.type");
    if (type == "preset") {
      check_keys(co, "coefficients", {"type", "name"});
      sc.kind = CoeffSourceKind::preset;
      sc.preset_name = need_string(need(co, "coefficients", "name"), "coefficients.name");
      if (sc.preset_name == "rotation") {
        if (sc.fiber_dim != 2) fail("coefficients.name", "rotation preset needs fiber_dim 2");
      } else if (sc.preset_name != "zero") {
        fail("coefficients.name", "unknown preset '" + sc.preset_name + "'");
      }
    } else if (type == "polynomial" || type == "frames") {
      check_keys(co, "coefficients", {"type", "entries"});
      sc.kind = type == "polynomial" ? CoeffSourceKind::polynomial : CoeffSourceKind::frames;
      sc.entries = parse_poly_matrix(need(co, "coefficients", "entries"),
                                     "coefficients.entries", sc.fiber_dim);
    } else if (type == "christoffel") {
      check_keys(co, "coefficients", {"type", "preset", "matrices", "path"});
      sc.kind = CoeffSourceKind::christoffel;
      sc.christoffel_preset =
          need_string(need(co, "coefficients", "preset"), "coefficients.preset");
      int base_dim = 2;
      if (sc.christoffel_preset == "constant-custom") {
        const json& mats = need(co, "coefficients", "matrices");
        if (!mats.is_array() || mats.empty())
          fail("coefficients.matrices", "expected at least one matrix");
        base_dim = static_cast<int>(mats.size());
        for (int a = 0; a < base_dim; ++a)
          sc.custom_matrices.push_back(parse_matrix(
              mats[a], "coefficients.matrices[" + std::to_string(a) + "]", sc.fiber_dim));
      } else if (sc.christoffel_preset == "flat-euclidean" ||
                 sc.christoffel_preset == "sphere-levi-civita") {
        if (sc.fiber_dim != 2)
          fail("fiber_dim", "preset '" + sc.christoffel_preset + "' needs fiber_dim 2");
        if (co.contains("matrices"))
          fail("coefficients.matrices", "only valid with constant-custom");
      } else {
        fail("coefficients.preset", "unknown preset '" + sc.christoffel_preset + "'");
      }
      const json& path = need(co, "coefficients", "path");
      if (!path.is_object()) fail("coefficients.path", "expected an object");
      check_keys(path, "coefficients.path", {"position"});
      const json& pos = need(path, "coefficients.path", "position");
      if (!pos.is_array() || static_cast<int>(pos.size()) != base_dim)
        fail("coefficients.path.position",
             "expected " + std::to_string(base_dim) + " coordinate polynomials");
      for (int a = 0; a < base_dim; ++a)
        sc.path_position.push_back(
            parse_poly(pos[a], "coefficients.path.position[" + std::to_string(a) + "]"));
    } else {
      fail("coefficients.type", "expected preset | polynomial | frames | christoffel");
    }
  }

  sc.solver.fd_step = 1e-4 * sc.interval.length();
  if (j.contains("solver")) {
    const json& so = j.at("solver");
    if (!so.is_object()) fail("solver", "expected an object");
    check_keys(so, "solver", {"step", "fd_step", "tolerance", "seed", "roundtrip_tolerance"});
    if (so.contains("step")) sc.solver.step = need_positive(so.at("step"), "solver.step");
    if (so.contains("fd_step"))
      sc.solver.fd_step = need_positive(so.at("fd_step"), "solver.fd_step");
    if (so.contains("tolerance"))
      sc.solver.tolerance = need_positive(so.at("tolerance"), "solver.tolerance");
    if (so.contains("roundtrip_tolerance"))
      sc.solver.roundtrip_tolerance =
          need_positive(so.at("roundtrip_tolerance"), "solver.roundtrip_tolerance");
    if (so.contains("seed")) {
      const json& sd = so.at("seed");
      if (!sd.is_number_unsigned() && !sd.is_number_integer()) fail("solver.seed", "expected an integer");
      if (sd.is_number_integer() && sd.get<long long>() < 0) fail("solver.seed", "must be >= 0");
      sc.solver.seed = sd.get<std::uint64_t>();
    }
  }
  if (2.0 * sc.solver.fd_step >= sc.interval.length())
    fail("solver.fd_step", "must be smaller than half the interval");

  sc.outputs.s0 = sc.interval.lo();
  if (j.contains("outputs")) {
    const json& ou = j.at("outputs");
    if (!ou.is_object()) fail("outputs", "expected an object");
    check_keys(ou, "outputs",
               {"pairs", "samples", "s0", "frame_grid", "command", "vectors", "derive_at"});
    if (ou.contains("pairs")) {
      const json& ps = ou.at("pairs");
      if (!ps.is_array()) fail("outputs.pairs", "expected an array of {t, s}");
      for (std::size_t k = 0; k < ps.size(); ++k) {
        const std::string pp = "outputs.pairs[" + std::to_string(k) + "]";
        const json& p = ps[k];
        if (!p.is_object()) fail(pp, "expected {t, s}");
        check_keys(p, pp, {"t", "s"});
        const double t = need_number(need(p, pp, "t"), pp + ".t");
        const double s = need_number(need(p, pp, "s"), pp + ".s");
        if (!sc.interval.contains(t)) fail(pp + ".t", "outside the interval");
        if (!sc.interval.contains(s)) fail(pp + ".s", "outside the interval");
        sc.outputs.pairs.emplace_back(t, s);
      }
    }
    if (ou.contains("samples")) {
      sc.outputs.samples = need_int(ou.at("samples"), "outputs.samples");
      if (sc.outputs.samples < 1) fail("outputs.samples", "must be >= 1");
    }
    if (ou.contains("s0")) {
      sc.outputs.s0 = need_number(ou.at("s0"), "outputs.s0");
      if (!sc.interval.contains(sc.outputs.s0)) fail("outputs.s0", "outside the interval");
    }
    if (ou.contains("frame_grid")) {
      sc.outputs.frame_grid = need_int(ou.at("frame_grid"), "outputs.frame_grid");
      if (sc.outputs.frame_grid < 2) fail("outputs.frame_grid", "must be >= 2");
    }
    if (ou.contains("command")) {
      sc.outputs.command = need_string(ou.at("command"), "outputs.command");
      bool known = false;
      for (const std::string& c : kCommands) known = known || c == sc.outputs.command;
      if (!known) fail("outputs.command", "unknown command '" + sc.outputs.command + "'");
    }
    if (ou.contains("vectors")) {
      const json& vs = ou.at("vectors");
      if (!vs.is_array()) fail("outputs.vectors", "expected an array");
      for (std::size_t k = 0; k < vs.size(); ++k) {
        const std::string vp = "outputs.vectors[" + std::to_string(k) + "]";
        const json& v = vs[k];
        if (!v.is_object()) fail(vp, "expected {components, param}");
        check_keys(v, vp, {"components", "param"});
        const json& comps = need(v, vp, "components");
        if (!comps.is_array() || static_cast<int>(comps.size()) != sc.fiber_dim)
          fail(vp + ".components", "expected fiber_dim numbers");
        FiberVector fv;
        for (std::size_t c = 0; c < comps.size(); ++c)
          fv.components.push_back(
              need_number(comps[c], vp + ".components[" + std::to_string(c) + "]"));
        fv.param = need_number(need(v, vp, "param"), vp + ".param");
        if (!sc.interval.contains(fv.param)) fail(vp + ".param", "outside the interval");
        fv.frame_id = "e";
        sc.outputs.vectors.push_back(std::move(fv));
      }
    }
    if (ou.contains("derive_at")) {
      const double s = need_number(ou.at("derive_at"), "outputs.derive_at");
      if (!sc.interval.contains(s)) fail("outputs.derive_at", "outside the interval");
      sc.outputs.derive_at = s;
    }
  }

  if (j.contains("section")) {
    const json& se = j.at("section");
    if (!se.is_object()) fail("section", "expected an object");
    check_keys(se, "section", {"entries", "f"});
    const json& en = need(se, "section", "entries");
    if (!en.is_array() || static_cast<int>(en.size()) != sc.fiber_dim)
      fail("section.entries", "expected fiber_dim polynomial components");
    std::vector<Poly> comps;
    for (int c = 0; c < sc.fiber_dim; ++c)
      comps.push_back(parse_poly(en[c], "section.entries[" + std::to_string(c) + "]"));
    sc.section_entries = std::move(comps);
    if (se.contains("f")) sc.section_f = parse_poly(se.at("f"), "section.f");
  }

  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw schema_error("scenario file: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw schema_error("scenario file '" + path + "': " + e.what());
  }
  return parse_scenario(j);
}

json Scenario::canonical() const {
  json j;
  j["schema"] = kScenarioSchema;
  j["name"] = name;
  j["fiber_dim"] = fiber_dim;
  j["interval"] = json::array({interval.lo(), interval.hi()});

  json co;
  switch (kind) {
    case CoeffSourceKind::preset:
      co["type"] = "preset";
      co["name"] = preset_name;
      break;
    case CoeffSourceKind::polynomial:
      co["type"] = "polynomial";
      co["entries"] = poly_matrix_to_json(entries);
      break;
    case CoeffSourceKind::frames:
      co["type"] = "frames";
      co["entries"] = poly_matrix_to_json(entries);
      break;
    case CoeffSourceKind::christoffel: {
      co["type"] = "christoffel";
      co["preset"] = christoffel_preset;
      if (!custom_matrices.empty()) {
        json mats = json::array();
        for (const Mat& m : custom_matrices) mats.push_back(to_json(m));
        co["matrices"] = std::move(mats);
      }
      json pos = json::array();
      for (const Poly& p : path_position) pos.push_back(poly_to_json(p));
      co["path"] = json{{"position", std::move(pos)}};
      break;
    }
  }
  j["coefficients"] = std::move(co);

  j["solver"] = json{{"step", solver.step},
                     {"fd_step", solver.fd_step},
                     {"tolerance", solver.tolerance},
                     {"seed", solver.seed},
                     {"roundtrip_tolerance", solver.roundtrip_tolerance}};

  json ou;
  if (!outputs.pairs.empty()) {
    json ps = json::array();
    for (const auto& [t, s] : outputs.pairs) ps.push_back(json{{"t", t}, {"s", s}});
    ou["pairs"] = std::move(ps);
  }
  ou["samples"] = outputs.samples;
  ou["s0"] = outputs.s0;
  ou["frame_grid"] = outputs.frame_grid;
  ou["command"] = outputs.command;
  if (!outputs.vectors.empty()) {
    json vs = json::array();
    for (const FiberVector& v : outputs.vectors) {
      json comps = json::array();
      for (double c : v.components) comps.push_back(c);
      vs.push_back(json{{"components", std::move(comps)}, {"param", v.param}});
    }
    ou["vectors"] = std::move(vs);
  }
  if (outputs.derive_at) ou["derive_at"] = *outputs.derive_at;
  j["outputs"] = std::move(ou);

  if (section_entries) {
    json en = json::array();
    for (const Poly& p : *section_entries) en.push_back(poly_to_json(p));
    json se = json{{"entries", std::move(en)}};
    if (section_f) se["f"] = poly_to_json(*section_f);
    j["section"] = std::move(se);
  }
  return j;
}

ScenarioModel build_model(const Scenario& sc) {
  ScenarioModel model;
  const int n = sc.fiber_dim;
  switch (sc.kind) {
    case CoeffSourceKind::preset: {
      model.coefficients.dim = n;
      model.coefficients.smoothness = Smoothness::analytic;
      if (sc.preset_name == "zero") {
        model.coefficients.eval = [n](double) { return Mat(n, n); };
      } else {
        model.coefficients.eval = [](double) {
          return Mat(2, 2, {0.0, -1.0, 1.0, 0.0});
        };
      }
      break;
    }
    case CoeffSourceKind::polynomial: {
      model.coefficients.dim = n;
      model.coefficients.smoothness = Smoothness::analytic;
      PolyMat entries = sc.entries;
      model.coefficients.eval = [entries](double s) { return eval(entries, s); };
      break;
    }
    case CoeffSourceKind::frames: {
      FrameFamily factor;
      factor.dim = n;
      factor.interval = sc.interval;
      PolyMat entries = sc.entries;
      PolyMat dentries = derivative(entries);
      factor.eval = [entries](double s) { return eval(entries, s); };
      factor.derivative = [dentries](double s) { return eval(dentries, s); };
      factor.value(sc.interval.lo());  // invertibility probe at the ends
      factor.value(sc.interval.hi());
      model.factor = factor;
      model.coefficients = coefficients_from_frames(factor);
      break;
    }
    case CoeffSourceKind::christoffel: {
      model.field = tangent_bundle_preset(sc.christoffel_preset, sc.custom_matrices);
      std::vector<Poly> pos = sc.path_position;
      std::vector<Poly> vel;
      vel.reserve(pos.size());
      for (const Poly& p : pos) vel.push_back(p.derivative());
      const int m = static_cast<int>(pos.size());
      model.path = chart_path(
          sc.interval, m,
          [pos, m](double s) {
            Vec x(m);
            for (int a = 0; a < m; ++a) x[a] = pos[a](s);
            return x;
          },
          [vel, m](double s) {
            Vec v(m);
            for (int a = 0; a < m; ++a) v[a] = vel[a](s);
            return v;
          });
      model.coefficients = path_coefficients(*model.field, *model.path);
      // early domain probe so schema errors surface before integration
      for (int k = 0; k <= 4; ++k)
        model.coefficients(sc.interval.lo() + sc.interval.length() * k / 4.0);
      break;
    }
  }
  return model;
}

namespace {

json axiom_json(const AxiomReport& rep) {
  return json{{"composition", rep.max_composition_residual},
              {"identity", rep.max_identity_residual},
              {"inverse", rep.max_inverse_residual},
              {"samples", rep.samples},
              {"seed", rep.seed}};
}

Section transported_section(std::shared_ptr<const FundamentalSolution> sol, const Vec& u,
                            double s0) {
  Section sec;
  sec.dim = sol->dim();
  sec.interval = sol->interval();
  sec.frame_id = sol->frame_id();
  sec.smoothness = Smoothness::c1;  // derivative probed by finite differences
  sec.components = [sol, u, s0](double s) {
    return transport_matrix(*sol, s, s0).matrix.apply(u);
  };
  return sec;
}

struct CheckResults {
  AxiomReport axioms;
  double linearity = 0.0;
  double leibniz = 0.0;
  double annihilation = 0.0;
  double limit_order = 0.0;
  std::vector<double> limit_errors;
  bool limit_ok = false;
};

CheckResults run_checks(const Scenario& sc, const ScenarioModel& model,
                        const FundamentalSolution& sol) {
  CheckResults out;
  const TransportSource src = as_source(sol);
  out.axioms = check_axioms(src, sc.outputs.samples, sc.solver.seed);

  const DerivationOperator d{model.coefficients, sol.frame_id()};
  const Interval& iv = sc.interval;
  const int n = sc.fiber_dim;

  auto random_section = [&](Rng& rng, int degree) {
    std::vector<Poly> comps;
    for (int c = 0; c < n; ++c) {
      Poly p;
      for (int k = 0; k <= degree; ++k) p.c.push_back(rng.uniform(-1.0, 1.0));
      comps.push_back(p);
    }
    return polynomial_section(iv, std::move(comps), sol.frame_id());
  };

  {  // linearity of the derivation over random combinations
    Rng rng(sc.solver.seed ^ 0x9e3779b97f4a7c15ull);
    for (int probe = 0; probe < 10; ++probe) {
      const Section s1 = random_section(rng, 2);
      const Section s2 = random_section(rng, 2);
      const double l1 = rng.uniform(-2.0, 2.0);
      const double l2 = rng.uniform(-2.0, 2.0);
      const Section comb = combine_sections(l1, s1, l2, s2);
      for (int k = 0; k <= 4; ++k) {
        const double s = iv.lo() + iv.length() * (0.1 + 0.2 * k);
        const Vec lhs = derive_section(d, comb, s).components;
        const Vec rhs = vec_combine(l1, derive_section(d, s1, s).components, l2,
                                    derive_section(d, s2, s).components);
        out.linearity = std::max(out.linearity, vec_max_abs(vec_sub(lhs, rhs)));
      }
    }
  }

  {  // Leibniz rule on polynomial data
    Rng rng(sc.solver.seed ^ 0x517cc1b727220a95ull);
    const SectionMap dm = derivation_map(d);
    for (int probe = 0; probe < 3; ++probe) {
      Poly f;
      for (int k = 0; k <= 2; ++k) f.c.push_back(rng.uniform(-1.0, 1.0));
      const Section sigma = random_section(rng, 2);
      out.leibniz = std::max(out.leibniz, leibniz_residual(dm, scalar_function(f), sigma, 21));
    }
  }

  {  // derivation annihilates transported sections
    Rng rng(sc.solver.seed ^ 0x2545f4914f6cdd1dull);
    auto sp = std::make_shared<const FundamentalSolution>(sol);
    for (int probe = 0; probe < 2; ++probe) {
      Vec u(n);
      for (double& c : u) c = rng.uniform(-1.0, 1.0);
      const Section sigma = transported_section(sp, u, sc.outputs.s0);
      for (int k = 0; k <= 20; ++k) {
        const double s = iv.lo() + iv.length() * k / 20.0;
        out.annihilation = std::max(
            out.annihilation, vec_max_abs(derive_section(d, sigma, s).components));
      }
    }
  }

  {  // first-order convergence of the defining difference quotient
    Rng rng(sc.solver.seed ^ 0xd6e8feb86659fd93ull);
    const Section sigma = random_section(rng, 3);
    const double s = iv.midpoint();
    const Vec exact = derive_section(d, sigma, s).components;
    for (double scale : {1e-2, 1e-3, 1e-4}) {
      const double eps = scale * iv.length();
      const Vec quotient = derive_via_limit(sol, sigma, s, eps).components;
      out.limit_errors.push_back(vec_max_abs(vec_sub(quotient, exact)));
    }
    if (out.limit_errors[0] <= 0.0 || out.limit_errors[1] <= 0.0 ||
        out.limit_errors[2] <= 0.0) {
      out.limit_order = 1.0;  // converged below measurable error
    } else {
      const double r1 = std::log10(out.limit_errors[0] / out.limit_errors[1]);
      const double r2 = std::log10(out.limit_errors[1] / out.limit_errors[2]);
      out.limit_order = 0.5 * (r1 + r2);
    }
    out.limit_ok = std::fabs(out.limit_order - 1.0) <= 0.2;
  }

  return out;
}

}  // namespace

RunOutcome run_command(const Scenario& sc, const std::string& command, const RunOptions& opts) {
  bool known = false;
  for (const std::string& c : kCommands) known = known || c == command;
  if (!known) throw schema_error("command: unknown command '" + command + "'");

  Scenario eff = sc;
  if (opts.seed) eff.solver.seed = *opts.seed;
  if (opts.s0) {
    if (!eff.interval.contains(*opts.s0)) throw schema_error("s0: outside the interval");
    eff.outputs.s0 = *opts.s0;
  }
  if (opts.s && command == "derive") {
    if (!eff.interval.contains(*opts.s)) throw schema_error("s: outside the interval");
    eff.outputs.derive_at = *opts.s;
  } else if (opts.s || opts.t) {
    if (!(opts.s && opts.t))
      throw schema_error("s/t: transport overrides need both --s and --t");
    if (!eff.interval.contains(*opts.s)) throw schema_error("s: outside the interval");
    if (!eff.interval.contains(*opts.t)) throw schema_error("t: outside the interval");
    eff.outputs.pairs = {{*opts.t, *opts.s}};
  }

  const ScenarioModel model = build_model(eff);
  const json echo = eff.canonical();

  RunOutcome out;
  out.report["schema"] = kReportSchema;
  out.report["command"] = command;
  out.report["name"] = eff.name;
  out.report["scenario"] = echo;
  out.report["settings_fingerprint"] = settings_fingerprint(echo, command);

  json results;

  if (command == "transport") {
    if (eff.outputs.pairs.empty())
      throw schema_error("outputs.pairs: transport needs pairs (or --s and --t)");
    const FundamentalSolution sol =
        solve_fundamental(model.coefficients, eff.outputs.s0, eff.interval, eff.solver.step);
    std::optional<FundamentalSolution> fine;
    if (opts.oracle)
      fine = solve_fundamental(model.coefficients, eff.outputs.s0, eff.interval,
                               eff.solver.step / 10.0);
    double worst_oracle = 0.0;
    json jpairs = json::array();
    for (std::size_t k = 0; k < eff.outputs.pairs.size(); ++k) {
      const auto [t, s] = eff.outputs.pairs[k];
      const TransportMatrix h = transport_matrix(sol, t, s);
      json entry{{"t", t}, {"s", s}, {"matrix", to_json(h.matrix)}};
      json images = json::array();
      for (const FiberVector& v : eff.outputs.vectors) {
        if (std::fabs(v.param - s) > 1e-9 * std::max(1.0, std::fabs(s))) continue;
        FiberVector u = v;
        u.param = s;
        const FiberVector image = transport_vector(sol, s, t, u);
        json comps = json::array();
        for (double c : image.components) comps.push_back(c);
        json inputc = json::array();
        for (double c : v.components) inputc.push_back(c);
        images.push_back(json{{"input", std::move(inputc)}, {"image", std::move(comps)}});
      }
      if (!images.empty()) entry["vectors"] = std::move(images);
      if (fine) {
        const double d = (h.matrix - transport_matrix(*fine, t, s).matrix).max_abs();
        entry["oracle_discrepancy"] = d;
        worst_oracle = std::max(worst_oracle, d);
      }
      jpairs.push_back(std::move(entry));
      out.tables.emplace_back("pair" + std::to_string(k), matrix_csv(h.matrix));
    }
    results["pairs"] = std::move(jpairs);
    if (fine) results["max_oracle_discrepancy"] = worst_oracle;
    out.exit_code = 0;

  } else if (command == "check") {
    const FundamentalSolution sol =
        solve_fundamental(model.coefficients, eff.outputs.s0, eff.interval, eff.solver.step);
    const CheckResults checks = run_checks(eff, model, sol);
    const double tol = eff.solver.tolerance;
    const bool pass = checks.axioms.max_composition_residual <= tol &&
                      checks.axioms.max_identity_residual <= tol &&
                      checks.axioms.max_inverse_residual <= tol && checks.linearity <= tol &&
                      checks.leibniz <= tol && checks.annihilation <= tol && checks.limit_ok;
    results["axioms"] = axiom_json(checks.axioms);
    json limit_errors = json::array();
    for (double e : checks.limit_errors) limit_errors.push_back(e);
    results["derivation"] = json{{"linearity", checks.linearity},
                                 {"leibniz", checks.leibniz},
                                 {"annihilation", checks.annihilation},
                                 {"limit_order", checks.limit_order},
                                 {"limit_errors", std::move(limit_errors)}};
    results["tolerance"] = tol;
    results["pass"] = pass;
    out.exit_code = pass ? 0 : 1;

  } else if (command == "holonomy") {
    if (!model.field || !model.path)
      throw schema_error("coefficients: holonomy needs a christoffel source with a path");
    const HolonomyResult res = holonomy(*model.field, *model.path, eff.solver.step);
    results["matrix"] = to_json(res.matrix);
    results["defect_norm"] = res.defect_norm;
    if (res.rotation_angle) results["rotation_angle"] = *res.rotation_angle;
    if (res.metric_orthogonality_defect)
      results["metric_orthogonality_defect"] = *res.metric_orthogonality_defect;
    json base = json::array();
    for (double c : res.base_point) base.push_back(c);
    results["base_point"] = std::move(base);
    out.tables.emplace_back("holonomy", matrix_csv(res.matrix));
    out.exit_code = 0;

  } else if (command == "frame") {
    const FundamentalSolution sol =
        solve_fundamental(model.coefficients, eff.outputs.s0, eff.interval, eff.solver.step);
    const SpecialFrame special =
        special_frame(sol, eff.outputs.s0, Mat::identity(eff.fiber_dim));
    const TransportSource src = as_source(sol);

    json grid = json::array();
    json frames = json::array();
    for (int k = 0; k < eff.outputs.frame_grid; ++k) {
      const double s =
          eff.interval.lo() + eff.interval.length() * k / (eff.outputs.frame_grid - 1);
      grid.push_back(s);
      const Mat f = special.frame_matrices(s);
      frames.push_back(to_json(f));
      out.tables.emplace_back("frame" + std::to_string(k), matrix_csv(f));
    }

    const EuclideanCheck eu = is_euclidean_over_path(src, special.basis_family(), 50,
                                                     kSpecialFrameMatrixTol, eff.solver.seed);
    const TransportSource conj = in_frame(src, special.as_frame_change());
    const double h = eff.solver.fd_step;
    double coeff_residual = 0.0;
    for (int k = 0; k <= 20; ++k) {
      const double s =
          eff.interval.lo() + h + (eff.interval.length() - 2.0 * h) * k / 20.0;
      coeff_residual =
          std::max(coeff_residual, coefficients_from_matrix(conj, s, h).max_abs());
    }
    const bool pass =
        eu.max_residual <= kSpecialFrameMatrixTol && coeff_residual <= kSpecialFrameCoeffTol;
    results["s0"] = eff.outputs.s0;
    results["grid"] = std::move(grid);
    results["frames"] = std::move(frames);
    results["transport_residual"] = eu.max_residual;
    results["transport_residual_tolerance"] = kSpecialFrameMatrixTol;
    results["coefficient_residual"] = coeff_residual;
    results["coefficient_residual_tolerance"] = kSpecialFrameCoeffTol;
    results["crosscheck_residual"] = special.crosscheck_residual;
    results["pass"] = pass;
    out.exit_code = pass ? 0 : 1;

  } else if (command == "derive") {
    if (!eff.section_entries)
      throw schema_error("section: the derive command needs scenario.section");
    const Section sigma =
        polynomial_section(eff.interval, *eff.section_entries, "e");
    const DerivationOperator d{model.coefficients, "e"};
    const double s = eff.outputs.derive_at ? *eff.outputs.derive_at : eff.interval.midpoint();
    const FundamentalSolution sol =
        solve_fundamental(model.coefficients, eff.outputs.s0, eff.interval, eff.solver.step);
    double eps = eff.solver.fd_step;
    if (!eff.interval.contains(s + eps)) eps = -eps;

    const FiberVector exact = derive_section(d, sigma, s);
    const FiberVector quotient = derive_via_limit(sol, sigma, s, eps);
    json dv = json::array(), qv = json::array();
    for (double c : exact.components) dv.push_back(c);
    for (double c : quotient.components) qv.push_back(c);
    results["s"] = s;
    results["derivative"] = std::move(dv);
    results["limit_quotient"] = std::move(qv);
    results["epsilon"] = eps;
    results["limit_error"] = vec_max_abs(vec_sub(exact.components, quotient.components));
    results["section_smoothness"] = "analytic";
    if (eff.section_f) {
      const double res = leibniz_residual(derivation_map(d), scalar_function(*eff.section_f),
                                          sigma, 21);
      results["leibniz_residual"] = res;
    }
    out.exit_code = 0;

  } else {  // roundtrip
    const RoundtripResult res = roundtrip_coefficients(
        model.coefficients, eff.interval, eff.solver.step, eff.solver.fd_step, 101);
    const bool pass = res.max_error <= eff.solver.roundtrip_tolerance;
    results["max_error"] = res.max_error;
    results["samples"] = res.samples;
    results["tolerance"] = eff.solver.roundtrip_tolerance;
    results["pass"] = pass;
    out.exit_code = pass ? 0 : 1;
  }

  out.report["results"] = std::move(results);
  return out;
}

}  // namespace ltp
