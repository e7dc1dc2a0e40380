#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ltp/connection.hpp"
#include "ltp/poly.hpp"
#include "ltp/types.hpp"

namespace ltp {

inline constexpr const char* kScenarioSchema = "ltp-scenario/1";
inline constexpr const char* kReportSchema = "ltp-report/1";

// Special-frame verification thresholds used by the frame command.
inline constexpr double kSpecialFrameMatrixTol = 1e-8;
inline constexpr double kSpecialFrameCoeffTol = 1e-6;

struct SolverSettings {
  double step = 1e-3;
  double fd_step = 0.0;  // resolved to 1e-4 * interval length when unset
  double tolerance = 1e-8;
  std::uint64_t seed = 42;
  double roundtrip_tolerance = 5e-6;
};

struct OutputRequest {
  std::vector<std::pair<double, double>> pairs;  // (t, s)
  int samples = 100;
  double s0 = 0.0;  // resolved to interval.lo when unset
  int frame_grid = 11;
  std::string command = "check";
  std::vector<FiberVector> vectors;
  std::optional<double> derive_at;  // derive command; defaults to the midpoint
};

enum class CoeffSourceKind { preset, polynomial, frames, christoffel };

/// Validated scenario. Exactly one coefficient source; all numeric settings
/// positive; defaults materialized so the canonical echo reproduces the run.
struct Scenario {
  std::string name;
  int fiber_dim = 0;
  Interval interval{0.0, 1.0};

  CoeffSourceKind kind = CoeffSourceKind::preset;
  std::string preset_name;           // preset source
  PolyMat entries;                   // polynomial / frames sources
  std::string christoffel_preset;    // christoffel source
  std::vector<Mat> custom_matrices;  // constant-custom preset
  std::vector<Poly> path_position;   // christoffel source path, one Poly per coordinate

  SolverSettings solver;
  OutputRequest outputs;

  std::optional<std::vector<Poly>> section_entries;
  std::optional<Poly> section_f;

  nlohmann::json canonical() const;
};

Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario_file(const std::string& path);

/// Objects built from the scenario. The coefficient field is always present;
/// christoffel scenarios also expose the field and the path, frames scenarios
/// the factorization family.
struct ScenarioModel {
  CoefficientField coefficients;
  std::optional<ChristoffelField> field;
  std::optional<PathSpec> path;
  std::optional<FrameFamily> factor;
};

ScenarioModel build_model(const Scenario& sc);

struct RunOptions {
  std::optional<double> s;
  std::optional<double> t;
  std::optional<double> s0;
  std::optional<std::uint64_t> seed;
  bool oracle = false;
};

struct RunOutcome {
  nlohmann::json report;
  int exit_code = 0;  // 0 pass, 1 tolerance violation
  // (label, csv text) per matrix when tabular output is requested
  std::vector<std::pair<std::string, std::string>> tables;
};

/// Runs one of: transport, check, holonomy, frame, derive, roundtrip.
/// Deterministic for a fixed scenario + seed. Throws schema_error /
/// std::invalid_argument on bad inputs and numeric_error on numeric failure.
RunOutcome run_command(const Scenario& sc, const std::string& command,
                       const RunOptions& opts = {});

/// FNV-1a fingerprint of the canonical scenario plus the command name.
std::string settings_fingerprint(const nlohmann::json& scenario_echo,
                                 const std::string& command);

/// "i,j,value" table with round-trip-exact decimal formatting.
std::string matrix_csv(const Mat& m);

/// Round-trip-exact decimal rendering of a double (shortest form).
std::string format_double(double v);

nlohmann::json to_json(const Mat& m);

}  // namespace ltp
