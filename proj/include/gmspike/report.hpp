#pragma once

// Run configuration, command execution, and CSV/JSON report emission.
//
// CSV files share one schema, `rho,u_analytic,u_numeric,v_numeric,abs_error`,
// with numbers printed to 17 significant digits and '\n' line endings.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gmspike/analytic_spike.hpp"
#include "gmspike/shooting.hpp"
#include "gmspike/verify.hpp"

#include "json.hpp"

namespace gmspike {

enum class Command { Analytic, Shoot, Compare, Residual, Sweep };
enum class OutputFormat { Csv, Json };

std::string_view to_string(Command command);
Command command_from_string(std::string_view name);
std::string_view to_string(OutputFormat format);
OutputFormat output_format_from_string(std::string_view name);

struct GridSpec {
  double start = 0.0;
  double end = 0.0;
  int count = 0;

  /// Parses "start:end:count".
  static GridSpec parse(std::string_view text);
  std::vector<double> points() const { return uniform_grid(start, end, count); }
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct RunConfig {
  Command command = Command::Analytic;
  ProblemParams params;
  ShootingConfig shooting;
  bool auto_rho_l = true;  // pick rho_l per spike kind at run time
  std::optional<GridSpec> grid;
  std::filesystem::path output_path;  // file, or directory for sweep
  OutputFormat output_format = OutputFormat::Csv;

  void validate() const;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitSolverFailure = 1;
inline constexpr int kExitUsage = 2;

struct RunOutcome {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> files;
};

/// One row per sweep case.
struct SweepRow {
  double p = 0.0;
  SpikeKind kind = SpikeKind::Inner;
  double amplitude = 0.0;
  double a_star = 0.0;
  double max_abs_err = 0.0;
  double l2_err = 0.0;
  double bc_residual = 0.0;
  double bc_signed = 0.0;
  bool converged = false;
  std::string error;
};

/// Executes a command, writing reports under output_path. Progress lines
/// go to `log`. An empty output_path sends single-file reports to `log`.
RunOutcome run(const RunConfig& config, std::ostream& log);

/// Shortest-width deterministic formatting used by every CSV writer.
std::string format_number(double value);

void write_comparison_csv(std::ostream& os, const ComparisonReport& report);

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ComparisonReport& report);
nlohmann::json to_json(const SweepRow& row);

/// Grid used when --grid is absent.
GridSpec default_grid(Command command, const ProblemParams& params,
                      const ShootingConfig& shooting);

/// Shooting settings for one case, honouring auto_rho_l.
ShootingConfig resolve_shooting(const RunConfig& config,
                                const ProblemParams& params);

}  // namespace gmspike
