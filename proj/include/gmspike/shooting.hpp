#pragma once

// Shooting solver for the spike: start at the peak with (u, v) = (a, 0),
// integrate away from it, and pick the amplitude whose trajectory decays
// into the origin by the truncation point rho_l.

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "gmspike/analytic_spike.hpp"
#include "gmspike/errors.hpp"
#include "gmspike/ode_core.hpp"

namespace gmspike {

inline constexpr double kDefaultInnerTruncation = 12.0;

struct ShootingConfig {
  double delta = 0.1;   // half-width of the amplitude scan around u_s(rho*)
  double eta = 0.01;    // artificial boundary condition threshold
  double rho_l = kDefaultInnerTruncation;  // distance from the peak
  int scan_points = 41;
  double refine_tol = 1e-10;
  int max_bisections = 200;
  IntegratorConfig integrator;

  /// Inner spikes truncate at distance 12 from the peak; boundary spikes
  /// integrate across the whole domain, i.e. distance L / epsilon.
  static ShootingConfig defaults_for(const ProblemParams& params);

  void validate() const;
};

enum class Verdict { Undershoot, Overshoot, Connect };

std::string_view to_string(Verdict verdict);

/// Outcome of one trial amplitude.
///
/// `side` is always Undershoot or Overshoot: an event before rho_l decides
/// it, otherwise the sign of u + v at rho_l (the coordinate along the
/// unstable direction of the origin) does.
struct ShotOutcome {
  double a = 0.0;
  Verdict verdict = Verdict::Undershoot;
  Verdict side = Verdict::Undershoot;
  TerminalEvent event = TerminalEvent::ReachedEnd;
  double bc_residual = 0.0;  // |u(rho_l)| + |v(rho_l)|, only if ReachedEnd
  double bc_signed = 0.0;    // u(rho_l) + v(rho_l), only if ReachedEnd
};

/// Overshoot: u reaches 0 (or the cap) before rho_l. Undershoot: v turns
/// around before rho_l. Connect: rho_l reached with |u| + |v| <= eta.
/// Throws SolverError if the integrator fails.
ShotOutcome shoot_once(double a, double p, double rho_l, double eta,
                       const IntegratorConfig& config);

Verdict classify(double a, double p, double rho_l,
                 const IntegratorConfig& config, double eta = 0.01);

struct ScanTable {
  std::vector<ShotOutcome> entries;  // ordered by a
  bool bracketed = false;            // an Undershoot -> Overshoot transition exists
};

/// Uniform scan of [u_s(rho*) - delta, u_s(rho*) + delta].
ScanTable scan(const ProblemParams& params, const ShootingConfig& cfg);

struct Bracket {
  double lo = 0.0;  // Undershoot side
  double hi = 0.0;  // Overshoot side
  double width() const { return hi - lo; }
};

/// Picks the Undershoot/Overshoot pair from a scan. Among several
/// transitions, the one closest to the best-connecting entry wins.
std::optional<Bracket> select_bracket(const ScanTable& table);

struct ShootingResult {
  ProblemParams params;
  ShootingConfig config;
  double a_star = 0.0;
  Trajectory trajectory;  // rho measured as distance from the peak
  double bc_residual = 0.0;
  double bc_signed = 0.0;
  ScanTable scan_table;
  std::vector<Bracket> brackets;  // initial bracket then one per bisection
  bool converged = false;

  /// Numeric (u, du/drho) at a domain coordinate, using the evenness of the
  /// problem about the peak. Throws DomainError outside the integrated span.
  State numeric_at(double rho) const;
};

class NoBracketError : public SolverError {
 public:
  NoBracketError(const std::string& what, ScanTable table)
      : SolverError(what), table_(std::move(table)) {}
  const ScanTable& table() const { return table_; }

 private:
  ScanTable table_;
};

class BisectionError : public SolverError {
 public:
  BisectionError(const std::string& what, Bracket last)
      : SolverError(what), last_(last) {}
  const Bracket& last_bracket() const { return last_; }

 private:
  Bracket last_;
};

/// Scan, bisect the bracket down to refine_tol, and integrate at the
/// midpoint of the final bracket.
ShootingResult shoot(const ProblemParams& params, const ShootingConfig& cfg);

}  // namespace gmspike
