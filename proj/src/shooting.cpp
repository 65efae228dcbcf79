#include "gmspike/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gmspike {

ShootingConfig ShootingConfig::defaults_for(const ProblemParams& params) {
  ShootingConfig cfg;
  cfg.rho_l = params.kind == SpikeKind::Inner ? kDefaultInnerTruncation
                                              : params.peak_rho;
  return cfg;
}

void ShootingConfig::validate() const {
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  if (!(eta > 0.0)) throw DomainError("eta must be positive");
  if (!(rho_l > 0.0) || !std::isfinite(rho_l)) throw DomainError("rho_l must be positive");
  if (scan_points < 3) throw DomainError("scan needs at least 3 points");
  if (!(refine_tol > 0.0)) throw DomainError("refine_tol must be positive");
  if (max_bisections < 1) throw DomainError("max_bisections must be positive");
  integrator.validate();
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Undershoot: return "Undershoot";
    case Verdict::Overshoot: return "Overshoot";
    case Verdict::Connect: return "Connect";
  }
  return "?";
}

ShotOutcome shoot_once(double a, double p, double rho_l, double eta,
                       const IntegratorConfig& config) {
  if (!(a > 0.0)) throw DomainError("trial amplitude must be positive");
  const Trajectory traj = integrate({a, 0.0}, 0.0, rho_l, p, config);

  ShotOutcome out;
  out.a = a;
  out.event = traj.terminal_event;
  switch (traj.terminal_event) {
    case TerminalEvent::UCrossedZero:
    case TerminalEvent::UExceededCap:
      out.verdict = out.side = Verdict::Overshoot;
      out.bc_residual = out.bc_signed = std::numeric_limits<double>::quiet_NaN();
      return out;
    case TerminalEvent::VReversed:
      out.verdict = out.side = Verdict::Undershoot;
      out.bc_residual = out.bc_signed = std::numeric_limits<double>::quiet_NaN();
      return out;
    case TerminalEvent::StepFailure:
      throw SolverError("integrator step underflow at a=" + std::to_string(a) +
                        ", rho=" + std::to_string(traj.rho_end()));
    case TerminalEvent::ReachedEnd:
      break;
  }
  const State& end = traj.back().state;
  out.bc_residual = std::abs(end.u) + std::abs(end.v);
  out.bc_signed = end.u + end.v;
  out.side = out.bc_signed >= 0.0 ? Verdict::Undershoot : Verdict::Overshoot;
  out.verdict = out.bc_residual <= eta ? Verdict::Connect : out.side;
  return out;
}

Verdict classify(double a, double p, double rho_l,
                 const IntegratorConfig& config, double eta) {
  return shoot_once(a, p, rho_l, eta, config).verdict;
}

ScanTable scan(const ProblemParams& params, const ShootingConfig& cfg) {
  params.validate();
  cfg.validate();
  const double amplitude = spike_amplitude(params.p);
  if (!(amplitude - cfg.delta > 0.0)) {
    throw DomainError("scan interval must stay above u = 0");
  }
  ScanTable table;
  table.entries.reserve(static_cast<std::size_t>(cfg.scan_points));
  const double last = static_cast<double>(cfg.scan_points - 1);
  for (int i = 0; i < cfg.scan_points; ++i) {
    // Symmetric parametrization keeps the centre point exactly at u_s(rho*).
    const double a = amplitude + cfg.delta * (2.0 * i / last - 1.0);
    table.entries.push_back(
        shoot_once(a, params.p, cfg.rho_l, cfg.eta, cfg.integrator));
  }
  table.bracketed = select_bracket(table).has_value();
  return table;
}

std::optional<Bracket> select_bracket(const ScanTable& table) {
  const auto& e = table.entries;
  std::vector<Bracket> candidates;
  std::optional<std::size_t> last_under;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i].verdict == Verdict::Undershoot) {
      last_under = i;
    } else if (e[i].verdict == Verdict::Overshoot) {
      if (last_under) candidates.push_back({e[*last_under].a, e[i].a});
      last_under.reset();
    }
  }
  if (candidates.empty()) return std::nullopt;

  std::optional<double> best_connect;
  double best_residual = std::numeric_limits<double>::infinity();
  for (const auto& entry : e) {
    if (entry.verdict == Verdict::Connect && entry.bc_residual < best_residual) {
      best_residual = entry.bc_residual;
      best_connect = entry.a;
    }
  }
  if (best_connect) {
    for (const auto& b : candidates) {
      if (b.lo <= *best_connect && *best_connect <= b.hi) return b;
    }
  }
  return candidates.front();
}

ShootingResult shoot(const ProblemParams& params, const ShootingConfig& cfg) {
  params.validate();
  cfg.validate();
  if (params.kind == SpikeKind::Boundary &&
      cfg.rho_l > params.peak_rho * (1.0 + 1e-12)) {
    throw DomainError("boundary shot cannot extend past rho = 0");
  }

  ShootingResult result;
  result.params = params;
  result.config = cfg;
  result.scan_table = scan(params, cfg);

  const auto initial = select_bracket(result.scan_table);
  if (!initial) {
    throw NoBracketError("amplitude scan found no Undershoot/Overshoot bracket",
                         result.scan_table);
  }

  Bracket bracket = *initial;
  result.brackets.push_back(bracket);
  int iterations = 0;
  while (bracket.width() > cfg.refine_tol) {
    if (iterations == cfg.max_bisections) {
      throw BisectionError("bisection did not reach refine_tol", bracket);
    }
    const double mid = bracket.lo + 0.5 * bracket.width();
    if (mid <= bracket.lo || mid >= bracket.hi) break;  // at double resolution
    const ShotOutcome outcome =
        shoot_once(mid, params.p, cfg.rho_l, cfg.eta, cfg.integrator);
    if (outcome.side == Verdict::Undershoot) {
      bracket.lo = mid;
    } else {
      bracket.hi = mid;
    }
    result.brackets.push_back(bracket);
    ++iterations;
  }

  result.a_star = bracket.lo + 0.5 * bracket.width();
  result.trajectory =
      integrate({result.a_star, 0.0}, 0.0, cfg.rho_l, params.p, cfg.integrator);
  if (result.trajectory.terminal_event == TerminalEvent::ReachedEnd) {
    const State& end = result.trajectory.back().state;
    result.bc_residual = std::abs(end.u) + std::abs(end.v);
    result.bc_signed = end.u + end.v;
    result.converged = result.bc_residual <= cfg.eta;
  } else {
    result.bc_residual = result.bc_signed = std::numeric_limits<double>::quiet_NaN();
    result.converged = false;
  }
  return result;
}

State ShootingResult::numeric_at(double rho) const {
  const double span = trajectory.rho_end();
  const double slack = 1e-12 * std::max(1.0, span);
  double distance;
  double direction;  // d(distance)/d(rho)
  if (params.kind == SpikeKind::Boundary) {
    if (rho > params.peak_rho + slack || rho < -slack) {
      throw DomainError("rho=" + std::to_string(rho) + " outside the boundary-spike domain");
    }
    distance = params.peak_rho - rho;
    direction = -1.0;
  } else {
    distance = std::abs(rho - params.peak_rho);
    direction = rho >= params.peak_rho ? 1.0 : -1.0;
  }
  distance = std::max(distance, 0.0);
  if (distance > span && distance <= span + slack) distance = span;
  const State s = trajectory.state_at(distance);
  return {s.u, direction * s.v};
}

}  // namespace gmspike
