#include "gmspike/ode_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gmspike/analytic_spike.hpp"
#include "gmspike/errors.hpp"

namespace gmspike {

namespace {

bool is_integer(double p) { return p == std::floor(p); }

// Right-hand side used inside RK stages. For non-integer p a stage may land
// at u < 0 while the step straddles the u = 0 event; the odd extension keeps
// those stages real. States past the event are discarded after localization.
State stage_rhs(const State& y, double p) {
  double power;
  if (y.u >= 0.0 || is_integer(p)) {
    power = std::pow(y.u, p);
  } else {
    power = -std::pow(-y.u, p);
  }
  return {y.v, y.u - power};
}

State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
  State out = y;
  for (const auto& [coef, k] : terms) {
    out.u += h * coef * k->u;
    out.v += h * coef * k->v;
  }
  return out;
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;

constexpr double kEventTolerance = 1e-10;

struct StepResult {
  State y1;
  State k7;  // FSAL: derivative at y1
  double error_norm = 0.0;
  DenseSegment dense;
};

StepResult dopri_step(double rho, const State& y0, const State& k1, double h,
                      double p, const IntegratorConfig& cfg) {
  const State k2 = stage_rhs(axpy(y0, h, {{a21, &k1}}), p);
  const State k3 = stage_rhs(axpy(y0, h, {{a31, &k1}, {a32, &k2}}), p);
  const State k4 =
      stage_rhs(axpy(y0, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}), p);
  const State k5 = stage_rhs(
      axpy(y0, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}), p);
  const State k6 = stage_rhs(
      axpy(y0, h,
           {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}),
      p);
  const State y1 = axpy(
      y0, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
  const State k7 = stage_rhs(y1, p);

  const State err = axpy(
      State{}, h,
      {{e1, &k1}, {e3, &k3}, {e4, &k4}, {e5, &k5}, {e6, &k6}, {e7, &k7}});
  const double sc_u = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y0.u), std::abs(y1.u));
  const double sc_v = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y0.v), std::abs(y1.v));
  const double eu = err.u / sc_u;
  const double ev = err.v / sc_v;

  StepResult out;
  out.y1 = y1;
  out.k7 = k7;
  out.error_norm = std::sqrt(0.5 * (eu * eu + ev * ev));

  DenseSegment& seg = out.dense;
  seg.rho0 = rho;
  seg.h = h;
  seg.coeffs[0] = y0;
  seg.coeffs[1] = {y1.u - y0.u, y1.v - y0.v};
  seg.coeffs[2] = {h * k1.u - seg.coeffs[1].u, h * k1.v - seg.coeffs[1].v};
  seg.coeffs[3] = {seg.coeffs[1].u - h * k7.u - seg.coeffs[2].u,
                   seg.coeffs[1].v - h * k7.v - seg.coeffs[2].v};
  seg.coeffs[4] = axpy(State{}, h,
                       {{d1, &k1}, {d3, &k3}, {d4, &k4}, {d5, &k5}, {d6, &k6},
                        {d7, &k7}});
  return out;
}

bool finite(const State& s) { return std::isfinite(s.u) && std::isfinite(s.v); }

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

// Smallest theta in (0, 1] where g changes sign, given g(0) and g(1) on
// opposite sides. Returns the right end of the final bisection bracket so
// the event condition already holds there.
template <typename G>
double localize(const G& g, double h) {
  double lo = 0.0;
  double hi = 1.0;
  const bool lo_positive = g(lo) > 0.0;
  while ((hi - lo) * h > 0.1 * kEventTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((g(mid) > 0.0) == lo_positive) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace

State rhs(const State& state, double p) {
  if (state.u < 0.0 && !is_integer(p)) {
    throw DomainError("u < 0 is outside the real domain of u^p for non-integer p");
  }
  return {state.v, state.u - std::pow(state.u, p)};
}

double hamiltonian(const State& state, double p) {
  if (state.u < 0.0 && !is_integer(p)) {
    throw DomainError("u < 0 is outside the real domain of u^(p+1) for non-integer p");
  }
  return 0.5 * state.v * state.v - 0.5 * state.u * state.u +
         std::pow(state.u, p + 1.0) / (p + 1.0);
}

std::string_view to_string(TerminalEvent event) {
  switch (event) {
    case TerminalEvent::ReachedEnd: return "ReachedEnd";
    case TerminalEvent::UCrossedZero: return "UCrossedZero";
    case TerminalEvent::UExceededCap: return "UExceededCap";
    case TerminalEvent::VReversed: return "VReversed";
    case TerminalEvent::StepFailure: return "StepFailure";
  }
  return "?";
}

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw DomainError("integrator tolerances must be positive");
  }
  if (!(h_min > 0.0 && h_min <= h_init && h_init <= h_max)) {
    throw DomainError("integrator steps must satisfy 0 < h_min <= h_init <= h_max");
  }
  if (u_cap && !(*u_cap > 0.0)) throw DomainError("u_cap must be positive");
}

State DenseSegment::eval(double rho) const {
  const double t = (rho - rho0) / h;
  const double t1 = 1.0 - t;
  const auto& c = coeffs;
  return {c[0].u + t * (c[1].u + t1 * (c[2].u + t * (c[3].u + t1 * c[4].u))),
          c[0].v + t * (c[1].v + t1 * (c[2].v + t * (c[3].v + t1 * c[4].v)))};
}

State Trajectory::state_at(double rho) const {
  if (samples.empty()) throw DomainError("empty trajectory");
  if (!(rho >= rho_begin() && rho <= rho_end())) {
    throw DomainError("rho=" + std::to_string(rho) + " outside the integrated span");
  }
  if (rho == rho_begin()) return samples.front().state;
  if (rho == rho_end()) return samples.back().state;
  // First sample strictly beyond rho closes the containing segment.
  const auto it = std::upper_bound(
      samples.begin(), samples.end(), rho,
      [](double r, const Sample& s) { return r < s.rho; });
  const auto index = static_cast<std::size_t>(it - samples.begin()) - 1;
  return segments[index].eval(rho);
}

Trajectory integrate(const State& initial, double rho_start, double rho_end,
                     double p, const IntegratorConfig& config) {
  config.validate();
  require_admissible_exponent(p);
  if (!(rho_start < rho_end)) throw DomainError("integrate needs rho_start < rho_end");
  if (!finite(initial)) throw DomainError("initial state must be finite");

  const double u_cap = config.u_cap.value_or(10.0 * spike_amplitude(p));

  Trajectory traj;
  traj.samples.push_back({rho_start, initial});

  double rho = rho_start;
  State y = initial;
  State k1 = stage_rhs(y, p);
  double h = std::min(config.h_init, rho_end - rho_start);
  int v_sign = sign_of(initial.v);
  bool last_rejected = false;
  const double end_slack = 4.0 * std::numeric_limits<double>::epsilon() *
                           std::max(1.0, std::abs(rho_end));

  while (rho_end - rho > end_slack) {
    const bool final_step = rho + h >= rho_end;
    if (final_step) h = rho_end - rho;

    const StepResult step = dopri_step(rho, y, k1, h, p, config);

    if (!finite(step.y1) || !(step.error_norm <= 1.0)) {
      ++traj.rejected_steps;
      const double fac = finite(step.y1) && std::isfinite(step.error_norm)
                             ? std::max(0.2, 0.9 * std::pow(step.error_norm, -0.2))
                             : 0.2;
      h *= std::min(1.0, fac);
      last_rejected = true;
      if (h < config.h_min) {
        traj.terminal_event = TerminalEvent::StepFailure;
        return traj;
      }
      continue;
    }

    ++traj.accepted_steps;
    const double rho_next = final_step ? rho_end : rho + h;
    const DenseSegment& seg = step.dense;

    // Event-first: find the earliest event inside this step.
    TerminalEvent event = TerminalEvent::ReachedEnd;
    double theta = 2.0;
    if (y.u > 0.0 && step.y1.u <= 0.0) {
      const double t = localize([&](double s) { return seg.eval(rho + s * h).u; }, h);
      if (t < theta) { theta = t; event = TerminalEvent::UCrossedZero; }
    }
    if (step.y1.u > u_cap && y.u <= u_cap) {
      const double t = localize(
          [&](double s) { return u_cap - seg.eval(rho + s * h).u; }, h);
      if (t < theta) { theta = t; event = TerminalEvent::UExceededCap; }
    }
    if (v_sign != 0 && sign_of(step.y1.v) == -v_sign) {
      const double t = localize(
          [&](double s) { return v_sign * seg.eval(rho + s * h).v; }, h);
      if (t < theta) { theta = t; event = TerminalEvent::VReversed; }
    }

    if (event != TerminalEvent::ReachedEnd) {
      double rho_event = theta >= 1.0 ? rho_next : rho + theta * h;
      if (rho_event <= rho) rho_event = std::nextafter(rho, rho_next);
      State at_event = theta >= 1.0 ? step.y1 : seg.eval(rho_event);
      if (event == TerminalEvent::UCrossedZero) at_event.u = 0.0;
      if (event == TerminalEvent::VReversed) at_event.v = 0.0;
      traj.samples.push_back({rho_event, at_event});
      traj.segments.push_back(seg);
      traj.terminal_event = event;
      return traj;
    }

    traj.samples.push_back({rho_next, step.y1});
    traj.segments.push_back(seg);
    rho = rho_next;
    y = step.y1;
    k1 = step.k7;
    if (v_sign == 0) v_sign = sign_of(y.v);

    double fac = step.error_norm > 0.0 ? 0.9 * std::pow(step.error_norm, -0.2) : 5.0;
    fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
    last_rejected = false;
    h = std::min(config.h_max, h * fac);
    if (h < config.h_min) h = config.h_min;
  }

  traj.terminal_event = TerminalEvent::ReachedEnd;
  return traj;
}

}  // namespace gmspike
