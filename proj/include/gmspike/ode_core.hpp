#pragma once

// First-order form of the spike equation,
//
//   u' = v,  v' = u - u^p,
//
// with an adaptive Dormand-Prince 5(4) integrator that localizes the
// phase-plane events used by the shooting classifier.

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace gmspike {

struct State {
  double u = 0.0;
  double v = 0.0;

  friend bool operator==(const State&, const State&) = default;
};

/// (u', v') = (v, u - u^p). Throws DomainError for u < 0 with non-integer p.
State rhs(const State& state, double p);

/// First integral H = v^2/2 - u^2/2 + u^(p+1)/(p+1). Zero on the spike.
double hamiltonian(const State& state, double p);

enum class TerminalEvent {
  ReachedEnd,
  UCrossedZero,
  UExceededCap,
  VReversed,  // v changed sign after leaving the start point
  StepFailure,
};

std::string_view to_string(TerminalEvent event);

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double h_init = 1e-3;
  double h_min = 1e-12;
  double h_max = 0.1;
  /// Unset selects 10 * spike_amplitude(p).
  std::optional<double> u_cap;

  /// Throws DomainError if tolerances or step bounds are inconsistent.
  void validate() const;
};

struct Sample {
  double rho = 0.0;
  State state;
};

/// Dense output of one accepted step, valid on [rho0, rho0 + h].
struct DenseSegment {
  double rho0 = 0.0;
  double h = 0.0;
  std::array<State, 5> coeffs{};

  State eval(double rho) const;
};

/// Accepted samples of one integration run. Segment i interpolates between
/// samples i and i+1; a terminal event sample is the last entry.
class Trajectory {
 public:
  std::vector<Sample> samples;
  std::vector<DenseSegment> segments;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  TerminalEvent terminal_event = TerminalEvent::ReachedEnd;

  const Sample& front() const { return samples.front(); }
  const Sample& back() const { return samples.back(); }
  double rho_begin() const { return samples.front().rho; }
  double rho_end() const { return samples.back().rho; }

  /// Dense-output state at rho; throws DomainError outside the span.
  State state_at(double rho) const;
};

/// Integrates from rho_start towards rho_end, stopping early at the first
/// of: u crossing 0, u exceeding the cap, v reversing sign, or the step
/// size falling below h_min. Events are localized to 1e-10 in rho.
Trajectory integrate(const State& initial, double rho_start, double rho_end,
                     double p, const IntegratorConfig& config = {});

}  // namespace gmspike
