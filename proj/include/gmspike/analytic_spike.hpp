#pragma once

// Closed-form single-spike solutions of the rescaled 1D shadow
// Gierer-Meinhardt problem
//
//   u'' - u + u^p = 0,  u'(rho*) = 0,  u -> 0 away from the peak,  u > 0,
//
// and the generalized-hyperbolic ansatz A / cosh_a(rho)^s they come from.

#include <string_view>

namespace gmspike {

inline constexpr double kMinExponent = 1.01;
inline constexpr double kMaxExponent = 100.0;

enum class SpikeKind { Inner, Boundary };

std::string_view to_string(SpikeKind kind);
SpikeKind spike_kind_from_string(std::string_view name);

/// Problem setup on [-L, L] with rescaled coordinate rho = x / epsilon.
///
/// Inner spikes peak at rho* = 0. Boundary spikes peak at the right
/// endpoint rho* = L / epsilon and are evaluated on [0, L / epsilon].
struct ProblemParams {
  double p = 2.0;
  double epsilon = 0.08;
  double L = 1.0;
  double peak_rho = 0.0;
  SpikeKind kind = SpikeKind::Inner;

  static ProblemParams inner(double p, double epsilon = 0.08, double L = 1.0);
  static ProblemParams boundary(double p, double epsilon = 0.08, double L = 1.0);

  /// Throws DomainError if any invariant is violated.
  void validate() const;

  double peak_x() const { return peak_rho * epsilon; }
};

/// Throws DomainError unless p lies in [kMinExponent, kMaxExponent].
void require_admissible_exponent(double p);

/// Peak value ((p+1)/2)^(1/(p-1)) of the spike.
double spike_amplitude(double p);

/// u_s(rho) = ((1 + cosh((1-p)(rho-rho*))) / (1+p))^(1/(1-p)).
///
/// Evaluated as amplitude * e^-d * (2 / (1 + e^-(p-1)d))^(2/(p-1)) with
/// d = |rho - rho*|, which never overflows. Values below the smallest
/// positive normal double saturate to 0.
double eval_spike_rho(const ProblemParams& params, double rho);

/// Same solution in the original variable; requires |x| <= L.
double eval_spike_x(const ProblemParams& params, double x);

/// du_s/drho = -u_s(rho) * tanh((p-1)(rho-rho*)/2).
double eval_spike_derivative(const ProblemParams& params, double rho);

/// d^2u_s/drho^2, differentiated once more in closed form.
double eval_spike_second_derivative(const ProblemParams& params, double rho);

/// Constants of u(rho) = A / cosh_a(rho)^s with
/// cosh_a(rho) = (m a^(k rho) + q a^(-k rho)) / 2.
///
/// A and m are derived in log space; log_A and log_m stay finite even when
/// A or m leave the double range (small p with large q, or large rho*).
struct AnsatzConstants {
  double s = 0.0;
  double base_a = 0.0;
  double k = 0.0;
  double m = 0.0;
  double q = 0.0;
  double A = 0.0;
  double log_A = 0.0;
  double log_m = 0.0;
};

/// Term balancing fixes s = 2/(p-1), a = e, k = (p-1)/2; the peak condition
/// fixes A = e^-rho* (2/(q^2 (1+p)))^(1/(1-p)) and m = e^(rho*(1-p)) q.
AnsatzConstants derive_ansatz_constants(double p, double q, double peak_rho);

/// A / cosh_a(rho)^s, saturating to 0 like eval_spike_rho.
double eval_ansatz(const AnsatzConstants& constants, double rho);

}  // namespace gmspike
