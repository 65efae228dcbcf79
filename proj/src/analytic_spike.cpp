#include "gmspike/analytic_spike.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gmspike/errors.hpp"

namespace gmspike {

namespace {

const double kLogMinNormal = std::log(std::numeric_limits<double>::min());

// exp(log_value), flushed to 0 below the smallest positive normal.
double saturating_exp(double log_value) {
  if (!(log_value >= kLogMinNormal)) return 0.0;
  return std::exp(log_value);
}

// log(e^x + e^y) without overflow.
double log_add_exp(double x, double y) {
  const double hi = std::max(x, y);
  const double lo = std::min(x, y);
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  return hi + std::log1p(std::exp(lo - hi));
}

// log(u_s / amplitude) as a function of d = |rho - rho*|.
double log_profile(double p, double d) {
  const double c = p - 1.0;
  return -d + (2.0 / c) * (std::numbers::ln2 - std::log1p(std::exp(-c * d)));
}

}  // namespace

std::string_view to_string(SpikeKind kind) {
  return kind == SpikeKind::Inner ? "inner" : "boundary";
}

SpikeKind spike_kind_from_string(std::string_view name) {
  if (name == "inner") return SpikeKind::Inner;
  if (name == "boundary") return SpikeKind::Boundary;
  throw DomainError("unknown spike kind '" + std::string(name) + "'");
}

ProblemParams ProblemParams::inner(double p, double epsilon, double L) {
  ProblemParams params{p, epsilon, L, 0.0, SpikeKind::Inner};
  params.validate();
  return params;
}

ProblemParams ProblemParams::boundary(double p, double epsilon, double L) {
  ProblemParams params{p, epsilon, L, L / epsilon, SpikeKind::Boundary};
  params.validate();
  return params;
}

void require_admissible_exponent(double p) {
  if (!(p >= kMinExponent && p <= kMaxExponent)) {
    throw DomainError("exponent p=" + std::to_string(p) + " outside [1.01, 100]");
  }
}

void ProblemParams::validate() const {
  require_admissible_exponent(p);
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw DomainError("epsilon must lie in (0, 1)");
  }
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("L must be positive");
  if (kind == SpikeKind::Inner && peak_rho != 0.0) {
    throw DomainError("inner spikes peak at rho* = 0");
  }
  if (kind == SpikeKind::Boundary) {
    const double expected = L / epsilon;
    if (!(std::abs(peak_rho - expected) <= 1e-12 * expected)) {
      throw DomainError("boundary spikes peak at rho* = L / epsilon");
    }
  }
}

double spike_amplitude(double p) {
  require_admissible_exponent(p);
  return std::pow((p + 1.0) / 2.0, 1.0 / (p - 1.0));
}

double eval_spike_rho(const ProblemParams& params, double rho) {
  const double amplitude = spike_amplitude(params.p);
  const double d = std::abs(rho - params.peak_rho);
  if (d == 0.0) return amplitude;
  return saturating_exp(std::log(amplitude) + log_profile(params.p, d));
}

double eval_spike_x(const ProblemParams& params, double x) {
  if (!(std::abs(x) <= params.L)) {
    throw DomainError("x=" + std::to_string(x) + " outside [-L, L]");
  }
  const double rho =
      std::abs(x - params.peak_x()) / params.epsilon + params.peak_rho;
  return eval_spike_rho(params, rho);
}

double eval_spike_derivative(const ProblemParams& params, double rho) {
  const double offset = rho - params.peak_rho;
  if (offset == 0.0) return 0.0;
  const double u = eval_spike_rho(params, rho);
  return -u * std::tanh(0.5 * (params.p - 1.0) * offset);
}

double eval_spike_second_derivative(const ProblemParams& params, double rho) {
  // With T = tanh((p-1)(rho-rho*)/2): u' = -u T and
  // u'' = u (T^2 - (p-1)/2 (1 - T^2)).
  const double u = eval_spike_rho(params, rho);
  const double c = params.p - 1.0;
  const double t = std::tanh(0.5 * c * (rho - params.peak_rho));
  const double t2 = t * t;
  return u * (t2 - 0.5 * c * (1.0 - t2));
}

AnsatzConstants derive_ansatz_constants(double p, double q, double peak_rho) {
  require_admissible_exponent(p);
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw DomainError("ansatz parameter q must be positive");
  }
  AnsatzConstants c;
  c.s = 2.0 / (p - 1.0);
  c.base_a = std::numbers::e;
  c.k = 0.5 * (p - 1.0);
  c.q = q;
  c.log_A = -peak_rho +
            (std::numbers::ln2 - 2.0 * std::log(q) - std::log1p(p)) / (1.0 - p);
  c.log_m = peak_rho * (1.0 - p) + std::log(q);
  c.A = std::exp(c.log_A);
  c.m = std::exp(c.log_m);
  return c;
}

double eval_ansatz(const AnsatzConstants& constants, double rho) {
  const double rate = constants.k * std::log(constants.base_a) * rho;
  const double log_cosh_a =
      log_add_exp(constants.log_m + rate, std::log(constants.q) - rate) -
      std::numbers::ln2;
  return saturating_exp(constants.log_A - constants.s * log_cosh_a);
}

}  // namespace gmspike
