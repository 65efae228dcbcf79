#include "gmspike/verify.hpp"

#include <algorithm>
#include <cmath>

#include "gmspike/errors.hpp"

namespace gmspike {

std::vector<double> ode_residual(const ProblemParams& params,
                                 std::span<const double> rho_grid) {
  params.validate();
  std::vector<double> out;
  out.reserve(rho_grid.size());
  for (const double rho : rho_grid) {
    const double u = eval_spike_rho(params, rho);
    const double upp = eval_spike_second_derivative(params, rho);
    out.push_back(upp - u + std::pow(u, params.p));
  }
  return out;
}

ComparisonReport compare(const ProblemParams& params,
                         const ShootingResult& result,
                         std::span<const double> grid) {
  if (!result.converged) {
    throw SolverError("cannot compare against a shot that did not converge");
  }
  ComparisonReport report;
  report.p = params.p;
  report.kind = params.kind;
  report.settings = result.config;
  report.a_star = result.a_star;
  report.bc_residual = result.bc_residual;
  report.bc_signed = result.bc_signed;
  report.grid.assign(grid.begin(), grid.end());

  double sum_sq = 0.0;
  for (const double rho : grid) {
    const double exact = eval_spike_rho(params, rho);
    const State numeric = result.numeric_at(rho);
    report.analytic.push_back(exact);
    report.numeric.push_back(numeric.u);
    report.numeric_slope.push_back(numeric.v);
    const double err = std::abs(exact - numeric.u);
    report.max_abs_err = std::max(report.max_abs_err, err);
    sum_sq += err * err;
  }
  if (!grid.empty()) {
    report.l2_err = std::sqrt(sum_sq / static_cast<double>(grid.size()));
  }
  return report;
}

double check_first_integral(const Trajectory& traj, double p) {
  if (traj.samples.empty()) throw DomainError("empty trajectory");
  const double h0 = hamiltonian(traj.front().state, p);
  double drift = 0.0;
  for (const auto& sample : traj.samples) {
    drift = std::max(drift, std::abs(hamiltonian(sample.state, p) - h0));
  }
  return drift;
}

std::vector<double> uniform_grid(double start, double end, int count) {
  if (count < 2) throw DomainError("grid needs at least 2 points");
  if (!(start < end)) throw DomainError("grid needs start < end");
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double span = end - start;
  for (int i = 0; i < count; ++i) {
    grid[static_cast<std::size_t>(i)] = start + span * i / (count - 1);
  }
  grid.back() = end;
  return grid;
}

}  // namespace gmspike
