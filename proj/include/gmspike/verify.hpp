#pragma once

#include <span>
#include <vector>

#include "gmspike/analytic_spike.hpp"
#include "gmspike/ode_core.hpp"
#include "gmspike/shooting.hpp"

namespace gmspike {

/// u'' - u + u^p of the closed-form spike, with u'' taken in closed form.
std::vector<double> ode_residual(const ProblemParams& params,
                                 std::span<const double> rho_grid);

struct ComparisonReport {
  std::vector<double> grid;
  std::vector<double> analytic;
  std::vector<double> numeric;
  std::vector<double> numeric_slope;  // du/drho from the trajectory
  double max_abs_err = 0.0;
  double l2_err = 0.0;  // root mean square of analytic - numeric
  double p = 0.0;
  SpikeKind kind = SpikeKind::Inner;
  ShootingConfig settings;
  double a_star = 0.0;
  double bc_residual = 0.0;
  double bc_signed = 0.0;
};

/// Samples the converged shot on the grid through the trajectory's dense
/// output. Throws SolverError if the shot did not converge and DomainError
/// for grid points outside the integrated span.
ComparisonReport compare(const ProblemParams& params,
                         const ShootingResult& result,
                         std::span<const double> grid);

/// max |H(sample) - H(first sample)| along the trajectory.
double check_first_integral(const Trajectory& traj, double p);

/// count points from start to end inclusive.
std::vector<double> uniform_grid(double start, double end, int count);

}  // namespace gmspike
