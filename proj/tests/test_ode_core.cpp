#include <cmath>
#include <vector>

#include "doctest.h"
#include "gmspike/analytic_spike.hpp"
#include "gmspike/errors.hpp"
#include "gmspike/ode_core.hpp"
#include "gmspike/verify.hpp"

using namespace gmspike;

namespace {

// Brute-force classical RK4 with a fixed step; independent of the adaptive
// integrator. Returns the first rho where `stop` holds, or rho_end.
template <typename Stop>
double brute_force_until(State y, double rho_end, double p, double h, Stop stop) {
  auto f = [p](const State& s) { return State{s.v, s.u - std::pow(s.u, p)}; };
  double rho = 0.0;
  while (rho < rho_end) {
    const State k1 = f(y);
    const State k2 = f({y.u + 0.5 * h * k1.u, y.v + 0.5 * h * k1.v});
    const State k3 = f({y.u + 0.5 * h * k2.u, y.v + 0.5 * h * k2.v});
    const State k4 = f({y.u + h * k3.u, y.v + h * k3.v});
    const State next{y.u + h / 6 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u),
                     y.v + h / 6 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v)};
    if (stop(y, next)) return rho + h;
    y = next;
    rho += h;
  }
  return rho_end;
}

IntegratorConfig tight() {
  IntegratorConfig c;
  c.rel_tol = 1e-12;
  c.abs_tol = 1e-14;
  return c;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST_CASE("rhs examples") {
  for (const double p : {1.5, 2.0, 3.7}) {
    CHECK(rhs({0.0, 0.0}, p) == State{0.0, 0.0});
    CHECK(rhs({1.0, 0.0}, p) == State{0.0, 0.0});
  }
  const State d = rhs({1.5, 0.0}, 2.0);
  CHECK(d.u == 0.0);
  CHECK(d.v == doctest::Approx(-0.75));
  CHECK(rhs({0.3, -0.7}, 2.0).u == -0.7);

  CHECK_THROWS_AS(rhs({-0.1, 0.0}, 2.5), DomainError);
  CHECK(rhs({-1.0, 0.0}, 2.0).v == doctest::Approx(-2.0));
}

TEST_CASE("hamiltonian examples") {
  CHECK(hamiltonian({0.0, 0.0}, 3.0) == 0.0);
  CHECK(std::abs(hamiltonian({1.5, 0.0}, 2.0)) < 1e-15);
  CHECK(hamiltonian({1.0, 0.0}, 2.0) == doctest::Approx(-1.0 / 6.0));
  CHECK(hamiltonian({1.6, 0.0}, 2.0) > 0.0);
  CHECK(hamiltonian({1.4, 0.0}, 2.0) < 0.0);
  CHECK_THROWS_AS(hamiltonian({-0.5, 0.0}, 1.5), DomainError);

  // Zero level set along the closed-form spike.
  for (const double p : {2.0, 3.0, 4.0}) {
    const auto params = ProblemParams::inner(p);
    for (double rho = 0.0; rho < 10.0; rho += 0.5) {
      const State s{eval_spike_rho(params, rho), eval_spike_derivative(params, rho)};
      CHECK(std::abs(hamiltonian(s, p)) < 1e-14);
    }
  }
}

TEST_CASE("config validation") {
  IntegratorConfig c;
  CHECK_NOTHROW(c.validate());
  c.rel_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.h_min = 1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.u_cap = -1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);

  CHECK_THROWS_AS(integrate({1.0, 0.0}, 1.0, 1.0, 2.0), DomainError);
  CHECK_THROWS_AS(integrate({NAN, 0.0}, 0.0, 1.0, 2.0), DomainError);
}

TEST_CASE("equilibrium stays put") {
  const Trajectory t = integrate({1.0, 0.0}, 0.0, 25.0, 2.7);
  CHECK(t.terminal_event == TerminalEvent::ReachedEnd);
  CHECK(t.rho_end() == 25.0);
  for (const auto& s : t.samples) {
    CHECK(s.state.u == 1.0);
    CHECK(s.state.v == 0.0);
  }
  CHECK(check_first_integral(t, 2.7) == 0.0);
}

TEST_CASE("spike from the exact amplitude follows the closed form") {
  const auto params = ProblemParams::inner(2.0);
  const Trajectory t = integrate({spike_amplitude(2.0), 0.0}, 0.0, 10.0, 2.0, tight());
  REQUIRE(t.terminal_event == TerminalEvent::ReachedEnd);
  const State end = t.back().state;
  // Closed form: u(10) + u'(10) = 2.4730475e-8.
  CHECK(std::abs(end.u + end.v) < 2e-3);
  CHECK(std::abs((end.u + end.v) - 2.4730475030852274e-8) < 1e-7);
  for (const auto& s : t.samples) {
    CHECK(std::abs(s.state.u - eval_spike_rho(params, s.rho)) < 1e-7);
  }
}

TEST_CASE("samples are strictly increasing") {
  for (const double a : {1.3, 1.5, 1.7}) {
    const Trajectory t = integrate({a, 0.0}, 0.0, 15.0, 2.0);
    REQUIRE(t.samples.size() == t.segments.size() + 1);
    for (std::size_t i = 1; i < t.samples.size(); ++i) {
      CHECK(t.samples[i].rho > t.samples[i - 1].rho);
    }
  }
}

TEST_CASE("overshoot crosses u = 0") {
  const Trajectory t = integrate({1.6, 0.0}, 0.0, 20.0, 2.0);
  CHECK(t.terminal_event == TerminalEvent::UCrossedZero);
  CHECK(t.back().state.u == 0.0);
  CHECK(t.back().state.v < 0.0);

  const double brute = brute_force_until({1.6, 0.0}, 20.0, 2.0, 1e-4,
                                         [](const State&, const State& n) { return n.u <= 0.0; });
  CHECK(brute < 20.0);
  CHECK(std::abs(t.rho_end() - brute) < 2e-4);

  // Localization: just before the event u is still positive and tiny.
  const State before = t.state_at(t.rho_end() - 1e-9);
  CHECK(before.u > 0.0);
  CHECK(before.u < 1e-8);
}

TEST_CASE("undershoot turns around") {
  const Trajectory t = integrate({1.4, 0.0}, 0.0, 20.0, 2.0);
  CHECK(t.terminal_event == TerminalEvent::VReversed);
  CHECK(t.back().state.v == 0.0);
  CHECK(t.back().state.u > 0.0);
  CHECK(t.back().state.u < 1.4);

  const double brute = brute_force_until({1.4, 0.0}, 20.0, 2.0, 1e-4,
                                         [](const State& y, const State& n) {
                                           return y.v < 0.0 && n.v >= 0.0;
                                         });
  CHECK(std::abs(t.rho_end() - brute) < 2e-4);
  CHECK(std::abs(t.state_at(t.rho_end() - 1e-9).v) < 1e-8);
}

TEST_CASE("sub-unit amplitude turns around above the start") {
  const Trajectory t = integrate({0.95, 0.0}, 0.0, 20.0, 4.0);
  CHECK(t.terminal_event == TerminalEvent::VReversed);
  CHECK(t.back().state.u > 1.0);
}

TEST_CASE("non-integer exponent crosses zero without domain errors") {
  const double p = 2.5;
  const Trajectory t = integrate({spike_amplitude(p) + 0.05, 0.0}, 0.0, 30.0, p);
  CHECK(t.terminal_event == TerminalEvent::UCrossedZero);
  CHECK_NOTHROW(check_first_integral(t, p));
}

TEST_CASE("cap event") {
  IntegratorConfig c;
  c.u_cap = 2.0;
  const Trajectory t = integrate({0.5, 5.0}, 0.0, 10.0, 2.0, c);
  CHECK(t.terminal_event == TerminalEvent::UExceededCap);
  CHECK(t.back().state.u == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("step failure is reported") {
  IntegratorConfig c;
  c.rel_tol = 1e-14;
  c.abs_tol = 1e-16;
  c.h_min = c.h_init = c.h_max = 2.0;
  const Trajectory t = integrate({1.5, 0.0}, 0.0, 10.0, 2.0, c);
  CHECK(t.terminal_event == TerminalEvent::StepFailure);
  CHECK(t.rejected_steps >= 1);
}

TEST_CASE("dense output") {
  const auto params = ProblemParams::inner(3.0);
  const Trajectory t = integrate({spike_amplitude(3.0), 0.0}, 0.0, 8.0, 3.0, tight());
  CHECK(t.state_at(0.0) == t.front().state);
  CHECK(t.state_at(8.0) == t.back().state);
  for (std::size_t i = 0; i + 1 < t.samples.size(); ++i) {
    const double mid = 0.5 * (t.samples[i].rho + t.samples[i + 1].rho);
    const State s = t.state_at(mid);
    CHECK(std::abs(s.u - eval_spike_rho(params, mid)) < 1e-8);
    CHECK(std::abs(s.v - eval_spike_derivative(params, mid)) < 1e-8);
  }
  CHECK_THROWS_AS(t.state_at(-0.1), DomainError);
  CHECK_THROWS_AS(t.state_at(8.1), DomainError);
}

TEST_CASE("first integral drift at tight tolerances") {
  IntegratorConfig c;
  c.rel_tol = c.abs_tol = 1e-10;
  for (const double p : {2.0, 2.5, 3.0, 4.0}) {
    for (const double offset : {-0.08, 0.0, 0.08}) {
      const Trajectory t = integrate({spike_amplitude(p) + offset, 0.0}, 0.0, 14.0, p, c);
      CAPTURE(p);
      CAPTURE(offset);
      CHECK(check_first_integral(t, p) <= 1e-7);
    }
  }
}

TEST_CASE("fixed-step convergence matches fifth order") {
  const auto params = ProblemParams::inner(2.0);
  std::vector<double> hs, errs;
  for (double h = 0.2; h > 0.02; h /= 2) {
    IntegratorConfig c;
    c.rel_tol = c.abs_tol = 1.0;
    c.h_min = c.h_init = c.h_max = h;
    const Trajectory t = integrate({1.5, 0.0}, 0.0, 6.0, 2.0, c);
    REQUIRE(t.terminal_event == TerminalEvent::ReachedEnd);
    hs.push_back(h);
    errs.push_back(std::abs(t.back().state.u - eval_spike_rho(params, 6.0)));
  }
  const double order = slope(hs, errs);
  CAPTURE(order);
  CHECK(std::abs(order - 5.0) <= 0.5);
}

TEST_CASE("halving tolerances reduces the end-point error") {
  const auto params = ProblemParams::inner(2.0);
  std::vector<double> tols, errs;
  for (double tol = 1e-6; tol > 1e-11; tol /= 2) {
    IntegratorConfig c;
    c.rel_tol = c.abs_tol = tol;
    c.h_max = 1.0;
    const Trajectory t = integrate({1.5, 0.0}, 0.0, 6.0, 2.0, c);
    tols.push_back(tol);
    errs.push_back(std::abs(t.back().state.u - eval_spike_rho(params, 6.0)));
  }
  for (std::size_t i = 1; i < errs.size(); ++i) CHECK(errs[i] < errs[i - 1]);
  CHECK(std::abs(slope(tols, errs) - 1.0) <= 0.2);
}

TEST_CASE("time reversibility") {
  const double p = 2.0;
  const double d = 1.5;
  for (const State start : {State{1.2, -0.1}, State{1.3, -0.2}, State{1.45, -0.05}}) {
    const Trajectory forward = integrate(start, 0.0, d, p, tight());
    REQUIRE(forward.terminal_event == TerminalEvent::ReachedEnd);
    const State end = forward.back().state;
    const Trajectory back = integrate({end.u, -end.v}, 0.0, d, p, tight());
    REQUIRE(back.terminal_event == TerminalEvent::ReachedEnd);
    CHECK(std::abs(back.back().state.u - start.u) < 1e-8);
    CHECK(std::abs(back.back().state.v + start.v) < 1e-8);
  }
}
