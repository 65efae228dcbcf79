#include "gmspike/cli.hpp"

#include <algorithm>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "gmspike/errors.hpp"

namespace gmspike {

namespace {

struct Options {
  double p = 2.0;
  double epsilon = 0.08;
  double L = 1.0;
  std::string spike = "inner";
  double eta = 0.01;
  double delta = 0.1;
  std::optional<double> rho_l;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  std::optional<std::string> grid;
  std::string format = "csv";
  std::string out;
};

void add_options(CLI::App& sub, Options& o, bool sweep) {
  if (!sweep) {
    sub.add_option("--p", o.p, "Exponent p in (1, inf)")->capture_default_str();
    sub.add_option("--spike", o.spike, "Spike kind")
        ->check(CLI::IsMember({"inner", "boundary"}))
        ->capture_default_str();
  }
  sub.add_option("--epsilon", o.epsilon, "Singular parameter epsilon")->capture_default_str();
  sub.add_option("--L", o.L, "Half-domain length")->capture_default_str();
  sub.add_option("--eta", o.eta, "Artificial boundary condition threshold")->capture_default_str();
  sub.add_option("--delta", o.delta, "Amplitude scan half-width")->capture_default_str();
  sub.add_option("--rho-l", o.rho_l, "Truncation distance from the peak");
  sub.add_option("--rel-tol", o.rel_tol, "Integrator relative tolerance")->capture_default_str();
  sub.add_option("--abs-tol", o.abs_tol, "Integrator absolute tolerance")->capture_default_str();
  sub.add_option("--grid", o.grid, "Output grid start:end:count (rho units)");
  sub.add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sub.add_option("--out", o.out, sweep ? "Output directory" : "Output file (default stdout)");
}

// "--grid -10:10:401" would otherwise read the negative start as a flag.
std::vector<std::string> join_grid_values(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--grid" && i + 1 < args.size()) {
      out.push_back("--grid=" + args[i + 1]);
      ++i;
    } else {
      out.push_back(args[i]);
    }
  }
  return out;
}

}  // namespace

RunConfig parse_command_line(const std::vector<std::string>& args) {
  return parse_command_line(args, std::cout, std::cerr);
}

RunConfig parse_command_line(const std::vector<std::string>& raw_args,
                             std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-spike solutions of the 1D shadow Gierer-Meinhardt problem",
               "gmspike"};
  app.require_subcommand(1);
  Options o;
  std::optional<Command> command;
  const std::pair<Command, const char*> subcommands[] = {
      {Command::Analytic, "Evaluate the closed-form spike on a grid"},
      {Command::Shoot, "Compute the spike with the shooting method"},
      {Command::Compare, "Compare the shot against the closed form"},
      {Command::Residual, "ODE residual of the closed form"},
      {Command::Sweep, "p = 2, 3, 4 x inner/boundary comparison files"},
  };
  for (const auto& [cmd, help] : subcommands) {
    auto* sub = app.add_subcommand(std::string(to_string(cmd)), help);
    add_options(*sub, o, cmd == Command::Sweep);
    sub->callback([&command, c = cmd] { command = c; });
  }

  auto args = join_grid_values(raw_args);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::Error& e) {
    app.exit(e, out, err);  // prints help or the parse error
    throw;
  }

  RunConfig config;
  config.command = *command;
  const SpikeKind kind = spike_kind_from_string(o.spike);
  config.params = kind == SpikeKind::Inner ? ProblemParams::inner(o.p, o.epsilon, o.L)
                                           : ProblemParams::boundary(o.p, o.epsilon, o.L);
  config.shooting = ShootingConfig::defaults_for(config.params);
  config.shooting.eta = o.eta;
  config.shooting.delta = o.delta;
  config.shooting.integrator.rel_tol = o.rel_tol;
  config.shooting.integrator.abs_tol = o.abs_tol;
  if (o.rho_l) {
    config.auto_rho_l = false;
    config.shooting.rho_l = *o.rho_l;
  }
  if (o.grid) config.grid = GridSpec::parse(*o.grid);
  config.output_format = output_format_from_string(o.format);
  config.output_path = o.out;
  if (config.command == Command::Sweep && config.output_path.empty()) {
    config.output_path = "sweep_output";
  }
  config.validate();
  return config;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  RunConfig config;
  try {
    config = parse_command_line(args, out, err);
  } catch (const CLI::CallForHelp&) {
    return kExitOk;
  } catch (const CLI::Error&) {
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    return run(config, out).exit_code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolverFailure;
  }
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace gmspike
