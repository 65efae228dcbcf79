#include "gmspike/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

#include "gmspike/errors.hpp"

namespace gmspike {

namespace {

constexpr std::string_view kCsvHeader = "rho,u_analytic,u_numeric,v_numeric,abs_error\n";

struct CsvRow {
  double rho = 0.0;
  std::optional<double> u_analytic;
  std::optional<double> u_numeric;
  std::optional<double> v_numeric;
  std::optional<double> abs_error;
};

struct Failure {
  std::string message;
  std::optional<ScanTable> table;
  std::optional<Bracket> bracket;
};

void write_cell(std::ostream& os, const std::optional<double>& value) {
  if (value) os << format_number(*value);
}

void write_csv(std::ostream& os, const std::vector<CsvRow>& rows) {
  os << kCsvHeader;
  for (const auto& row : rows) {
    os << format_number(row.rho) << ',';
    write_cell(os, row.u_analytic);
    os << ',';
    write_cell(os, row.u_numeric);
    os << ',';
    write_cell(os, row.v_numeric);
    os << ',';
    write_cell(os, row.abs_error);
    os << '\n';
  }
}

nlohmann::json rows_to_json(const std::vector<CsvRow>& rows) {
  auto cell = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows) {
    out.push_back({row.rho, cell(row.u_analytic), cell(row.u_numeric),
                   cell(row.v_numeric), cell(row.abs_error)});
  }
  return out;
}

nlohmann::json columns_json() {
  return {"rho", "u_analytic", "u_numeric", "v_numeric", "abs_error"};
}

nlohmann::json to_json(const ShotOutcome& shot) {
  return {{"a", shot.a},
          {"verdict", to_string(shot.verdict)},
          {"side", to_string(shot.side)},
          {"event", to_string(shot.event)},
          {"bc_residual", shot.bc_residual},
          {"bc_signed", shot.bc_signed}};
}

nlohmann::json to_json(const Failure& failure) {
  nlohmann::json j{{"message", failure.message}};
  if (failure.table) {
    nlohmann::json scan = nlohmann::json::array();
    for (const auto& e : failure.table->entries) scan.push_back(to_json(e));
    j["scan"] = scan;
  }
  if (failure.bracket) {
    j["bracket"] = {{"lo", failure.bracket->lo}, {"hi", failure.bracket->hi}};
  }
  return j;
}

void write_failure_csv(std::ostream& os, const Failure& failure) {
  os << kCsvHeader;
  os << "# error: " << failure.message << '\n';
  if (failure.table) {
    for (const auto& e : failure.table->entries) {
      os << "# scan a=" << format_number(e.a) << " verdict=" << to_string(e.verdict)
         << " event=" << to_string(e.event) << '\n';
    }
  }
  if (failure.bracket) {
    os << "# bracket lo=" << format_number(failure.bracket->lo)
       << " hi=" << format_number(failure.bracket->hi) << '\n';
  }
}

Failure failure_from_exception(const std::exception& e) {
  Failure f{e.what(), std::nullopt, std::nullopt};
  if (const auto* nb = dynamic_cast<const NoBracketError*>(&e)) f.table = nb->table();
  if (const auto* be = dynamic_cast<const BisectionError*>(&e)) f.bracket = be->last_bracket();
  return f;
}

nlohmann::json shooting_json(const ShootingResult& r) {
  nlohmann::json brackets = nlohmann::json::array();
  for (const auto& b : r.brackets) brackets.push_back({b.lo, b.hi});
  nlohmann::json scan = nlohmann::json::array();
  for (const auto& e : r.scan_table.entries) scan.push_back(to_json(e));
  return {{"a_star", r.a_star},
          {"amplitude", spike_amplitude(r.params.p)},
          {"bc_residual", r.bc_residual},
          {"bc_signed", r.bc_signed},
          {"converged", r.converged},
          {"terminal_event", to_string(r.trajectory.terminal_event)},
          {"accepted_steps", r.trajectory.accepted_steps},
          {"rejected_steps", r.trajectory.rejected_steps},
          {"first_integral_drift", check_first_integral(r.trajectory, r.params.p)},
          {"brackets", brackets},
          {"scan", scan}};
}

std::vector<CsvRow> comparison_rows(const ComparisonReport& report) {
  std::vector<CsvRow> rows;
  rows.reserve(report.grid.size());
  for (std::size_t i = 0; i < report.grid.size(); ++i) {
    rows.push_back({report.grid[i], report.analytic[i], report.numeric[i],
                    report.numeric_slope[i],
                    std::abs(report.analytic[i] - report.numeric[i])});
  }
  return rows;
}

// Trajectory samples mapped back to domain coordinates, ascending in rho.
std::vector<CsvRow> trajectory_rows(const ShootingResult& r) {
  std::vector<CsvRow> rows;
  for (const auto& s : r.trajectory.samples) {
    const bool boundary = r.params.kind == SpikeKind::Boundary;
    const double rho = boundary ? r.params.peak_rho - s.rho : r.params.peak_rho + s.rho;
    const double v = boundary ? -s.state.v : s.state.v;
    const double exact = eval_spike_rho(r.params, rho);
    rows.push_back({rho, exact, s.state.u, v, std::abs(exact - s.state.u)});
  }
  if (r.params.kind == SpikeKind::Boundary) std::reverse(rows.begin(), rows.end());
  return rows;
}

class Emitter {
 public:
  Emitter(const RunConfig& config, std::ostream& log, RunOutcome& outcome)
      : config_(config), log_(log), outcome_(outcome) {}

  void write(const std::filesystem::path& path, const std::string& content) {
    if (path.empty()) {
      log_ << content;
      return;
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << content;
    outcome_.files.push_back(path);
  }

  void rows(const std::filesystem::path& path, const std::vector<CsvRow>& rows,
            nlohmann::json summary) {
    if (config_.output_format == OutputFormat::Csv) {
      std::ostringstream os;
      write_csv(os, rows);
      write(path, os.str());
    } else {
      nlohmann::json doc{{"config", to_json(config_)},
                         {"summary", std::move(summary)},
                         {"columns", columns_json()},
                         {"rows", rows_to_json(rows)}};
      write(path, doc.dump(2) + "\n");
    }
  }

  void failure(const std::filesystem::path& path, const Failure& f) {
    log_ << "error: " << f.message << '\n';
    if (config_.output_format == OutputFormat::Csv) {
      std::ostringstream os;
      write_failure_csv(os, f);
      write(path, os.str());
    } else {
      nlohmann::json doc{{"config", to_json(config_)}, {"error", to_json(f)}};
      write(path, doc.dump(2) + "\n");
    }
  }

 private:
  const RunConfig& config_;
  std::ostream& log_;
  RunOutcome& outcome_;
};

std::vector<double> grid_for(const RunConfig& config, const ProblemParams& params,
                             const ShootingConfig& shooting) {
  const GridSpec spec = config.grid.value_or(default_grid(config.command, params, shooting));
  return spec.points();
}

int run_analytic(const RunConfig& config, Emitter& emit, std::ostream& log) {
  std::vector<CsvRow> rows;
  for (const double rho : grid_for(config, config.params, config.shooting)) {
    rows.push_back({rho, eval_spike_rho(config.params, rho), {}, {}, {}});
  }
  log << "amplitude=" << format_number(spike_amplitude(config.params.p)) << '\n';
  emit.rows(config.output_path, rows,
            {{"amplitude", spike_amplitude(config.params.p)}});
  return kExitOk;
}

int run_residual(const RunConfig& config, Emitter& emit, std::ostream& log) {
  const auto grid = grid_for(config, config.params, config.shooting);
  const auto residual = ode_residual(config.params, grid);
  std::vector<CsvRow> rows;
  double max_residual = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = std::abs(residual[i]);
    max_residual = std::max(max_residual, r);
    rows.push_back({grid[i], eval_spike_rho(config.params, grid[i]), {}, {}, r});
  }
  log << "max_residual=" << format_number(max_residual) << '\n';
  emit.rows(config.output_path, rows, {{"max_residual", max_residual}});
  return max_residual < 1e-9 ? kExitOk : kExitSolverFailure;
}

int run_shoot(const RunConfig& config, Emitter& emit, std::ostream& log) {
  const ShootingConfig cfg = resolve_shooting(config, config.params);
  try {
    const ShootingResult r = shoot(config.params, cfg);
    log << "a_star=" << format_number(r.a_star)
        << " bc_residual=" << format_number(r.bc_residual)
        << " converged=" << (r.converged ? "true" : "false") << '\n';
    emit.rows(config.output_path, trajectory_rows(r), shooting_json(r));
    return r.converged ? kExitOk : kExitSolverFailure;
  } catch (const SolverError& e) {
    emit.failure(config.output_path, failure_from_exception(e));
    return kExitSolverFailure;
  }
}

int run_compare(const RunConfig& config, Emitter& emit, std::ostream& log) {
  const ShootingConfig cfg = resolve_shooting(config, config.params);
  try {
    const ShootingResult r = shoot(config.params, cfg);
    const ComparisonReport report =
        compare(config.params, r, grid_for(config, config.params, cfg));
    log << "a_star=" << format_number(r.a_star)
        << " max_abs_err=" << format_number(report.max_abs_err)
        << " l2_err=" << format_number(report.l2_err) << '\n';
    nlohmann::json summary = shooting_json(r);
    summary["max_abs_err"] = report.max_abs_err;
    summary["l2_err"] = report.l2_err;
    emit.rows(config.output_path, comparison_rows(report), summary);
    return kExitOk;
  } catch (const SolverError& e) {
    emit.failure(config.output_path, failure_from_exception(e));
    return kExitSolverFailure;
  }
}

struct SweepCase {
  SweepRow row;
  std::optional<ComparisonReport> report;
  std::optional<ShootingResult> shot;
  std::optional<Failure> failure;
};

SweepCase run_sweep_case(const RunConfig& config, double p, SpikeKind kind) {
  SweepCase out;
  const ProblemParams params =
      kind == SpikeKind::Inner
          ? ProblemParams::inner(p, config.params.epsilon, config.params.L)
          : ProblemParams::boundary(p, config.params.epsilon, config.params.L);
  out.row.p = p;
  out.row.kind = kind;
  out.row.amplitude = spike_amplitude(p);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    const ShootingConfig cfg = resolve_shooting(config, params);
    ShootingResult r = shoot(params, cfg);
    out.row.a_star = r.a_star;
    out.row.bc_residual = r.bc_residual;
    out.row.bc_signed = r.bc_signed;
    out.row.converged = r.converged;
    out.report = compare(params, r, grid_for(config, params, cfg));
    out.row.max_abs_err = out.report->max_abs_err;
    out.row.l2_err = out.report->l2_err;
    out.shot = std::move(r);
  } catch (const std::exception& e) {
    out.failure = failure_from_exception(e);
    out.row.converged = false;
    out.row.error = e.what();
    if (!out.report) out.row.max_abs_err = out.row.l2_err = nan;
    if (!out.shot && out.row.a_star == 0.0) {
      out.row.a_star = out.row.bc_residual = out.row.bc_signed = nan;
    }
  }
  return out;
}

std::string case_stem(double p, SpikeKind kind) {
  return "p" + format_number(p) + "_" + std::string(to_string(kind));
}

int run_sweep(const RunConfig& config, Emitter& emit, std::ostream& log) {
  if (config.output_path.empty()) {
    throw DomainError("sweep needs an output directory");
  }
  constexpr double kExponents[] = {2.0, 3.0, 4.0};
  constexpr SpikeKind kKinds[] = {SpikeKind::Inner, SpikeKind::Boundary};

  std::vector<std::future<SweepCase>> jobs;
  for (const double p : kExponents) {
    for (const SpikeKind kind : kKinds) {
      jobs.push_back(std::async(std::launch::async, run_sweep_case,
                                std::cref(config), p, kind));
    }
  }
  std::vector<SweepCase> cases;
  for (auto& job : jobs) cases.push_back(job.get());

  const std::string ext = config.output_format == OutputFormat::Csv ? ".csv" : ".json";
  bool all_ok = true;
  for (const auto& c : cases) {
    const auto path = config.output_path / (case_stem(c.row.p, c.row.kind) + ext);
    if (c.report) {
      nlohmann::json summary = shooting_json(*c.shot);
      summary["max_abs_err"] = c.report->max_abs_err;
      summary["l2_err"] = c.report->l2_err;
      emit.rows(path, comparison_rows(*c.report), summary);
    } else {
      emit.failure(path, *c.failure);
    }
    all_ok = all_ok && c.row.converged && c.report.has_value();
    log << case_stem(c.row.p, c.row.kind) << " a_star=" << format_number(c.row.a_star)
        << " max_abs_err=" << format_number(c.row.max_abs_err)
        << " converged=" << (c.row.converged ? "true" : "false") << '\n';
  }

  if (config.output_format == OutputFormat::Csv) {
    std::ostringstream os;
    os << "p,kind,amplitude,a_star,max_abs_err,l2_err,bc_residual,bc_signed,converged\n";
    for (const auto& c : cases) {
      const SweepRow& r = c.row;
      os << format_number(r.p) << ',' << to_string(r.kind) << ','
         << format_number(r.amplitude) << ',' << format_number(r.a_star) << ','
         << format_number(r.max_abs_err) << ',' << format_number(r.l2_err) << ','
         << format_number(r.bc_residual) << ',' << format_number(r.bc_signed) << ','
         << (r.converged ? "true" : "false") << '\n';
    }
    emit.write(config.output_path / "summary.csv", os.str());
  } else {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : cases) rows.push_back(to_json(c.row));
    nlohmann::json doc{{"config", to_json(config)}, {"cases", rows}};
    emit.write(config.output_path / "summary.json", doc.dump(2) + "\n");
  }
  return all_ok ? kExitOk : kExitSolverFailure;
}

nlohmann::json integrator_json(const IntegratorConfig& c) {
  nlohmann::json j{{"rel_tol", c.rel_tol}, {"abs_tol", c.abs_tol},
                   {"h_init", c.h_init},   {"h_min", c.h_min},
                   {"h_max", c.h_max},     {"u_cap", nullptr}};
  if (c.u_cap) j["u_cap"] = *c.u_cap;
  return j;
}

nlohmann::json shooting_config_json(const ShootingConfig& c) {
  return {{"delta", c.delta},
          {"eta", c.eta},
          {"rho_l", c.rho_l},
          {"scan_points", c.scan_points},
          {"refine_tol", c.refine_tol},
          {"max_bisections", c.max_bisections},
          {"integrator", integrator_json(c.integrator)}};
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Analytic: return "analytic";
    case Command::Shoot: return "shoot";
    case Command::Compare: return "compare";
    case Command::Residual: return "residual";
    case Command::Sweep: return "sweep";
  }
  return "?";
}

Command command_from_string(std::string_view name) {
  for (const Command c : {Command::Analytic, Command::Shoot, Command::Compare,
                          Command::Residual, Command::Sweep}) {
    if (to_string(c) == name) return c;
  }
  throw DomainError("unknown command '" + std::string(name) + "'");
}

std::string_view to_string(OutputFormat format) {
  return format == OutputFormat::Csv ? "csv" : "json";
}

OutputFormat output_format_from_string(std::string_view name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  throw DomainError("unknown output format '" + std::string(name) + "'");
}

GridSpec GridSpec::parse(std::string_view text) {
  const auto first = text.find(':');
  const auto second = first == std::string_view::npos ? first : text.find(':', first + 1);
  if (second == std::string_view::npos || text.find(':', second + 1) != std::string_view::npos) {
    throw DomainError("grid must read start:end:count");
  }
  auto parse_double = [](std::string_view s) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw DomainError("bad number '" + std::string(s) + "' in grid");
    }
    return value;
  };
  GridSpec spec;
  spec.start = parse_double(text.substr(0, first));
  spec.end = parse_double(text.substr(first + 1, second - first - 1));
  const auto count_text = text.substr(second + 1);
  const auto [ptr, ec] =
      std::from_chars(count_text.data(), count_text.data() + count_text.size(), spec.count);
  if (ec != std::errc() || ptr != count_text.data() + count_text.size()) {
    throw DomainError("bad grid count '" + std::string(count_text) + "'");
  }
  if (spec.count < 2) throw DomainError("grid count must be at least 2");
  if (!(spec.start < spec.end)) throw DomainError("grid needs start < end");
  return spec;
}

void RunConfig::validate() const {
  params.validate();
  shooting.validate();
  if (grid && (grid->count < 2 || !(grid->start < grid->end))) {
    throw DomainError("grid needs start < end and count >= 2");
  }
  if (command == Command::Sweep && output_path.empty()) {
    throw DomainError("sweep needs --out DIR");
  }
}

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

void write_comparison_csv(std::ostream& os, const ComparisonReport& report) {
  write_csv(os, comparison_rows(report));
}

GridSpec default_grid(Command command, const ProblemParams& params,
                      const ShootingConfig& shooting) {
  const bool dense = command == Command::Analytic || command == Command::Residual;
  const int count = dense ? 401 : 241;
  if (params.kind == SpikeKind::Boundary) {
    const double start =
        dense ? 0.0 : std::max(0.0, params.peak_rho - shooting.rho_l);
    return {start, params.peak_rho, count};
  }
  const double half = dense ? 10.0 : shooting.rho_l;
  return {params.peak_rho - half, params.peak_rho + half, count};
}

ShootingConfig resolve_shooting(const RunConfig& config, const ProblemParams& params) {
  ShootingConfig cfg = config.shooting;
  if (config.auto_rho_l) cfg.rho_l = ShootingConfig::defaults_for(params).rho_l;
  return cfg;
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j{
      {"command", to_string(c.command)},
      {"params",
       {{"p", c.params.p},
        {"epsilon", c.params.epsilon},
        {"L", c.params.L},
        {"peak_rho", c.params.peak_rho},
        {"kind", to_string(c.params.kind)}}},
      {"shooting", shooting_config_json(c.shooting)},
      {"auto_rho_l", c.auto_rho_l},
      {"grid", nullptr},
      {"output_path", c.output_path.generic_string()},
      {"output_format", to_string(c.output_format)},
  };
  if (c.grid) j["grid"] = {{"start", c.grid->start}, {"end", c.grid->end}, {"count", c.grid->count}};
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  c.command = command_from_string(j.at("command").get<std::string>());
  const auto& p = j.at("params");
  c.params.p = p.at("p").get<double>();
  c.params.epsilon = p.at("epsilon").get<double>();
  c.params.L = p.at("L").get<double>();
  c.params.peak_rho = p.at("peak_rho").get<double>();
  c.params.kind = spike_kind_from_string(p.at("kind").get<std::string>());
  const auto& s = j.at("shooting");
  c.shooting.delta = s.at("delta").get<double>();
  c.shooting.eta = s.at("eta").get<double>();
  c.shooting.rho_l = s.at("rho_l").get<double>();
  c.shooting.scan_points = s.at("scan_points").get<int>();
  c.shooting.refine_tol = s.at("refine_tol").get<double>();
  c.shooting.max_bisections = s.at("max_bisections").get<int>();
  const auto& i = s.at("integrator");
  c.shooting.integrator.rel_tol = i.at("rel_tol").get<double>();
  c.shooting.integrator.abs_tol = i.at("abs_tol").get<double>();
  c.shooting.integrator.h_init = i.at("h_init").get<double>();
  c.shooting.integrator.h_min = i.at("h_min").get<double>();
  c.shooting.integrator.h_max = i.at("h_max").get<double>();
  if (!i.at("u_cap").is_null()) c.shooting.integrator.u_cap = i.at("u_cap").get<double>();
  c.auto_rho_l = j.at("auto_rho_l").get<bool>();
  if (!j.at("grid").is_null()) {
    const auto& g = j.at("grid");
    c.grid = GridSpec{g.at("start").get<double>(), g.at("end").get<double>(),
                      g.at("count").get<int>()};
  }
  c.output_path = j.at("output_path").get<std::string>();
  c.output_format = output_format_from_string(j.at("output_format").get<std::string>());
  return c;
}

nlohmann::json to_json(const ComparisonReport& r) {
  return {{"p", r.p},
          {"kind", to_string(r.kind)},
          {"a_star", r.a_star},
          {"max_abs_err", r.max_abs_err},
          {"l2_err", r.l2_err},
          {"bc_residual", r.bc_residual},
          {"bc_signed", r.bc_signed},
          {"settings", shooting_config_json(r.settings)},
          {"grid", r.grid},
          {"analytic", r.analytic},
          {"numeric", r.numeric}};
}

nlohmann::json to_json(const SweepRow& r) {
  nlohmann::json j{{"p", r.p},
                   {"kind", to_string(r.kind)},
                   {"amplitude", r.amplitude},
                   {"a_star", r.a_star},
                   {"max_abs_err", r.max_abs_err},
                   {"l2_err", r.l2_err},
                   {"bc_residual", r.bc_residual},
                   {"bc_signed", r.bc_signed},
                   {"converged", r.converged}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

RunOutcome run(const RunConfig& config, std::ostream& log) {
  RunOutcome outcome;
  try {
    config.validate();
  } catch (const DomainError& e) {
    log << "usage error: " << e.what() << '\n';
    outcome.exit_code = kExitUsage;
    return outcome;
  }
  Emitter emit(config, log, outcome);
  try {
    switch (config.command) {
      case Command::Analytic: outcome.exit_code = run_analytic(config, emit, log); break;
      case Command::Residual: outcome.exit_code = run_residual(config, emit, log); break;
      case Command::Shoot: outcome.exit_code = run_shoot(config, emit, log); break;
      case Command::Compare: outcome.exit_code = run_compare(config, emit, log); break;
      case Command::Sweep: outcome.exit_code = run_sweep(config, emit, log); break;
    }
  } catch (const DomainError& e) {
    log << "usage error: " << e.what() << '\n';
    outcome.exit_code = kExitUsage;
  }
  return outcome;
}

}  // namespace gmspike
