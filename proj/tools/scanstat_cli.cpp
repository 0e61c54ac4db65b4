#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scanstat/config.hpp"
#include "scanstat/pipeline.hpp"
#include "scanstat/table_io.hpp"

using namespace scanstat;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> iter;
  std::optional<std::uint64_t> replicas;
  std::optional<std::string> output;
  std::optional<std::string> l_mode;
  std::optional<unsigned> threads;
  bool raw = false;
  bool with_sim = false;
};

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.iter) cfg.iter = *o.iter;
  if (o.replicas) cfg.sim_replicas = *o.replicas;
  if (o.output) cfg.output = *o.output;
  if (o.l_mode) cfg.l_mode = parse_l_mode(*o.l_mode, "--l-mode");
  if (o.threads) cfg.threads = *o.threads;
  validate(cfg);
  return cfg;
}

void emit(const Table& t, const std::string& path) {
  if (path.empty()) {
    write_table(std::cout, t);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_table(out, t);
}

void add_common_metadata(Table& t, const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> head = {
      {"tool", std::string("scanstat ") + kVersion},
      {"compiler", __VERSION__},
      {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                   std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
      {"config", to_json(cfg).dump()},
  };
  t.metadata.insert(t.metadata.begin(), head.begin(), head.end());
}

std::string describe_constants(const char* tag, const std::optional<Theorem1Constants>& c) {
  if (!c) return "";
  std::ostringstream os;
  os.precision(17);
  os << ' ' << tag << "(alpha=" << c->alpha << ",t2=" << c->t2 << ",l=" << c->l << ")";
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int run_approximate(const Overrides& o) {
  const auto start = std::chrono::steady_clock::now();
  const RunConfig cfg = resolve(o);
  const ExperimentSpec spec = to_spec(cfg);
  const auto records = estimate_quv(spec);

  // Rows are assembled one threshold at a time so that a failure stays local to its row.
  std::vector<ApproxRow> rows;
  std::vector<std::pair<std::string, std::string>> errors;
  for (const auto& rec : records) {
    try {
      rows.push_back(interpolated_approximation(spec, {rec}).front());
    } catch (const std::exception& e) {
      ApproxRow bad;
      bad.n = rec.n;
      bad.approx = bad.e_app = bad.e_sf = bad.e_sapp = bad.e_interp = bad.e_total = std::nan("");
      bad.bracket_lower = bad.bracket_upper = bad.approx;
      rows.push_back(bad);
      errors.emplace_back("error n=" + shortest(rec.n), e.what());
    }
  }

  std::optional<SimulationTable> sim;
  if (o.with_sim) sim = simulate_distribution(spec, cfg.sim_replicas);

  const auto [a1, a2] = slab_widths(spec);
  const bool exact = spec.geometry.source_cols % a1 == 0 && (independent_rows(spec) || spec.geometry.source_rows % a2 == 0);
  Table t = approx_table(rows, sim ? &*sim : nullptr, {o.raw, !exact});
  t.metadata.emplace_back("slab_widths", std::to_string(a1) + "x" + std::to_string(a2));
  t.metadata.emplace_back("path", exact ? "exact" : "interpolated");
  t.metadata.emplace_back("l_mode", to_string(cfg.l_mode));
  t.metadata.emplace_back("quv_sampling",
                          "one 3A1 x 3A2 source field per replica feeds all four Q_uv and every threshold");
  for (const auto& r : rows) {
    if (std::isnan(r.approx)) continue;
    std::ostringstream os;
    os.precision(17);
    os << "alpha1=" << r.alpha1 << " alpha2=" << r.alpha2 << " clamped=" << r.clamped
       << " alpha1_conservative=" << r.alpha1_conservative << describe_constants("outer", r.constants1)
       << describe_constants("inner", r.constants2);
    t.metadata.emplace_back("row n=" + shortest(r.n), os.str());
  }
  for (const auto& e : errors) t.metadata.push_back(e);
  if (sim) t.metadata.emplace_back("sim_replicas", std::to_string(sim->replicas));
  t.metadata.emplace_back("wall_time_s", std::to_string(seconds_since(start)));
  add_common_metadata(t, cfg);
  emit(t, cfg.output);
  for (const auto& [k, v] : errors) std::cerr << k << ": " << v << '\n';
  return errors.empty() ? 0 : 1;
}

int run_simulate(const Overrides& o) {
  const auto start = std::chrono::steady_clock::now();
  const RunConfig cfg = resolve(o);
  const auto sim = simulate_distribution(to_spec(cfg), cfg.sim_replicas);
  Table t = simulation_table(sim, {o.raw, false});
  t.metadata.emplace_back("sim_replicas", std::to_string(sim.replicas));
  t.metadata.emplace_back("wall_time_s", std::to_string(seconds_since(start)));
  add_common_metadata(t, cfg);
  emit(t, cfg.output);
  return 0;
}

Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_table(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scan statistics over block-factor random fields"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Overrides o;
  const auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--output", o.output, "output path (default stdout)");
    sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--raw", o.raw, "full-precision values");
  };

  auto* approx = app.add_subcommand("approximate", "two-step approximation with error ledger");
  add_run_flags(approx);
  approx->add_option("--iter", o.iter, "Monte Carlo iterations for Q_uv");
  approx->add_option("--l-mode", o.l_mode, "boundary | optimize")->check(CLI::IsMember({"boundary", "optimize"}));
  approx->add_flag("--sim", o.with_sim, "add a directly simulated column");
  approx->add_option("--replicas", o.replicas, "direct simulation replicas for --sim");

  auto* sim = app.add_subcommand("simulate", "direct Monte Carlo of the scan distribution");
  add_run_flags(sim);
  sim->add_option("--replicas", o.replicas, "direct simulation replicas");

  std::string approx_path, sim_path, plot_output;
  bool plot_raw = false;
  auto* plot = app.add_subcommand("plotdata", "pair an approximation table with a simulation table");
  plot->add_option("--approx", approx_path, "approximation table")->required()->check(CLI::ExistingFile);
  plot->add_option("--sim", sim_path, "simulation table")->check(CLI::ExistingFile);
  plot->add_option("--output", plot_output, "output path (default stdout)");
  plot->add_flag("--raw", plot_raw, "full-precision values");

  auto* check = app.add_subcommand("validate-config", "validate a configuration and print it resolved");
  check->add_option("-c,--config", o.config, "JSON run configuration")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*approx) return run_approximate(o);
    if (*sim) return run_simulate(o);
    if (*plot) {
      const Table a = read_file(approx_path);
      std::optional<Table> s;
      if (!sim_path.empty()) s = read_file(sim_path);
      Table t = plotdata_table(a, s ? &*s : nullptr, {plot_raw, false});
      emit(t, plot_output);
      return 0;
    }
    if (*check) {
      std::cout << to_json(resolve(o)).dump(2) << '\n';
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
