#include "qpoisson/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qpoisson/analytics.hpp"
#include "qpoisson/noise.hpp"
#include "qpoisson/simulator.hpp"

namespace qpoisson::cli {

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::string problem_label(const ExperimentConfig& config) {
  return config.preset.empty() ? "n=" + std::to_string(config.n) : config.preset;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const ExperimentConfig& config, const std::string& text, std::ostream& out) {
  if (config.output.empty()) {
    out << text;
    return;
  }
  std::ofstream file(config.output, std::ios::binary);
  if (!file) throw DomainError("cannot write " + config.output);
  file << text;
}

nlohmann::json probabilities_json(const Eigen::VectorXd& probs, int width) {
  nlohmann::json out = nlohmann::json::object();
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 1e-15) continue;
    out[BitString(static_cast<std::uint64_t>(k), width).str()] = probs[k];
  }
  return out;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"table1-3x3", "table1-7x7", "table1-15x15"};
  return names;
}

Preset preset(const std::string& name) {
  if (name == "table1-3x3") return {2, {1.0 / std::sqrt(2.0), 0.5, 0.5}};
  if (name == "table1-7x7") return {3, {0.25, 0.25, 0.25, 0.25, 0.5, 0.5, 0.5}};
  if (name == "table1-15x15") {
    std::vector<double> b(12, 0.25);
    b.insert(b.end(), {0.5, 0.0, 0.0});
    return {4, b};
  }
  throw DomainError("unknown preset '" + name + "'");
}

void ExperimentConfig::resolve() {
  if (!preset.empty()) {
    const Preset p = cli::preset(preset);
    n = p.n;
    d = 1;
    b = p.b;
  }
  if (mode != "auto" && mode != "explicit" && mode != "fused") {
    throw DomainError("mode must be explicit, fused or auto (got '" + mode + "')");
  }
  if (backend != "exact" && backend != "sample") {
    throw DomainError("backend must be exact or sample (got '" + backend + "')");
  }
  if (format != "json" && format != "csv") {
    throw DomainError("format must be json or csv (got '" + format + "')");
  }
  if (shots < 1) throw DomainError("shots must be >= 1");
  if (n > 0 && i == 0) i = 2 * n + 2;
}

PoissonSystem ExperimentConfig::system() const {
  if (n < 1) throw DomainError("no problem given: use --preset, --n/--b, or --problem");
  return PoissonSystem(n, Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())),
                       d);
}

FixedPointFormat ExperimentConfig::fixed_point() const {
  return FixedPointFormat{i == 0 ? 2 * n + 2 : i, f, l};
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = nlohmann::json{{"preset", c.preset},   {"n", c.n},          {"d", c.d},
                     {"b", c.b},             {"i", c.i},          {"f", c.f},
                     {"l", c.l},             {"mode", c.mode},    {"backend", c.backend},
                     {"shots", c.shots},     {"seed", c.seed},    {"noise", c.noise},
                     {"format", c.format},   {"max_qubits", c.max_qubits}};
}

void merge_json(ExperimentConfig& c, const nlohmann::json& j) {
  try {
    if (j.contains("problem")) merge_json(c, j.at("problem"));
    if (j.contains("fmt")) merge_json(c, j.at("fmt"));
    if (j.contains("preset")) c.preset = j.at("preset").get<std::string>();
    if (j.contains("n")) c.n = j.at("n").get<int>();
    if (j.contains("d")) c.d = j.at("d").get<int>();
    if (j.contains("b")) c.b = j.at("b").get<std::vector<double>>();
    if (j.contains("i")) c.i = j.at("i").get<int>();
    if (j.contains("f")) c.f = j.at("f").get<int>();
    if (j.contains("l")) c.l = j.at("l").get<int>();
    if (j.contains("mode")) c.mode = j.at("mode").get<std::string>();
    if (j.contains("backend")) c.backend = j.at("backend").get<std::string>();
    if (j.contains("shots")) c.shots = j.at("shots").get<std::uint64_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("noise")) c.noise = j.at("noise").get<std::string>();
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    if (j.contains("format")) c.format = j.at("format").get<std::string>();
    if (j.contains("max_qubits")) c.max_qubits = j.at("max_qubits").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
}

RotationMode choose_mode(const ExperimentConfig& config, const PoissonSystem& system,
                         const AngleTable& table, std::vector<std::string>& warnings) {
  if (config.mode == "explicit") return RotationMode::Explicit;
  if (config.mode == "fused") return RotationMode::Fused;
  const int explicit_qubits = pipeline_layout(system, table, RotationMode::Explicit).total();
  if (explicit_qubits <= kAutoExplicitLimit) return RotationMode::Explicit;
  warnings.push_back("explicit mode needs " + std::to_string(explicit_qubits) +
                     " qubits (> " + std::to_string(kAutoExplicitLimit) +
                     "); using fused mode");
  return RotationMode::Fused;
}

nlohmann::json cmd_solve(const ExperimentConfig& config) {
  const PoissonSystem system = config.system();
  const FixedPointFormat fmt = config.fixed_point();
  const EigenData eigs = eigenpairs(system);
  const AngleTable table = build_angle_table(eigs, fmt);
  std::vector<std::string> warnings;
  const RotationMode mode = choose_mode(config, system, table, warnings);

  const Circuit circuit = build_pipeline(system, fmt, mode, BuildOptions{config.max_qubits});
  const Statevector state = run_exact(circuit, SimOptions{config.max_qubits});
  const PostSelection post = postselect(state, circuit.layout);
  const Eigen::VectorXd exact = exact_solve(system).cwiseAbs();

  nlohmann::json sp = {{"expected", expected_success_probability(eigs, table)},
                       {"simulated", 100.0 * post.success_prob},
                       {"analytic_truncated", analytic_success_probability(truncated_lambdas(table))},
                       {"analytic_exact", analytic_success_probability(eigs.lambdas)}};
  Eigen::VectorXd solution = post.solution;
  nlohmann::json run = nullptr;
  if (config.backend == "sample") {
    const RunResult result = sample_state(state, circuit.layout, config.shots, config.seed);
    solution = result.solution;
    sp["empirical"] = empirical_success_probability(result);
    run = result;
  }

  nlohmann::json resolved = config;
  resolved["mode"] = to_string(mode);
  return nlohmann::json{{"config", resolved},
                        {"warnings", warnings},
                        {"solution", to_std(solution)},
                        {"exact", to_std(exact)},
                        {"relative_error", relative_error(exact, solution)},
                        {"success_probability_percent", sp},
                        {"angle_table", table},
                        {"resources", resource_report(circuit)},
                        {"run", run}};
}

nlohmann::json cmd_verify_phase(const ExperimentConfig& config, const PhaseInput& input) {
  const PoissonSystem system = config.system();
  const FixedPointFormat fmt = config.fixed_point();
  const EigenData eigs = eigenpairs(system);
  const Eigen::Index dim = system.dim();

  const int selectors = (input.eigen_index != 0) + !input.eigen_weights.empty() + !input.input.empty();
  if (selectors != 1) {
    throw DomainError("verify-phase: give exactly one of --eigen-index, --eigen-weights, --input");
  }
  Eigen::VectorXd coeffs;
  if (input.eigen_index != 0) {
    if (input.eigen_index < 1 || input.eigen_index > dim) {
      throw DomainError("verify-phase: eigen index must be in 1.." + std::to_string(dim));
    }
    coeffs = eigs.eigvecs.col(input.eigen_index - 1);
  } else if (!input.eigen_weights.empty()) {
    if (static_cast<Eigen::Index>(input.eigen_weights.size()) != dim) {
      throw DomainError("verify-phase: expected " + std::to_string(dim) + " eigen weights");
    }
    coeffs = eigs.eigvecs * Eigen::Map<const Eigen::VectorXd>(input.eigen_weights.data(), dim);
  } else {
    if (static_cast<Eigen::Index>(input.input.size()) != dim) {
      throw DomainError("verify-phase: expected an input of " + std::to_string(dim) + " entries");
    }
    coeffs = Eigen::Map<const Eigen::VectorXd>(input.input.data(), dim);
  }
  if (!(coeffs.norm() > 0.0)) throw DomainError("verify-phase: input vector is zero");
  Eigen::VectorXd embedded = Eigen::VectorXd::Zero(dim + 1);
  embedded.tail(dim) = coeffs.normalized();

  const Circuit circuit = build_phase_verification(system, fmt, embedded);
  const Statevector state = run_exact(circuit, SimOptions{config.max_qubits});
  const std::vector<int> reg_e = circuit.layout.e_qubits();
  const Eigen::VectorXd probs = marginal_probabilities(state, reg_e);

  nlohmann::json eigenvalues = nlohmann::json::object();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const BitString enc = amplify_encode(eigs.lambdas(j), fmt);
    eigenvalues[enc.str()] = effective_lambda(enc, fmt);
  }
  nlohmann::json out{{"config", config},
                     {"probabilities", probabilities_json(probs, fmt.total_bits())},
                     {"eigenvalues", eigenvalues}};
  if (config.backend == "sample") {
    out["histogram"] = sample_register(state, reg_e, config.shots, config.seed);
  }
  return out;
}

namespace {

std::vector<SweepRow> sweep_rows(const ExperimentConfig& config, const std::vector<int>& f_values) {
  if (f_values.empty()) throw DomainError("sweep: at least one f value is required");
  const PoissonSystem system = config.system();
  const EigenData eigs = eigenpairs(system);
  const Eigen::VectorXd exact = exact_solve(system).cwiseAbs();
  std::vector<SweepRow> rows;
  for (int f : f_values) {
    ExperimentConfig c = config;
    c.f = f;
    const FixedPointFormat fmt = c.fixed_point();
    const AngleTable table = build_angle_table(eigs, fmt);
    std::vector<std::string> warnings;
    const RotationMode mode = choose_mode(c, system, table, warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    const Circuit circuit = build_pipeline(system, fmt, mode, BuildOptions{c.max_qubits});
    const Statevector state = run_exact(circuit, SimOptions{c.max_qubits});
    Eigen::VectorXd solution = postselect(state, circuit.layout).solution;
    if (c.backend == "sample") solution = sample_state(state, circuit.layout, c.shots, c.seed).solution;
    const ResourceReport report = resource_report(circuit);
    rows.push_back(SweepRow{problem_label(c), f, c.l, to_string(mode),
                            relative_error(exact, solution),
                            expected_success_probability(eigs, table),
                            analytic_success_probability(truncated_lambdas(table)),
                            analytic_success_probability(eigs.lambdas), report.total_qubits,
                            report.depth, report.estimated_cnots});
  }
  return rows;
}

}  // namespace

std::string cmd_sweep(const ExperimentConfig& config, const std::vector<int>& f_values) {
  return sweep_csv(sweep_rows(config, f_values));
}

nlohmann::json cmd_sweep_json(const ExperimentConfig& config, const std::vector<int>& f_values) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : sweep_rows(config, f_values)) {
    rows.push_back({{"problem", r.problem},
                    {"f", r.f},
                    {"l", r.l},
                    {"mode", r.mode},
                    {"rel_error", r.rel_error},
                    {"sp_expected", r.sp_expected},
                    {"sp_analytic_truncated", r.sp_analytic_truncated},
                    {"sp_analytic_exact", r.sp_analytic_exact},
                    {"qubits", r.qubits},
                    {"depth", r.depth},
                    {"cnots_est", r.cnots_est}});
  }
  return nlohmann::json{{"config", config}, {"rows", rows}};
}

namespace {

struct ResourceRow {
  int size;
  int n;
  FixedPointFormat fmt;
  RotationMode mode;
  ResourceReport report;
};

std::vector<ResourceRow> resource_rows(const ExperimentConfig& config, const std::vector<int>& sizes) {
  std::vector<ResourceRow> rows;
  for (int size : sizes) {
    int n = 0;
    while ((1 << n) - 1 < size && n < 30) ++n;
    if ((1 << n) - 1 != size || n < 1) {
      throw DomainError("resources: size " + std::to_string(size) + " is not of the form 2^n - 1");
    }
    ExperimentConfig c = config;
    c.preset.clear();
    c.n = n;
    c.i = 2 * n + 2;
    c.b.assign(static_cast<std::size_t>(size), 1.0);
    for (const auto& name : preset_names()) {
      if (preset(name).n == n) c.b = preset(name).b;
    }
    const PoissonSystem system = c.system();
    const FixedPointFormat fmt = c.fixed_point();
    const AngleTable table = build_angle_table(eigenpairs(system), fmt);
    std::vector<std::string> warnings;
    const RotationMode mode = choose_mode(c, system, table, warnings);
    // Resource estimates never allocate a state, so only the encoding limits apply.
    const Circuit circuit = build_pipeline(system, fmt, mode, BuildOptions{62});
    rows.push_back({size, n, fmt, mode, resource_report(circuit)});
  }
  return rows;
}

}  // namespace

std::string cmd_resources(const ExperimentConfig& config, const std::vector<int>& sizes) {
  std::string out = kResourcesCsvHeader;
  out += '\n';
  for (const auto& row : resource_rows(config, sizes)) {
    const ResourceReport& r = row.report;
    char fid[64];
    std::snprintf(fid, sizeof fid, "%.6g,%.6g", r.estimated_fidelity, r.log10_fidelity);
    out += std::to_string(row.size) + "x" + std::to_string(row.size) + ',' + std::to_string(row.n) +
           ',' + std::to_string(row.fmt.frac_bits) + ',' + std::to_string(row.fmt.angle_bits) + ',' +
           to_string(row.mode) + ',' + std::to_string(r.total_qubits) + ',' + std::to_string(r.reg_b) +
           ',' + std::to_string(r.reg_e) + ',' + std::to_string(r.reg_a) + ',' +
           std::to_string(r.depth) + ',' + std::to_string(r.estimated_cnots) + ',' + fid + '\n';
  }
  return out;
}

nlohmann::json cmd_resources_json(const ExperimentConfig& config, const std::vector<int>& sizes) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : resource_rows(config, sizes)) {
    nlohmann::json r = row.report;
    r["problem"] = std::to_string(row.size) + "x" + std::to_string(row.size);
    r["n"] = row.n;
    r["fmt"] = row.fmt;
    r["mode"] = to_string(row.mode);
    rows.push_back(std::move(r));
  }
  return nlohmann::json{{"config", config}, {"rows", rows}};
}

nlohmann::json cmd_mitigate_demo(const ExperimentConfig& config, const std::string& distribution,
                                 double p01, double p10) {
  Eigen::VectorXd b;
  int n = 0;
  if (distribution == "fig11") {
    const PoissonSystem system = config.system();
    n = system.n();
    b = system.normalized_b();
  } else if (distribution == "delta") {
    n = config.n > 0 ? config.n : 2;
    b = Eigen::VectorXd::Zero((Eigen::Index{1} << n) - 1);
    b(0) = 1.0;
  } else {
    throw DomainError("mitigate-demo: distribution must be fig11 or delta");
  }
  const ReadoutModel model =
      config.noise.empty() ? ReadoutModel::uniform(n, p01, p10) : ReadoutModel::from_file(config.noise);
  if (model.width() != n) {
    throw DomainError("mitigate-demo: readout model covers " + std::to_string(model.width()) +
                      " qubits, register B has " + std::to_string(n));
  }

  Circuit circuit;
  circuit.layout = RegisterLayout{n, 0, 0, false};
  Eigen::VectorXd embedded = Eigen::VectorXd::Zero(b.size() + 1);
  embedded.tail(b.size()) = b;
  circuit.gates.push_back(state_preparation(embedded, circuit.layout));
  const Statevector state = run_exact(circuit);
  const std::vector<int> reg_b = circuit.layout.b_qubits();

  const Eigen::VectorXd ideal = marginal_probabilities(state, reg_b);
  const Histogram clean = sample_register(state, reg_b, config.shots, config.seed);
  const Histogram noisy = corrupt(clean, model, config.seed + 1);
  const Eigen::VectorXd measured = histogram_distribution(noisy, n);
  const Eigen::VectorXd mitigated = mitigate(measured, calibration_matrix(model, n));

  return nlohmann::json{{"config", config},
                        {"distribution", distribution},
                        {"ideal", probabilities_json(ideal, n)},
                        {"noisy_histogram", noisy},
                        {"noisy", probabilities_json(measured, n)},
                        {"mitigated", probabilities_json(mitigated, n)},
                        {"rel_error_unmitigated", relative_error(ideal, measured)},
                        {"rel_error_mitigated", relative_error(ideal, mitigated)}};
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum Poisson solver: circuit construction, simulation and analysis"};
  app.require_subcommand(1);

  ExperimentConfig flags;
  std::string config_path;
  std::string problem_path;
  std::string histogram_path;
  std::string dump_path;
  PhaseInput phase_input;
  std::vector<int> f_values;
  std::vector<int> sizes;
  std::string distribution = "fig11";
  double p01 = 0.02;
  double p10 = 0.05;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--preset", flags.preset, "table1-3x3 | table1-7x7 | table1-15x15");
    sub->add_option("--problem", problem_path, "problem JSON {n, d, b}");
    sub->add_option("--n", flags.n, "grid exponent");
    sub->add_option("--d", flags.d, "spatial dimensions");
    sub->add_option("--b", flags.b, "right-hand side values")->delimiter(',');
    sub->add_option("--i", flags.i, "integer bits of register E (default 2n+2)");
    sub->add_option("--f", flags.f, "amplification exponent");
    sub->add_option("--l", flags.l, "angle bits");
    sub->add_option("--mode", flags.mode, "explicit | fused | auto");
    sub->add_option("--backend", flags.backend, "exact | sample");
    sub->add_option("--shots", flags.shots);
    sub->add_option("--seed", flags.seed);
    sub->add_option("--noise", flags.noise, "readout model JSON");
    sub->add_option("--output", flags.output, "output path (default stdout)");
    sub->add_option("--format", flags.format, "json | csv");
    sub->add_option("--max-qubits", flags.max_qubits);
  };

  auto* solve = app.add_subcommand("solve", "run the solver pipeline");
  add_common(solve);
  solve->add_option("--histogram", histogram_path, "write the shot histogram as CSV");
  solve->add_option("--dump-circuit", dump_path, "write the gate list");

  auto* verify = app.add_subcommand("verify-phase", "measure register E after phase estimation");
  add_common(verify);
  verify->add_option("--eigen-index", phase_input.eigen_index, "1-based eigenvector input");
  verify->add_option("--eigen-weights", phase_input.eigen_weights, "eigenvector combination")
      ->delimiter(',');
  verify->add_option("--input", phase_input.input, "raw register-B vector")->delimiter(',');

  auto* sweep = app.add_subcommand("sweep", "relative error and success probability versus f");
  add_common(sweep);
  sweep->add_option("--f-values", f_values, "amplification exponents")->delimiter(',')->required();

  auto* resources = app.add_subcommand("resources", "resource estimates across problem sizes");
  add_common(resources);
  resources->add_option("--sizes", sizes, "matrix dimensions, e.g. 3,7,15")->delimiter(',');

  auto* mitigate_cmd = app.add_subcommand("mitigate-demo", "readout-error mitigation experiment");
  add_common(mitigate_cmd);
  mitigate_cmd->add_option("--distribution", distribution, "fig11 | delta");
  mitigate_cmd->add_option("--p01", p01);
  mitigate_cmd->add_option("--p10", p10);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    ExperimentConfig config;
    if (active == resources) config.mode = "fused";
    if (active == mitigate_cmd) {
      config.shots = 100000;
      config.preset = "table1-3x3";
    }
    if (!config_path.empty()) {
      try {
        merge_json(config, nlohmann::json::parse(read_file(config_path)));
      } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("config: ") + e.what());
      }
    }
    if (!problem_path.empty()) {
      const PoissonSystem sys = load_problem_file(problem_path);
      config.preset.clear();
      config.n = sys.n();
      config.d = sys.d();
      config.b = to_std(sys.b());
    }
    auto given = [&](const char* name) { return active->count(name) > 0; };
    if (given("--n") || given("--b")) config.preset.clear();
    if (given("--preset")) config.preset = flags.preset;
    if (given("--n")) config.n = flags.n;
    if (given("--d")) config.d = flags.d;
    if (given("--b")) config.b = flags.b;
    if (given("--i")) config.i = flags.i;
    if (given("--f")) config.f = flags.f;
    if (given("--l")) config.l = flags.l;
    if (given("--mode")) config.mode = flags.mode;
    if (given("--backend")) config.backend = flags.backend;
    if (given("--shots")) config.shots = flags.shots;
    if (given("--seed")) config.seed = flags.seed;
    if (given("--noise")) config.noise = flags.noise;
    if (given("--output")) config.output = flags.output;
    if (given("--format")) config.format = flags.format;
    if (given("--max-qubits")) config.max_qubits = flags.max_qubits;
    if ((active == sweep || active == resources) && !given("--format") &&
        (config_path.empty() || config.format == "json")) {
      config.format = "csv";
    }
    config.resolve();

    if (active == solve) {
      const nlohmann::json result = cmd_solve(config);
      for (const auto& w : result.at("warnings")) err << "warning: " << w.get<std::string>() << '\n';
      write_output(config, result.dump(2) + "\n", out);
      if (!histogram_path.empty()) {
        if (result.at("run").is_null()) throw DomainError("--histogram requires --backend sample");
        std::ofstream(histogram_path, std::ios::binary)
            << histogram_csv(result.at("run").at("histogram").get<Histogram>());
      }
      if (!dump_path.empty()) {
        const auto mode = result.at("config").at("mode").get<std::string>() == "explicit"
                              ? RotationMode::Explicit
                              : RotationMode::Fused;
        std::ofstream(dump_path, std::ios::binary)
            << build_pipeline(config.system(), config.fixed_point(), mode,
                              BuildOptions{config.max_qubits})
                   .dump();
      }
    } else if (active == verify) {
      write_output(config, cmd_verify_phase(config, phase_input).dump(2) + "\n", out);
    } else if (active == sweep) {
      write_output(config,
                   config.format == "csv" ? cmd_sweep(config, f_values)
                                          : cmd_sweep_json(config, f_values).dump(2) + "\n",
                   out);
    } else if (active == resources) {
      write_output(config,
                   config.format == "csv" ? cmd_resources(config, sizes)
                                          : cmd_resources_json(config, sizes).dump(2) + "\n",
                   out);
    } else if (active == mitigate_cmd) {
      write_output(config, cmd_mitigate_demo(config, distribution, p01, p10).dump(2) + "\n", out);
    }
  } catch (const ResourceError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const SimulationError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace qpoisson::cli
