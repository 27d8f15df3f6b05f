#include "qpoisson/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "qpoisson/noise.hpp"

namespace qpoisson {

namespace {

// Ancilla-free multi-controlled X with c controls.
std::uint64_t mcx_cost(std::uint64_t c) { return c == 0 ? 0 : 2 * c * c - 2 * c + 1; }

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

double analytic_success_probability(const Eigen::VectorXd& lambdas) {
  if (lambdas.size() == 0 || lambdas.minCoeff() < 1.0) {
    throw DomainError("analytic_success_probability: eigenvalues must be >= 1");
  }
  return 100.0 * lambdas.array().square().inverse().sum();
}

Eigen::VectorXd truncated_lambdas(const AngleTable& table) {
  return Eigen::Map<const Eigen::VectorXd>(table.effective_lambdas.data(),
                                           static_cast<Eigen::Index>(table.size()));
}

double expected_success_probability(const EigenData& eigs, const AngleTable& table) {
  double sum = 0.0;
  for (std::size_t j = 0; j < table.size(); ++j) {
    const double s = std::sin(std::numbers::pi * table.decoded_omega(j));
    const double beta = eigs.betas(static_cast<Eigen::Index>(j));
    sum += beta * beta * s * s;
  }
  return 100.0 * sum;
}

Eigen::VectorXd predicted_solution(const EigenData& eigs, const AngleTable& table) {
  Eigen::VectorXd weights(static_cast<Eigen::Index>(table.size()));
  for (std::size_t j = 0; j < table.size(); ++j) {
    weights(static_cast<Eigen::Index>(j)) = eigs.betas(static_cast<Eigen::Index>(j)) *
                                            std::sin(std::numbers::pi * table.decoded_omega(j));
  }
  return (eigs.eigvecs * weights).cwiseAbs().normalized();
}

double empirical_success_probability(const RunResult& result) {
  if (result.shots < 1) throw DomainError("empirical_success_probability: shots must be >= 1");
  std::uint64_t kept = 0;
  for (const auto& [key, count] : result.histogram) {
    if (!key.empty() && key.front() == '1') kept += count;
  }
  return 100.0 * static_cast<double>(kept) / static_cast<double>(result.shots);
}

std::uint64_t estimated_two_qubit_gates(const Gate& gate) {
  const auto c = static_cast<std::uint64_t>(gate.controls.size());
  switch (gate.kind) {
    case GateKind::Hadamard:
    case GateKind::PauliX:
    case GateKind::Ry:
      return 0;
    case GateKind::Phase:
    case GateKind::MultiControlledRy:
      return 2 * mcx_cost(c);
    case GateKind::MultiControlledX:
      return mcx_cost(c);
    case GateKind::Swap:
      return 3;
    case GateKind::ControlledUnitary: {
      const auto t = static_cast<std::uint64_t>(gate.targets.size());
      if (c > 0) return std::uint64_t{1} << (2 * t);
      return t < 2 ? 0 : std::uint64_t{1} << (2 * (t - 1));
    }
  }
  return 0;
}

ResourceReport resource_report(const Circuit& circuit) {
  ResourceReport report;
  const auto& layout = circuit.layout;
  report.total_qubits = layout.total();
  report.reg_b = layout.reg_b;
  report.reg_e = layout.reg_e;
  report.reg_a = layout.reg_a;
  report.ancilla = layout.has_ancilla ? 1 : 0;

  std::vector<std::uint64_t> level(static_cast<std::size_t>(report.total_qubits), 0);
  for (const auto& g : circuit.gates) {
    ++report.gate_counts[to_string(g.kind)];
    const std::uint64_t two_qubit = estimated_two_qubit_gates(g);
    report.estimated_cnots += two_qubit;
    // Greedy scheduling: the decomposed block occupies every touched qubit.
    std::uint64_t start = 0;
    for (const auto* qs : {&g.controls, &g.targets}) {
      for (int q : *qs) start = std::max(start, level[static_cast<std::size_t>(q)]);
    }
    const std::uint64_t end = start + std::max<std::uint64_t>(1, two_qubit);
    for (const auto* qs : {&g.controls, &g.targets}) {
      for (int q : *qs) level[static_cast<std::size_t>(q)] = end;
    }
  }
  report.depth = level.empty() ? 0 : *std::max_element(level.begin(), level.end());
  report.estimated_fidelity = fidelity_estimate(report.estimated_cnots, kCnotAccuracy);
  report.log10_fidelity = static_cast<double>(report.estimated_cnots) * std::log10(kCnotAccuracy);
  return report;
}

void to_json(nlohmann::json& j, const ResourceReport& report) {
  j = nlohmann::json{{"total_qubits", report.total_qubits},
                     {"registers",
                      {{"B", report.reg_b},
                       {"E", report.reg_e},
                       {"A", report.reg_a},
                       {"ancilla", report.ancilla}}},
                     {"gate_counts", report.gate_counts},
                     {"depth", report.depth},
                     {"estimated_cnots", report.estimated_cnots},
                     {"estimated_fidelity", report.estimated_fidelity},
                     {"log10_fidelity", report.log10_fidelity},
                     {"washed_out", washed_out(report.estimated_fidelity)}};
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = kSweepCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += r.problem + ',' + std::to_string(r.f) + ',' + std::to_string(r.l) + ',' + r.mode + ',' +
           fmt_num(r.rel_error) + ',' + fmt_num(r.sp_expected) + ',' +
           fmt_num(r.sp_analytic_truncated) + ',' + fmt_num(r.sp_analytic_exact) + ',' +
           std::to_string(r.qubits) + ',' + std::to_string(r.depth) + ',' +
           std::to_string(r.cnots_est) + '\n';
  }
  return out;
}

}  // namespace qpoisson
