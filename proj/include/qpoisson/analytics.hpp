#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpoisson/circuit.hpp"
#include "qpoisson/encoding.hpp"
#include "qpoisson/simulator.hpp"

namespace qpoisson {

/// |exact - approx| / |exact|.
template <typename DerivedA, typename DerivedB>
double relative_error(const Eigen::MatrixBase<DerivedA>& exact,
                      const Eigen::MatrixBase<DerivedB>& approx) {
  if (exact.size() != approx.size()) {
    throw DomainError("relative_error: length mismatch (" + std::to_string(exact.size()) + " vs " +
                      std::to_string(approx.size()) + ")");
  }
  const double denom = exact.norm();
  if (!(denom > 0.0)) throw DomainError("relative_error: exact vector is zero");
  return (exact - approx).norm() / denom;
}

/// 100 * sum_j 1/lambda_j^2, in percent.
double analytic_success_probability(const Eigen::VectorXd& lambdas);

/// Effective (truncated) eigenvalues carried by an angle table.
Eigen::VectorXd truncated_lambdas(const AngleTable& table);

/// 100 * sum_j beta_j^2 sin^2(pi omega_hat_j), in percent: the exact ancilla-1
/// probability of the encoded pipeline.
double expected_success_probability(const EigenData& eigs, const AngleTable& table);

/// normalize(sum_j beta_j sin(pi omega_hat_j) u_j), magnitudes only.
Eigen::VectorXd predicted_solution(const EigenData& eigs, const AngleTable& table);

/// 100 * kept / shots, in percent.
double empirical_success_probability(const RunResult& result);

/// Elementary two-qubit gate estimates used by resource_report.
std::uint64_t estimated_two_qubit_gates(const Gate& gate);

/// Gate accuracy used for hardware fidelity estimates.
inline constexpr double kCnotAccuracy = 0.92;

struct ResourceReport {
  int total_qubits = 0;
  int reg_b = 0;
  int reg_e = 0;
  int reg_a = 0;
  int ancilla = 0;
  std::map<std::string, std::uint64_t> gate_counts;
  std::uint64_t depth = 0;
  std::uint64_t estimated_cnots = 0;
  double estimated_fidelity = 1.0;
  /// log10 of the fidelity; stays finite where the fidelity underflows.
  double log10_fidelity = 0.0;
};

ResourceReport resource_report(const Circuit& circuit);

void to_json(nlohmann::json& j, const ResourceReport& report);

struct SweepRow {
  std::string problem;
  int f = 0;
  int l = 0;
  std::string mode;
  double rel_error = 0.0;
  double sp_expected = 0.0;
  double sp_analytic_truncated = 0.0;
  double sp_analytic_exact = 0.0;
  int qubits = 0;
  std::uint64_t depth = 0;
  std::uint64_t cnots_est = 0;
};

inline constexpr const char* kSweepCsvHeader =
    "problem,f,l,mode,rel_error,sp_expected,sp_analytic_truncated,sp_analytic_exact,qubits,depth,"
    "cnots_est";

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace qpoisson
