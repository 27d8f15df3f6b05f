#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpoisson/circuit.hpp"

namespace qpoisson {

/// Dense amplitudes over 2^q basis states; basis index bit k is qubit k.
class Statevector {
 public:
  explicit Statevector(int qubits);
  Statevector(int qubits, Eigen::VectorXcd amplitudes);

  static Statevector basis(int qubits, std::uint64_t index);

  int qubits() const { return qubits_; }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  Eigen::VectorXcd& amplitudes() { return amps_; }
  double norm() const { return amps_.norm(); }

 private:
  int qubits_;
  Eigen::VectorXcd amps_;
};

/// Default largest simulated register, 2^28 amplitudes.
inline constexpr int kDefaultMaxQubits = 28;

struct SimOptions {
  int max_qubits = kDefaultMaxQubits;
};

using Histogram = std::map<std::string, std::uint64_t>;

/// Name of the generator used for all sampling; doubles are formed from the
/// top 53 bits of each 64-bit draw.
inline constexpr const char* kRngAlgorithm = "mt19937_64";

struct RunResult {
  Eigen::VectorXd solution;  // magnitudes over register-B states 1..2^n-1
  double success_prob = 0.0;
  /// Keys are the ancilla bit followed by register B, most significant first.
  Histogram histogram;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  std::string rng = kRngAlgorithm;
};

void to_json(nlohmann::json& j, const RunResult& result);
/// `bitstring,count` lines with a header row.
std::string histogram_csv(const Histogram& histogram);

void apply_gate(Statevector& state, const Gate& gate);

Statevector run_exact(const Circuit& circuit, const SimOptions& options = {});

/// Marginal distribution of `qubits`; outcome bit k corresponds to qubits[k].
Eigen::VectorXd marginal_probabilities(const Statevector& state, const std::vector<int>& qubits);

struct PostSelection {
  Eigen::VectorXd solution;
  double success_prob = 0.0;
};

/// Conditions on ancilla = 1 and returns the register-B magnitudes.
PostSelection postselect(const Statevector& state, const RegisterLayout& layout);

/// Probability of ancilla = 1 with any register E or A qubit left nonzero.
double uncompute_leakage(const Statevector& state, const RegisterLayout& layout);

/// Draws `shots` measurements of `qubits` from the state's exact distribution.
/// Keys list qubits[size-1] first.
Histogram sample_register(const Statevector& state, const std::vector<int>& qubits,
                          std::uint64_t shots, std::uint64_t seed);

/// Measures ancilla and register B `shots` times and reconstructs the solution
/// from the ancilla = 1 records.
RunResult sample_state(const Statevector& state, const RegisterLayout& layout, std::uint64_t shots,
                       std::uint64_t seed);

RunResult sample(const Circuit& circuit, std::uint64_t shots, std::uint64_t seed,
                 const SimOptions& options = {});

}  // namespace qpoisson
