#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpoisson/circuit.hpp"
#include "qpoisson/encoding.hpp"
#include "qpoisson/model.hpp"

namespace qpoisson::cli {

/// Fully resolved experiment settings. Every output embeds this for provenance.
struct ExperimentConfig {
  std::string preset;  // "table1-3x3" | "table1-7x7" | "table1-15x15" | empty
  int n = 0;
  int d = 1;
  std::vector<double> b;
  int i = 0;  // 0 selects the default 2n + 2
  int f = 0;
  int l = 16;
  std::string mode = "auto";      // explicit | fused | auto
  std::string backend = "exact";  // exact | sample
  std::uint64_t shots = 1000000;
  std::uint64_t seed = 2024;
  std::string noise;  // readout model path
  std::string output;
  std::string format = "json";  // json | csv
  int max_qubits = 28;

  /// Fills n/b from the preset when one is named.
  void resolve();
  PoissonSystem system() const;
  FixedPointFormat fixed_point() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& config);
/// Overlays keys present in `j` onto `config`.
void merge_json(ExperimentConfig& config, const nlohmann::json& j);

/// Right-hand sides of the three published test problems.
struct Preset {
  int n;
  std::vector<double> b;
};
Preset preset(const std::string& name);
const std::vector<std::string>& preset_names();

/// Largest explicit-mode circuit `auto` will choose.
inline constexpr int kAutoExplicitLimit = 24;

/// Resolves "auto" and validates "explicit"/"fused"; warnings are appended.
RotationMode choose_mode(const ExperimentConfig& config, const PoissonSystem& system,
                         const AngleTable& table, std::vector<std::string>& warnings);

nlohmann::json cmd_solve(const ExperimentConfig& config);

/// Exactly one of `eigen_index` (1-based), `eigen_weights` or `input` selects
/// the register-B state.
struct PhaseInput {
  int eigen_index = 0;
  std::vector<double> eigen_weights;
  std::vector<double> input;
};
nlohmann::json cmd_verify_phase(const ExperimentConfig& config, const PhaseInput& input);

/// One analytics row per amplification level.
std::string cmd_sweep(const ExperimentConfig& config, const std::vector<int>& f_values);
nlohmann::json cmd_sweep_json(const ExperimentConfig& config, const std::vector<int>& f_values);

inline constexpr const char* kResourcesCsvHeader =
    "problem,n,f,l,mode,qubits,reg_b,reg_e,reg_a,depth,cnots_est,fidelity_est,log10_fidelity_est";
/// Resource reports for each problem size (matrix dimensions 2^n - 1).
std::string cmd_resources(const ExperimentConfig& config, const std::vector<int>& sizes);
nlohmann::json cmd_resources_json(const ExperimentConfig& config, const std::vector<int>& sizes);

/// Readout-noise corruption and mitigation of register-B measurements.
/// `distribution` is "fig11" (the problem's b state) or "delta" (|0..01>).
nlohmann::json cmd_mitigate_demo(const ExperimentConfig& config, const std::string& distribution,
                                 double p01, double p10);

/// Parses argv and dispatches; returns the process exit code (0, 2 or 3).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qpoisson::cli
