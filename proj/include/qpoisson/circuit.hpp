#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "qpoisson/encoding.hpp"
#include "qpoisson/model.hpp"

namespace qpoisson {

/// Qubit assignment for the solver registers. Qubit 0 is the least
/// significant bit of a basis-state index. Register B occupies the lowest
/// qubits, then register E (qubit k of E carries weight 2^k), then register A
/// (one qubit per kept angle column, in kept-column order), then the ancilla.
struct RegisterLayout {
  int reg_b = 0;
  int reg_e = 0;
  int reg_a = 0;
  bool has_ancilla = true;

  int total() const { return reg_b + reg_e + reg_a + (has_ancilla ? 1 : 0); }
  int b(int k) const { return k; }
  int e(int k) const { return reg_b + k; }
  int a(int k) const { return reg_b + reg_e + k; }
  int ancilla() const { return reg_b + reg_e + reg_a; }
  std::vector<int> b_qubits() const;
  std::vector<int> e_qubits() const;
  std::vector<int> a_qubits() const;
};

enum class GateKind {
  Hadamard,
  PauliX,
  Ry,
  Phase,
  ControlledUnitary,
  MultiControlledX,
  MultiControlledRy,
  Swap,
};

std::string to_string(GateKind kind);

/// One operation of the gate IR. `controls` is empty for plain gates; Phase
/// carries controls when used as a controlled phase. ControlledUnitary stores
/// a dense matrix over `targets`, where targets[0] is the least significant
/// bit of the matrix index.
struct Gate {
  GateKind kind = GateKind::Hadamard;
  std::vector<int> controls;
  std::vector<int> targets;
  double angle = 0.0;
  Eigen::MatrixXcd matrix;

  /// Matrix over the target qubits (controls excluded).
  Eigen::MatrixXcd target_matrix() const;
  Gate adjoint() const;
  /// `KIND q[controls|targets] (params)`
  std::string dump() const;
};

Gate hadamard(int q);
Gate pauli_x(int q);
Gate ry(int q, double angle);
Gate phase(int q, double angle, std::vector<int> controls = {});
Gate controlled_unitary(std::vector<int> controls, std::vector<int> targets,
                        Eigen::MatrixXcd matrix);
Gate multi_controlled_x(std::vector<int> controls, int target);
Gate multi_controlled_ry(std::vector<int> controls, int target, double angle);
Gate swap(int a, int b);

using Fragment = std::vector<Gate>;

/// Adjoint of a gate sequence (reversed order, each gate inverted).
Fragment inverse(const Fragment& fragment);

enum class RotationMode { Explicit, Fused };
/// How the QPE unitary assigns eigenphases. Encoded places exp(2 pi i E_j/2^m)
/// on u_j, where E_j is the encoded eigenvalue; TrueA uses lambda_j 2^f in
/// place of E_j, reproducing exp(i A t) and the resulting phase leakage.
enum class PhaseMode { Encoded, TrueA };

std::string to_string(RotationMode mode);
std::string to_string(PhaseMode mode);

struct CircuitMetadata {
  std::string builder;
  std::optional<RotationMode> mode;
  std::optional<FixedPointFormat> fmt;
  PhaseMode phase_mode = PhaseMode::Encoded;
};

struct Circuit {
  RegisterLayout layout;
  Fragment gates;
  CircuitMetadata metadata;

  void append(const Fragment& fragment);
  /// Throws DomainError if any gate touches a qubit outside the layout.
  void validate() const;
  std::string dump() const;
};

struct BuildOptions {
  /// Largest total qubit count a built pipeline may have.
  int max_qubits = 28;
  PhaseMode phase_mode = PhaseMode::Encoded;
};

/// Inverse QFT over `qubits`, where qubits[k] carries weight 2^k.
Fragment inverse_qft(const std::vector<int>& qubits);
Fragment qft(const std::vector<int>& qubits);

/// Dense unitary on register B whose first column is the embedded, normalized
/// vector (slot 0 must be zero for solver inputs).
Gate state_preparation(const Eigen::VectorXd& amplitudes, const RegisterLayout& layout);

/// U^power on register B, built spectrally with phases fixed by `mode`.
Eigen::MatrixXcd evolution_unitary(const EigenData& eigs, const FixedPointFormat& fmt,
                                   std::uint64_t power, PhaseMode mode = PhaseMode::Encoded);

Fragment build_qpe(const EigenData& eigs, const FixedPointFormat& fmt, const RegisterLayout& layout,
                   PhaseMode mode = PhaseMode::Encoded);

/// Loads each omega_j into register A under its eigenvalue prefix, applies
/// the per-bit controlled rotations onto the ancilla, then unloads.
Fragment build_rotation_explicit(const AngleTable& table, const RegisterLayout& layout);

/// One prefix-controlled Ry(2 pi omega_j) per eigenvalue, directly on the ancilla.
Fragment build_rotation_fused(const AngleTable& table, const RegisterLayout& layout);

RegisterLayout pipeline_layout(const PoissonSystem& system, const AngleTable& table,
                               RotationMode mode);

Circuit build_pipeline(const PoissonSystem& system, const FixedPointFormat& fmt, RotationMode mode,
                       const BuildOptions& options = {});

/// State preparation of `input` (length 2^n, slot 0 zero) followed by QPE only.
Circuit build_phase_verification(const PoissonSystem& system, const FixedPointFormat& fmt,
                                 const Eigen::VectorXd& input,
                                 PhaseMode mode = PhaseMode::Encoded);

}  // namespace qpoisson
