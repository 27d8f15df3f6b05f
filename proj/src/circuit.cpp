#include "qpoisson/circuit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <sstream>

namespace qpoisson {

namespace {

using cd = std::complex<double>;
constexpr double kUnitaryTol = 1e-10;

std::vector<int> range_qubits(int first, int count) {
  std::vector<int> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = first + k;
  return out;
}

void require_disjoint(const std::vector<int>& controls, const std::vector<int>& targets) {
  std::set<int> seen;
  for (int q : controls) {
    if (!seen.insert(q).second) throw DomainError("gate: repeated qubit " + std::to_string(q));
  }
  for (int q : targets) {
    if (!seen.insert(q).second) {
      throw DomainError("gate: qubit " + std::to_string(q) + " used twice or as control and target");
    }
  }
}

std::string join(const std::vector<int>& qs) {
  std::string s;
  for (std::size_t k = 0; k < qs.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(qs[k]);
  }
  return s;
}

void require_d1(const PoissonSystem& system, const char* who) {
  if (system.d() != 1) {
    throw DomainError(std::string(who) + ": circuit builders support d = 1 only (got d = " +
                      std::to_string(system.d()) + ")");
  }
}

// Embeds a length-(2^n - 1) coefficient vector into register-B slots 1..2^n-1.
Eigen::VectorXd embed(const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size() + 1);
  out.tail(v.size()) = v;
  return out;
}

// Applies X to every prefix qubit whose required bit is 0, so that a plain
// all-ones control realizes the prefix match.
Fragment prefix_flips(const BitString& prefix, const std::vector<int>& qubits) {
  Fragment out;
  for (int k = 1; k <= prefix.width(); ++k) {
    if (!prefix.bit(k)) out.push_back(pauli_x(qubits[static_cast<std::size_t>(k - 1)]));
  }
  return out;
}

// Register-E qubits holding the leading `length` bits, most significant first.
std::vector<int> prefix_qubits(const RegisterLayout& layout, int length) {
  std::vector<int> out;
  for (int k = 0; k < length; ++k) out.push_back(layout.e(layout.reg_e - 1 - k));
  return out;
}

}  // namespace

std::vector<int> RegisterLayout::b_qubits() const { return range_qubits(b(0), reg_b); }
std::vector<int> RegisterLayout::e_qubits() const { return range_qubits(e(0), reg_e); }
std::vector<int> RegisterLayout::a_qubits() const { return range_qubits(a(0), reg_a); }

std::string to_string(GateKind kind) {
  switch (kind) {
    case GateKind::Hadamard: return "H";
    case GateKind::PauliX: return "X";
    case GateKind::Ry: return "RY";
    case GateKind::Phase: return "P";
    case GateKind::ControlledUnitary: return "CU";
    case GateKind::MultiControlledX: return "MCX";
    case GateKind::MultiControlledRy: return "MCRY";
    case GateKind::Swap: return "SWAP";
  }
  return "?";
}

std::string to_string(RotationMode mode) {
  return mode == RotationMode::Explicit ? "explicit" : "fused";
}

std::string to_string(PhaseMode mode) { return mode == PhaseMode::Encoded ? "encoded" : "true-a"; }

Eigen::MatrixXcd Gate::target_matrix() const {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  Eigen::MatrixXcd m(2, 2);
  switch (kind) {
    case GateKind::Hadamard:
      m << 1, 1, 1, -1;
      return m / std::numbers::sqrt2;
    case GateKind::PauliX:
    case GateKind::MultiControlledX:
      m << 0, 1, 1, 0;
      return m;
    case GateKind::Ry:
    case GateKind::MultiControlledRy:
      m << c, -s, s, c;
      return m;
    case GateKind::Phase:
      m << 1, 0, 0, std::polar(1.0, angle);
      return m;
    case GateKind::Swap: {
      Eigen::MatrixXcd sw = Eigen::MatrixXcd::Zero(4, 4);
      sw(0, 0) = sw(3, 3) = sw(1, 2) = sw(2, 1) = 1.0;
      return sw;
    }
    case GateKind::ControlledUnitary:
      return matrix;
  }
  return m;
}

Gate Gate::adjoint() const {
  Gate g = *this;
  switch (kind) {
    case GateKind::Ry:
    case GateKind::MultiControlledRy:
    case GateKind::Phase:
      g.angle = -angle;
      break;
    case GateKind::ControlledUnitary:
      g.matrix = matrix.adjoint();
      break;
    default:
      break;
  }
  return g;
}

std::string Gate::dump() const {
  std::ostringstream os;
  os << to_string(kind) << " q[";
  if (!controls.empty()) os << join(controls) << '|';
  os << join(targets) << "] (";
  switch (kind) {
    case GateKind::Ry:
    case GateKind::MultiControlledRy:
    case GateKind::Phase:
      os.precision(17);
      os << angle;
      break;
    case GateKind::ControlledUnitary:
      os << "dim=" << matrix.rows();
      break;
    default:
      break;
  }
  os << ')';
  return os.str();
}

Gate hadamard(int q) { return Gate{GateKind::Hadamard, {}, {q}, 0.0, {}}; }
Gate pauli_x(int q) { return Gate{GateKind::PauliX, {}, {q}, 0.0, {}}; }
Gate ry(int q, double angle) { return Gate{GateKind::Ry, {}, {q}, angle, {}}; }

Gate phase(int q, double angle, std::vector<int> controls) {
  require_disjoint(controls, {q});
  return Gate{GateKind::Phase, std::move(controls), {q}, angle, {}};
}

Gate controlled_unitary(std::vector<int> controls, std::vector<int> targets,
                        Eigen::MatrixXcd matrix) {
  require_disjoint(controls, targets);
  const Eigen::Index dim = Eigen::Index{1} << targets.size();
  if (targets.empty() || matrix.rows() != dim || matrix.cols() != dim) {
    throw DomainError("controlled_unitary: matrix must be 2^t x 2^t for t = " +
                      std::to_string(targets.size()) + " targets");
  }
  const double defect =
      (matrix.adjoint() * matrix - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff();
  if (defect > kUnitaryTol) {
    throw DomainError("controlled_unitary: matrix is not unitary (defect " +
                      std::to_string(defect) + ")");
  }
  return Gate{GateKind::ControlledUnitary, std::move(controls), std::move(targets), 0.0,
              std::move(matrix)};
}

Gate multi_controlled_x(std::vector<int> controls, int target) {
  require_disjoint(controls, {target});
  return Gate{GateKind::MultiControlledX, std::move(controls), {target}, 0.0, {}};
}

Gate multi_controlled_ry(std::vector<int> controls, int target, double angle) {
  require_disjoint(controls, {target});
  return Gate{GateKind::MultiControlledRy, std::move(controls), {target}, angle, {}};
}

Gate swap(int a, int b) {
  require_disjoint({}, {a, b});
  return Gate{GateKind::Swap, {}, {a, b}, 0.0, {}};
}

Fragment inverse(const Fragment& fragment) {
  Fragment out;
  out.reserve(fragment.size());
  for (auto it = fragment.rbegin(); it != fragment.rend(); ++it) out.push_back(it->adjoint());
  return out;
}

void Circuit::append(const Fragment& fragment) {
  gates.insert(gates.end(), fragment.begin(), fragment.end());
}

void Circuit::validate() const {
  const int total = layout.total();
  for (const auto& g : gates) {
    for (const auto* qs : {&g.controls, &g.targets}) {
      for (int q : *qs) {
        if (q < 0 || q >= total) {
          throw DomainError("circuit: gate " + g.dump() + " touches qubit outside the " +
                            std::to_string(total) + "-qubit layout");
        }
      }
    }
  }
}

std::string Circuit::dump() const {
  std::string out;
  for (const auto& g : gates) {
    out += g.dump();
    out += '\n';
  }
  return out;
}

Fragment qft(const std::vector<int>& qubits) {
  Fragment out;
  const int m = static_cast<int>(qubits.size());
  for (int j = m - 1; j >= 0; --j) {
    out.push_back(hadamard(qubits[static_cast<std::size_t>(j)]));
    for (int k = j - 1; k >= 0; --k) {
      out.push_back(phase(qubits[static_cast<std::size_t>(j)],
                          std::numbers::pi / std::ldexp(1.0, j - k),
                          {qubits[static_cast<std::size_t>(k)]}));
    }
  }
  for (int k = 0; k < m / 2; ++k) {
    out.push_back(swap(qubits[static_cast<std::size_t>(k)],
                       qubits[static_cast<std::size_t>(m - 1 - k)]));
  }
  return out;
}

Fragment inverse_qft(const std::vector<int>& qubits) { return inverse(qft(qubits)); }

Gate state_preparation(const Eigen::VectorXd& amplitudes, const RegisterLayout& layout) {
  const Eigen::Index dim = Eigen::Index{1} << layout.reg_b;
  if (amplitudes.size() != dim) {
    throw DomainError("state_preparation: expected " + std::to_string(dim) + " amplitudes");
  }
  const double norm = amplitudes.norm();
  if (!(norm > 0.0)) throw DomainError("state_preparation: zero vector");
  const Eigen::VectorXd target = amplitudes / norm;
  // Householder reflection I - 2 w w^T / |w|^2 with w = e0 - target maps e0 to target.
  Eigen::VectorXd w = -target;
  w(0) += 1.0;
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(dim, dim);
  const double ww = w.squaredNorm();
  if (ww > 1e-24) h -= (2.0 / ww) * w * w.transpose();
  return controlled_unitary({}, layout.b_qubits(), h.cast<cd>());
}

Eigen::MatrixXcd evolution_unitary(const EigenData& eigs, const FixedPointFormat& fmt,
                                   std::uint64_t power, PhaseMode mode) {
  const Eigen::Index size = eigs.lambdas.size();
  const int m = fmt.total_bits();
  const std::uint64_t modulus_mask = (std::uint64_t{1} << m) - 1;
  Eigen::VectorXcd phases(size);
  for (Eigen::Index j = 0; j < size; ++j) {
    double turns = 0.0;
    if (mode == PhaseMode::Encoded) {
      const std::uint64_t e = amplify_encode(eigs.lambdas(j), fmt).value();
      // (e * power) mod 2^m without overflow; power is a power of two.
      const int shift = std::countr_zero(power);
      const std::uint64_t reduced =
          shift >= m ? 0 : ((e & (modulus_mask >> shift)) << shift) & modulus_mask;
      turns = std::ldexp(static_cast<double>(reduced), -m);
    } else {
      const double x = std::ldexp(eigs.lambdas(j), fmt.frac_bits - m) * static_cast<double>(power);
      turns = x - std::floor(x);
    }
    phases(j) = std::polar(1.0, 2.0 * std::numbers::pi * turns);
  }
  const Eigen::MatrixXcd u = eigs.eigvecs.cast<cd>();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(size + 1, size + 1);
  out.bottomRightCorner(size, size) = u * phases.asDiagonal() * u.adjoint();
  return out;
}

Fragment build_qpe(const EigenData& eigs, const FixedPointFormat& fmt, const RegisterLayout& layout,
                   PhaseMode mode) {
  if ((Eigen::Index{1} << layout.reg_b) != eigs.lambdas.size() + 1) {
    throw DomainError("build_qpe: register B width does not match the eigen data");
  }
  if (layout.reg_e != fmt.total_bits()) {
    throw DomainError("build_qpe: register E width does not match the format");
  }
  fmt.validate(eigs.lambdas.maxCoeff());
  Fragment out;
  for (int k = 0; k < layout.reg_e; ++k) out.push_back(hadamard(layout.e(k)));
  for (int k = 0; k < layout.reg_e; ++k) {
    out.push_back(controlled_unitary({layout.e(k)}, layout.b_qubits(),
                                     evolution_unitary(eigs, fmt, std::uint64_t{1} << k, mode)));
  }
  const Fragment iqft = inverse_qft(layout.e_qubits());
  out.insert(out.end(), iqft.begin(), iqft.end());
  return out;
}

Fragment build_rotation_explicit(const AngleTable& table, const RegisterLayout& layout) {
  if (layout.reg_a != static_cast<int>(table.kept_columns.size())) {
    throw DomainError("build_rotation_explicit: register A must have one qubit per kept column (" +
                      std::to_string(table.kept_columns.size()) + "), got " +
                      std::to_string(layout.reg_a));
  }
  if (table.kept_columns.empty()) return {};
  const auto controls = prefix_qubits(layout, table.prefix_len);
  Fragment out;
  for (std::size_t j = 0; j < table.size(); ++j) {
    const Fragment flips = prefix_flips(table.lambda_prefix(j), controls);
    Fragment load = flips;
    for (std::size_t c = 0; c < table.kept_columns.size(); ++c) {
      if (table.encoded_omegas[j].bit(table.kept_columns[c])) {
        load.push_back(multi_controlled_x(controls, layout.a(static_cast<int>(c))));
      }
    }
    load.insert(load.end(), flips.begin(), flips.end());

    out.insert(out.end(), load.begin(), load.end());
    for (std::size_t c = 0; c < table.kept_columns.size(); ++c) {
      // R_y(2 pi 2^-k) for the 2^-k place.
      const double angle = std::numbers::pi / std::ldexp(1.0, table.kept_columns[c] - 1);
      out.push_back(multi_controlled_ry({layout.a(static_cast<int>(c))}, layout.ancilla(), angle));
    }
    const Fragment unload = inverse(load);
    out.insert(out.end(), unload.begin(), unload.end());
  }
  return out;
}

Fragment build_rotation_fused(const AngleTable& table, const RegisterLayout& layout) {
  if (layout.reg_a != 0) {
    throw DomainError("build_rotation_fused: register A must be empty in fused mode");
  }
  const auto controls = prefix_qubits(layout, table.prefix_len);
  Fragment out;
  for (std::size_t j = 0; j < table.size(); ++j) {
    const double omega = table.decoded_omega(j);
    if (omega == 0.0) continue;
    const Fragment flips = prefix_flips(table.lambda_prefix(j), controls);
    out.insert(out.end(), flips.begin(), flips.end());
    out.push_back(multi_controlled_ry(controls, layout.ancilla(), 2.0 * std::numbers::pi * omega));
    out.insert(out.end(), flips.begin(), flips.end());
  }
  return out;
}

RegisterLayout pipeline_layout(const PoissonSystem& system, const AngleTable& table,
                               RotationMode mode) {
  RegisterLayout layout;
  layout.reg_b = system.n();
  layout.reg_e = table.fmt.total_bits();
  layout.reg_a = mode == RotationMode::Explicit ? static_cast<int>(table.kept_columns.size()) : 0;
  layout.has_ancilla = true;
  return layout;
}

Circuit build_pipeline(const PoissonSystem& system, const FixedPointFormat& fmt, RotationMode mode,
                       const BuildOptions& options) {
  require_d1(system, "build_pipeline");
  const EigenData eigs = eigenpairs(system);
  const AngleTable table = build_angle_table(eigs, fmt);
  Circuit circuit;
  circuit.layout = pipeline_layout(system, table, mode);
  if (circuit.layout.total() > options.max_qubits) {
    std::string msg = "build_pipeline: " + to_string(mode) + " circuit needs " +
                      std::to_string(circuit.layout.total()) + " qubits, budget is " +
                      std::to_string(options.max_qubits);
    if (mode == RotationMode::Explicit) msg += "; fused mode drops register A";
    throw ResourceError(msg);
  }
  circuit.metadata = CircuitMetadata{"pipeline", mode, fmt, options.phase_mode};

  circuit.gates.push_back(state_preparation(embed(system.normalized_b()), circuit.layout));
  const Fragment qpe = build_qpe(eigs, fmt, circuit.layout, options.phase_mode);
  circuit.append(qpe);
  circuit.append(mode == RotationMode::Explicit ? build_rotation_explicit(table, circuit.layout)
                                                : build_rotation_fused(table, circuit.layout));
  circuit.append(inverse(qpe));
  circuit.validate();
  return circuit;
}

Circuit build_phase_verification(const PoissonSystem& system, const FixedPointFormat& fmt,
                                 const Eigen::VectorXd& input, PhaseMode mode) {
  require_d1(system, "build_phase_verification");
  const Eigen::Index dim = system.grid();
  if (input.size() != dim) {
    throw DomainError("build_phase_verification: input must have 2^n = " + std::to_string(dim) +
                      " entries");
  }
  if (std::abs(input.norm() - 1.0) > 1e-9) {
    throw DomainError("build_phase_verification: input must have unit norm");
  }
  if (std::abs(input(0)) > 1e-12) {
    throw DomainError("build_phase_verification: slot 0 of the input must be zero");
  }
  const EigenData eigs = eigenpairs(system);
  Circuit circuit;
  circuit.layout = RegisterLayout{system.n(), fmt.total_bits(), 0, false};
  circuit.metadata = CircuitMetadata{"phase-verification", std::nullopt, fmt, mode};
  circuit.gates.push_back(state_preparation(input, circuit.layout));
  circuit.append(build_qpe(eigs, fmt, circuit.layout, mode));
  circuit.validate();
  return circuit;
}

}  // namespace qpoisson
