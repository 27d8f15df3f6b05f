#include "qpoisson/simulator.hpp"

#include <algorithm>
#include <complex>
#include <random>

namespace qpoisson {

namespace {

using cd = std::complex<double>;
using Index = std::uint64_t;

Index mask_of(const std::vector<int>& qubits) {
  Index mask = 0;
  for (int q : qubits) mask |= Index{1} << q;
  return mask;
}

// Spreads the bits of `r` over the positions not in `sorted_zero_bits`,
// leaving those positions zero.
Index insert_zeros(Index r, const std::vector<int>& sorted_zero_bits) {
  for (int b : sorted_zero_bits) {
    const Index low = r & ((Index{1} << b) - 1);
    r = ((r >> b) << (b + 1)) | low;
  }
  return r;
}

void apply_single(Eigen::VectorXcd& psi, int target, Index cmask, const Eigen::Matrix2cd& m,
                  GateKind kind) {
  const Index tbit = Index{1} << target;
  const auto size = static_cast<Index>(psi.size());
  const cd m00 = m(0, 0), m01 = m(0, 1), m10 = m(1, 0), m11 = m(1, 1);
  for (Index i = 0; i < size; ++i) {
    if ((i & tbit) || (i & cmask) != cmask) continue;
    const Index j = i | tbit;
    switch (kind) {
      case GateKind::PauliX:
      case GateKind::MultiControlledX:
        std::swap(psi[static_cast<Eigen::Index>(i)], psi[static_cast<Eigen::Index>(j)]);
        break;
      case GateKind::Phase:
        psi[static_cast<Eigen::Index>(j)] *= m11;
        break;
      default: {
        const cd a0 = psi[static_cast<Eigen::Index>(i)];
        const cd a1 = psi[static_cast<Eigen::Index>(j)];
        psi[static_cast<Eigen::Index>(i)] = m00 * a0 + m01 * a1;
        psi[static_cast<Eigen::Index>(j)] = m10 * a0 + m11 * a1;
      }
    }
  }
}

void apply_dense(Eigen::VectorXcd& psi, const std::vector<int>& targets, Index cmask,
                 const Eigen::MatrixXcd& m) {
  const std::size_t t = targets.size();
  const Index block = Index{1} << t;
  std::vector<Index> offsets(block, 0);
  for (Index s = 0; s < block; ++s) {
    for (std::size_t k = 0; k < t; ++k) {
      if (s & (Index{1} << k)) offsets[s] |= Index{1} << targets[k];
    }
  }
  std::vector<int> sorted = targets;
  std::sort(sorted.begin(), sorted.end());
  const Index groups = static_cast<Index>(psi.size()) >> t;
  Eigen::VectorXcd in(static_cast<Eigen::Index>(block));
  Eigen::VectorXcd out(static_cast<Eigen::Index>(block));
  for (Index r = 0; r < groups; ++r) {
    const Index base = insert_zeros(r, sorted);
    if ((base & cmask) != cmask) continue;
    for (Index s = 0; s < block; ++s) {
      in[static_cast<Eigen::Index>(s)] = psi[static_cast<Eigen::Index>(base | offsets[s])];
    }
    out.noalias() = m * in;
    for (Index s = 0; s < block; ++s) {
      psi[static_cast<Eigen::Index>(base | offsets[s])] = out[static_cast<Eigen::Index>(s)];
    }
  }
}

void apply_swap(Eigen::VectorXcd& psi, int a, int b) {
  const Index abit = Index{1} << a;
  const Index bbit = Index{1} << b;
  const auto size = static_cast<Index>(psi.size());
  for (Index i = 0; i < size; ++i) {
    if ((i & abit) && !(i & bbit)) {
      std::swap(psi[static_cast<Eigen::Index>(i)],
                psi[static_cast<Eigen::Index>((i ^ abit) | bbit)]);
    }
  }
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string outcome_key(Index outcome, std::size_t width) {
  std::string s(width, '0');
  for (std::size_t k = 0; k < width; ++k) {
    if (outcome & (Index{1} << k)) s[width - 1 - k] = '1';
  }
  return s;
}

}  // namespace

Statevector::Statevector(int qubits) : Statevector(basis(qubits, 0)) {}

Statevector::Statevector(int qubits, Eigen::VectorXcd amplitudes)
    : qubits_(qubits), amps_(std::move(amplitudes)) {
  if (qubits < 0 || qubits > 40) throw DomainError("Statevector: qubit count out of range");
  if (amps_.size() != (Eigen::Index{1} << qubits)) {
    throw DomainError("Statevector: expected 2^" + std::to_string(qubits) + " amplitudes");
  }
}

Statevector Statevector::basis(int qubits, std::uint64_t index) {
  if (qubits < 0 || qubits > 40) throw DomainError("Statevector: qubit count out of range");
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(Eigen::Index{1} << qubits);
  amps[static_cast<Eigen::Index>(index)] = 1.0;
  return Statevector(qubits, std::move(amps));
}

void apply_gate(Statevector& state, const Gate& gate) {
  for (const auto* qs : {&gate.controls, &gate.targets}) {
    for (int q : *qs) {
      if (q < 0 || q >= state.qubits()) {
        throw DomainError("apply_gate: qubit " + std::to_string(q) + " outside " +
                          std::to_string(state.qubits()) + "-qubit state");
      }
    }
  }
  auto& psi = state.amplitudes();
  const Index cmask = mask_of(gate.controls);
  switch (gate.kind) {
    case GateKind::Swap:
      apply_swap(psi, gate.targets[0], gate.targets[1]);
      break;
    case GateKind::ControlledUnitary:
      apply_dense(psi, gate.targets, cmask, gate.matrix);
      break;
    default:
      apply_single(psi, gate.targets[0], cmask, gate.target_matrix(), gate.kind);
  }
}

Statevector run_exact(const Circuit& circuit, const SimOptions& options) {
  const int q = circuit.layout.total();
  if (q > options.max_qubits) {
    throw ResourceError("run_exact: " + std::to_string(q) + " qubits exceed the budget of " +
                        std::to_string(options.max_qubits));
  }
  Statevector state(q);
  for (const auto& g : circuit.gates) apply_gate(state, g);
  return state;
}

Eigen::VectorXd marginal_probabilities(const Statevector& state, const std::vector<int>& qubits) {
  Eigen::VectorXd probs = Eigen::VectorXd::Zero(Eigen::Index{1} << qubits.size());
  const auto& psi = state.amplitudes();
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const double p = std::norm(psi[i]);
    if (p == 0.0) continue;
    Index outcome = 0;
    for (std::size_t k = 0; k < qubits.size(); ++k) {
      if (static_cast<Index>(i) & (Index{1} << qubits[k])) outcome |= Index{1} << k;
    }
    probs[static_cast<Eigen::Index>(outcome)] += p;
  }
  return probs;
}

PostSelection postselect(const Statevector& state, const RegisterLayout& layout) {
  if (!layout.has_ancilla) throw DomainError("postselect: layout has no ancilla");
  std::vector<int> measured = layout.b_qubits();
  measured.push_back(layout.ancilla());
  const Eigen::VectorXd probs = marginal_probabilities(state, measured);
  const Eigen::Index half = probs.size() / 2;
  PostSelection out;
  out.success_prob = probs.tail(half).sum();
  if (out.success_prob < 1e-15) {
    throw SimulationError("postselect: success probability " + std::to_string(out.success_prob) +
                          " is degenerate");
  }
  out.solution = probs.tail(half - 1).cwiseSqrt();
  out.solution.normalize();
  return out;
}

double uncompute_leakage(const Statevector& state, const RegisterLayout& layout) {
  const Index work = mask_of(layout.e_qubits()) | mask_of(layout.a_qubits());
  const Index anc = Index{1} << layout.ancilla();
  double leak = 0.0;
  const auto& psi = state.amplitudes();
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const auto idx = static_cast<Index>(i);
    if ((idx & anc) && (idx & work)) leak += std::norm(psi[i]);
  }
  return leak;
}

Histogram sample_register(const Statevector& state, const std::vector<int>& qubits,
                          std::uint64_t shots, std::uint64_t seed) {
  const Eigen::VectorXd probs = marginal_probabilities(state, qubits);
  std::vector<double> cdf(static_cast<std::size_t>(probs.size()));
  double acc = 0.0;
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    cdf[static_cast<std::size_t>(k)] = acc;
  }
  std::vector<std::uint64_t> counts(cdf.size(), 0);
  std::mt19937_64 rng(seed);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  Histogram hist;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k]) hist[outcome_key(k, qubits.size())] = counts[k];
  }
  return hist;
}

RunResult sample_state(const Statevector& state, const RegisterLayout& layout, std::uint64_t shots,
                       std::uint64_t seed) {
  if (shots < 1) throw DomainError("sample: shots must be >= 1");
  if (!layout.has_ancilla) throw DomainError("sample: layout has no ancilla");
  std::vector<int> measured = layout.b_qubits();
  measured.push_back(layout.ancilla());
  RunResult result;
  result.shots = shots;
  result.seed = seed;
  result.histogram = sample_register(state, measured, shots, seed);

  const Eigen::Index slots = Eigen::Index{1} << layout.reg_b;
  Eigen::VectorXd kept = Eigen::VectorXd::Zero(slots);
  std::uint64_t successes = 0;
  for (const auto& [key, count] : result.histogram) {
    if (key.front() != '1') continue;
    successes += count;
    kept[static_cast<Eigen::Index>(std::stoull(key.substr(1), nullptr, 2))] +=
        static_cast<double>(count);
  }
  if (successes == 0) {
    throw SimulationError("sample: no ancilla = 1 outcome in " + std::to_string(shots) +
                          " shots; increase the shot count");
  }
  result.success_prob = static_cast<double>(successes) / static_cast<double>(shots);
  const Eigen::VectorXd v = kept.tail(slots - 1);
  if (v.sum() == 0.0) {
    throw SimulationError("sample: successful records carry no register-B population");
  }
  result.solution = (v / v.sum()).cwiseSqrt();
  return result;
}

RunResult sample(const Circuit& circuit, std::uint64_t shots, std::uint64_t seed,
                 const SimOptions& options) {
  return sample_state(run_exact(circuit, options), circuit.layout, shots, seed);
}

void to_json(nlohmann::json& j, const RunResult& result) {
  j = nlohmann::json{{"solution", std::vector<double>(result.solution.data(),
                                                     result.solution.data() +
                                                         result.solution.size())},
                     {"success_prob", result.success_prob},
                     {"histogram", result.histogram},
                     {"shots", result.shots},
                     {"seed", result.seed},
                     {"rng", result.rng}};
}

std::string histogram_csv(const Histogram& histogram) {
  std::string out = "bitstring,count\n";
  for (const auto& [key, count] : histogram) out += key + "," + std::to_string(count) + "\n";
  return out;
}

}  // namespace qpoisson
