#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "qpoisson/circuit.hpp"
#include "test_util.hpp"

using namespace qpoisson;
using qpoisson::test::full_matrix;
using qpoisson::test::reference_apply;
using cd = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

PoissonSystem table1_3x3() {
  return PoissonSystem(2, Eigen::Vector3d(1.0 / std::sqrt(2.0), 0.5, 0.5));
}

PoissonSystem ones_system(int n) { return PoissonSystem(n, Eigen::VectorXd::Ones((1 << n) - 1)); }

Eigen::VectorXd embed(const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size() + 1);
  out.tail(v.size()) = v;
  return out;
}

// |e_value>_E |b>_B with every other qubit zero.
Eigen::VectorXcd product_state(const RegisterLayout& layout, const Eigen::VectorXd& b_amps,
                               std::uint64_t e_value) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index{1} << layout.total());
  for (Eigen::Index s = 0; s < b_amps.size(); ++s) {
    v(static_cast<Eigen::Index>(e_value << layout.reg_b) | s) = b_amps(s);
  }
  return v;
}

// Probability of each register-E value.
Eigen::VectorXd reg_e_distribution(const Eigen::VectorXcd& v, const RegisterLayout& layout) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(Eigen::Index{1} << layout.reg_e);
  for (Eigen::Index idx = 0; idx < v.size(); ++idx) {
    p((idx >> layout.reg_b) & (p.size() - 1)) += std::norm(v(idx));
  }
  return p;
}

double unitarity_defect(const Eigen::MatrixXcd& u) {
  return (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("QFT equals the discrete Fourier matrix", "[circuit]") {
  for (int m = 1; m <= 4; ++m) {
    CAPTURE(m);
    std::vector<int> qubits(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) qubits[static_cast<std::size_t>(k)] = k;
    const Eigen::Index dim = Eigen::Index{1} << m;
    Eigen::MatrixXcd dft(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
      for (Eigen::Index c = 0; c < dim; ++c) {
        dft(r, c) = std::polar(1.0 / std::sqrt(static_cast<double>(dim)),
                               2.0 * kPi * static_cast<double>(r * c) / static_cast<double>(dim));
      }
    }
    CHECK((full_matrix(qft(qubits), m) - dft).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((full_matrix(inverse_qft(qubits), m) - dft.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("gate factories validate their operands", "[circuit]") {
  Eigen::MatrixXcd bad(2, 2);
  bad << 1, 1, 0, 1;
  CHECK_THROWS_AS(controlled_unitary({}, {0}, bad), DomainError);
  CHECK_THROWS_AS(controlled_unitary({}, {0, 1}, Eigen::MatrixXcd::Identity(2, 2)), DomainError);
  CHECK_THROWS_AS(controlled_unitary({1}, {1}, Eigen::MatrixXcd::Identity(2, 2)), DomainError);
  CHECK_THROWS_AS(multi_controlled_x({0, 2}, 2), DomainError);
  CHECK_THROWS_AS(swap(3, 3), DomainError);
  CHECK_NOTHROW(controlled_unitary({2}, {0, 1}, Eigen::MatrixXcd::Identity(4, 4)));
}

TEST_CASE("gate dump format", "[circuit]") {
  CHECK(hadamard(3).dump() == "H q[3] ()");
  CHECK(pauli_x(0).dump() == "X q[0] ()");
  CHECK(ry(1, 0.5).dump() == "RY q[1] (0.5)");
  CHECK(phase(2, 0.25, {0}).dump() == "P q[0|2] (0.25)");
  CHECK(multi_controlled_x({1, 2}, 4).dump() == "MCX q[1,2|4] ()");
  CHECK(multi_controlled_ry({1}, 4, -1.5).dump() == "MCRY q[1|4] (-1.5)");
  CHECK(swap(0, 5).dump() == "SWAP q[0,5] ()");
  CHECK(controlled_unitary({3}, {0, 1}, Eigen::MatrixXcd::Identity(4, 4)).dump() ==
        "CU q[3|0,1] (dim=4)");

  Circuit c;
  c.layout = {1, 1, 0, false};
  c.gates = {hadamard(0), swap(0, 1)};
  CHECK(c.dump() == "H q[0] ()\nSWAP q[0,1] ()\n");
}

TEST_CASE("inverse undoes a random fragment", "[circuit][property]") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int trial = 0; trial < 20; ++trial) {
    Fragment f{hadamard(0),
               ry(1, angle(rng)),
               phase(2, angle(rng), {0}),
               multi_controlled_ry({0, 2}, 1, angle(rng)),
               controlled_unitary({1}, {2, 0}, test::random_unitary(4, rng)),
               multi_controlled_x({1}, 0),
               swap(1, 2)};
    const Eigen::MatrixXcd u = full_matrix(f, 3);
    CHECK(unitarity_defect(u) < 1e-12);
    CHECK((full_matrix(inverse(f), 3) * u - Eigen::MatrixXcd::Identity(8, 8)).cwiseAbs().maxCoeff() <
          1e-12);
  }
  CHECK(inverse(Fragment{}).empty());
}

TEST_CASE("state_preparation maps |0> to the normalized input", "[circuit]") {
  const RegisterLayout layout{2, 0, 0, false};
  const Eigen::Vector4d amps(0.0, 1.0, 2.0, 2.0);
  const Gate g = state_preparation(amps, layout);
  const Eigen::MatrixXcd u = full_matrix(g, 2);
  CHECK(unitarity_defect(u) < 1e-12);
  CHECK((u.col(0) - (amps / 3.0).cast<cd>()).norm() < 1e-14);

  // Already |0>: the completion is the identity.
  const Eigen::MatrixXcd id = full_matrix(state_preparation(Eigen::Vector4d(1, 0, 0, 0), layout), 2);
  CHECK((id - Eigen::MatrixXcd::Identity(4, 4)).norm() < 1e-14);

  CHECK_THROWS_AS(state_preparation(Eigen::Vector3d(1, 0, 0), layout), DomainError);
  CHECK_THROWS_AS(state_preparation(Eigen::Vector4d::Zero(), layout), DomainError);
}

TEST_CASE("evolution_unitary powers agree with repeated multiplication", "[circuit]") {
  const EigenData eigs = eigenpairs(table1_3x3());
  for (int f : {0, 4}) {
    const FixedPointFormat fmt = FixedPointFormat::for_grid(2, f, 10);
    const Eigen::MatrixXcd u = evolution_unitary(eigs, fmt, 1);
    CHECK(unitarity_defect(u) < 1e-12);
    CHECK(std::abs(u(0, 0) - 1.0) < 1e-15);
    CHECK(u.row(0).tail(3).norm() == 0.0);

    Eigen::MatrixXcd power = u;
    for (int k = 1; k < fmt.total_bits(); ++k) {
      power = power * power;
      CHECK((evolution_unitary(eigs, fmt, std::uint64_t{1} << k) - power).cwiseAbs().maxCoeff() <
            1e-9);
    }
    // Eigenphase of u_j is E_j / 2^m turns.
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double e = static_cast<double>(amplify_encode(eigs.lambdas(j), fmt).value());
      const cd expected = std::polar(1.0, 2.0 * kPi * e / std::ldexp(1.0, fmt.total_bits()));
      const Eigen::VectorXcd uj = embed(eigs.eigvecs.col(j)).cast<cd>();
      CHECK((u * uj - expected * uj).norm() < 1e-12);
    }
  }
}

TEST_CASE("QPE reads out encoded eigenvalues deterministically", "[circuit]") {
  const EigenData eigs = eigenpairs(table1_3x3());
  const FixedPointFormat fmt = FixedPointFormat::for_grid(2, 0, 10);
  const RegisterLayout layout{2, 6, 0, false};
  const Fragment qpe = build_qpe(eigs, fmt, layout);

  const std::uint64_t expected[] = {9, 32, 54};
  for (Eigen::Index j = 0; j < 3; ++j) {
    CAPTURE(j);
    const Eigen::VectorXcd out =
        reference_apply(qpe, product_state(layout, embed(eigs.eigvecs.col(j)), 0));
    const Eigen::VectorXd p = reg_e_distribution(out, layout);
    CHECK(std::abs(p(static_cast<Eigen::Index>(expected[j])) - 1.0) < 1e-10);
  }

  const Eigen::VectorXd mixed =
      0.5 * eigs.eigvecs.col(0) + std::sqrt(0.5) * eigs.eigvecs.col(1) + 0.5 * eigs.eigvecs.col(2);
  const Eigen::VectorXd p =
      reg_e_distribution(reference_apply(qpe, product_state(layout, embed(mixed), 0)), layout);
  CHECK(std::abs(p(9) - 0.25) < 1e-10);
  CHECK(std::abs(p(32) - 0.5) < 1e-10);
  CHECK(std::abs(p(54) - 0.25) < 1e-10);
}

TEST_CASE("QPE with amplification reads the amplified code", "[circuit]") {
  const EigenData eigs = eigenpairs(table1_3x3());
  const FixedPointFormat fmt = FixedPointFormat::for_grid(2, 2, 10);
  const RegisterLayout layout{2, fmt.total_bits(), 0, false};
  const Fragment qpe = build_qpe(eigs, fmt, layout);
  const Eigen::VectorXd p = reg_e_distribution(
      reference_apply(qpe, product_state(layout, embed(eigs.eigvecs.col(0)), 0)), layout);
  // floor(9.3726 * 4) = 37
  CHECK(std::abs(p(37) - 1.0) < 1e-10);
}

TEST_CASE("true-A phases leak for non-integer eigenvalues", "[circuit]") {
  const EigenData eigs = eigenpairs(table1_3x3());
  const FixedPointFormat fmt = FixedPointFormat::for_grid(2, 0, 10);
  const RegisterLayout layout{2, 6, 0, false};
  const Fragment qpe = build_qpe(eigs, fmt, layout, PhaseMode::TrueA);

  // lambda_2 = 32 is an integer, so QPE stays exact.
  const Eigen::VectorXd p2 = reg_e_distribution(
      reference_apply(qpe, product_state(layout, embed(eigs.eigvecs.col(1)), 0)), layout);
  CHECK(std::abs(p2(32) - 1.0) < 1e-10);

  const Eigen::VectorXd p1 = reg_e_distribution(
      reference_apply(qpe, product_state(layout, embed(eigs.eigvecs.col(0)), 0)), layout);
  CHECK(p1(9) < 0.99);
  CHECK(p1(9) > 0.5);
  CHECK(std::abs(p1.sum() - 1.0) < 1e-12);
}

TEST_CASE("build_qpe rejects mismatched layouts", "[circuit]") {
  const EigenData eigs = eigenpairs(table1_3x3());
  const FixedPointFormat fmt = FixedPointFormat::for_grid(2, 0, 10);
  CHECK_THROWS_AS(build_qpe(eigs, fmt, {3, 6, 0, false}), DomainError);
  CHECK_THROWS_AS(build_qpe(eigs, fmt, {2, 5, 0, false}), DomainError);
}

TEST_CASE("explicit rotation writes sin(pi omega_hat) on the ancilla", "[circuit]") {
  const EigenData eigs = eigenpairs(table1_3x3());
  const FixedPointFormat fmt = FixedPointFormat::for_grid(2, 0, 10);
  const AngleTable table = build_angle_table(eigs, fmt);
  const RegisterLayout layout = pipeline_layout(table1_3x3(), table, RotationMode::Explicit);
  REQUIRE(layout.reg_a == 4);
  REQUIRE(layout.total() == 13);
  const Fragment rotation = build_rotation_explicit(table, layout);

  for (std::size_t j = 0; j < table.size(); ++j) {
    CAPTURE(j);
    const std::uint64_t e = table.encoded_lambdas[j].value();
    const Eigen::Vector4d b(0.0, 1.0, 0.0, 0.0);
    const Eigen::VectorXcd out = reference_apply(rotation, product_state(layout, b, e));

    const Eigen::Index base = static_cast<Eigen::Index>(e << layout.reg_b) | 1;
    const Eigen::Index anc = Eigen::Index{1} << layout.ancilla();
    const double s = std::sin(kPi * table.decoded_omega(j));
    CHECK(std::abs(out(base | anc) - s) < 1e-12);
    CHECK(std::abs(out(base) - std::sqrt(1.0 - s * s)) < 1e-12);
    // Register A is unloaded again.
    CHECK(std::abs(std::norm(out(base)) + std::norm(out(base | anc)) - 1.0) < 1e-12);
    // sin(pi omega_hat) approximates 1 / lambda_hat to the angle quantization.
    const double bound = kPi * std::ldexp(1.0, -table.fmt.angle_bits - 1);
    CHECK(std::abs(s - 1.0 / table.effective_lambdas[j]) <= bound);
  }
}

TEST_CASE("fused rotation agrees with explicit rotation on every reg E state", "[circuit]") {
  const EigenData eigs = eigenpairs(table1_3x3());
  for (int f : {0, 4}) {
    const AngleTable table = build_angle_table(eigs, FixedPointFormat::for_grid(2, f, 8));
    const RegisterLayout explicit_layout =
        pipeline_layout(table1_3x3(), table, RotationMode::Explicit);
    const RegisterLayout fused_layout = pipeline_layout(table1_3x3(), table, RotationMode::Fused);
    const Fragment ex = build_rotation_explicit(table, explicit_layout);
    const Fragment fu = build_rotation_fused(table, fused_layout);
    // Only the encoded eigenvalues matter; unrelated codes are filtered out downstream.
    for (std::size_t j = 0; j < table.size(); ++j) {
      const std::uint64_t e = table.encoded_lambdas[j].value();
      const Eigen::Vector4d b(0.0, 0.0, 1.0, 0.0);
      const Eigen::VectorXcd a = reference_apply(ex, product_state(explicit_layout, b, e));
      const Eigen::VectorXcd c = reference_apply(fu, product_state(fused_layout, b, e));
      const Eigen::Index base = static_cast<Eigen::Index>(e << 2) | 2;
      CHECK(std::abs(a(base | (Eigen::Index{1} << explicit_layout.ancilla())) -
                     c(base | (Eigen::Index{1} << fused_layout.ancilla()))) < 1e-12);
    }
  }
}

TEST_CASE("rotation fragments for an all-zero angle table are empty", "[circuit]") {
  const EigenData eigs = eigenpairs(table1_3x3());
  const AngleTable table = build_angle_table(eigs, FixedPointFormat::for_grid(2, 0, 1));
  REQUIRE(table.kept_columns.empty());
  const RegisterLayout layout = pipeline_layout(table1_3x3(), table, RotationMode::Explicit);
  CHECK(layout.reg_a == 0);
  CHECK(build_rotation_explicit(table, layout).empty());
  CHECK(build_rotation_fused(table, layout).empty());
  CHECK_THROWS_AS(build_rotation_explicit(table, {2, 6, 3, true}), DomainError);
  CHECK_THROWS_AS(build_rotation_fused(table, {2, 6, 3, true}), DomainError);
}

TEST_CASE("pipeline layout and structure", "[circuit]") {
  const Circuit c =
      build_pipeline(table1_3x3(), FixedPointFormat::for_grid(2, 0, 10), RotationMode::Explicit);
  CHECK(c.layout.reg_b == 2);
  CHECK(c.layout.reg_e == 6);
  CHECK(c.layout.reg_a == 4);
  CHECK(c.layout.total() == 13);
  CHECK(c.metadata.builder == "pipeline");
  REQUIRE(c.metadata.mode.has_value());
  CHECK(*c.metadata.mode == RotationMode::Explicit);
  CHECK(c.metadata.fmt->frac_bits == 0);
  CHECK(c.gates.front().kind == GateKind::ControlledUnitary);
  CHECK(c.gates.front().controls.empty());

  // The tail is the exact mirror of the QPE block.
  const EigenData eigs = eigenpairs(table1_3x3());
  const Fragment qpe = build_qpe(eigs, FixedPointFormat::for_grid(2, 0, 10), c.layout);
  const Fragment un = inverse(qpe);
  REQUIRE(c.gates.size() > qpe.size() + un.size());
  for (std::size_t k = 0; k < qpe.size(); ++k) {
    CHECK(c.gates[1 + k].dump() == qpe[k].dump());
    CHECK(c.gates[c.gates.size() - un.size() + k].dump() == un[k].dump());
  }
}

TEST_CASE("largest preset fits in 23 qubits in fused mode", "[circuit]") {
  Eigen::VectorXd b = Eigen::VectorXd::Constant(15, 0.25);
  b(12) = 0.5;
  b(13) = 0.0;
  b(14) = 0.0;
  const PoissonSystem system(4, b);
  const FixedPointFormat fmt = FixedPointFormat::for_grid(4, 8, 16);
  const Circuit c = build_pipeline(system, fmt, RotationMode::Fused);
  CHECK(c.layout.reg_b == 4);
  CHECK(c.layout.reg_e == 18);
  CHECK(c.layout.reg_a == 0);
  CHECK(c.layout.total() == 23);

  try {
    build_pipeline(system, fmt, RotationMode::Explicit);
    FAIL("expected a resource error");
  } catch (const ResourceError& e) {
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("fused"));
  }
  CHECK_NOTHROW(build_pipeline(system, fmt, RotationMode::Explicit, BuildOptions{40}));
}

TEST_CASE("pipeline is unitary at small scale", "[circuit][property]") {
  for (int n : {1, 2}) {
    CAPTURE(n);
    const PoissonSystem system = ones_system(n);
    const Circuit c =
        build_pipeline(system, FixedPointFormat::for_grid(n, 0, 4), RotationMode::Explicit);
    const Eigen::MatrixXcd u = full_matrix(c.gates, c.layout.total());
    CHECK(unitarity_defect(u) < 1e-8);
  }
}

TEST_CASE("single-unknown system has a prefix-free rotation", "[circuit]") {
  const PoissonSystem system = ones_system(1);
  const FixedPointFormat fmt = FixedPointFormat::for_grid(1, 0, 8);
  const AngleTable table = build_angle_table(eigenpairs(system), fmt);
  CHECK(table.prefix_len == 0);
  const Circuit c = build_pipeline(system, fmt, RotationMode::Fused);
  std::size_t rotations = 0;
  for (const auto& g : c.gates) {
    if (g.kind == GateKind::MultiControlledRy) {
      ++rotations;
      CHECK(g.controls.empty());
    }
  }
  CHECK(rotations == 1);
}

TEST_CASE("circuit validation", "[circuit]") {
  Circuit c;
  c.layout = {1, 1, 0, true};
  c.gates = {hadamard(2)};
  CHECK_NOTHROW(c.validate());
  c.gates.push_back(multi_controlled_x({0}, 3));
  CHECK_THROWS_AS(c.validate(), DomainError);

  const PoissonSystem d2(2, Eigen::VectorXd::Ones(9), 2);
  CHECK_THROWS_AS(
      build_pipeline(d2, FixedPointFormat::for_grid(2, 0, 10), RotationMode::Fused), DomainError);
}

TEST_CASE("phase verification circuit", "[circuit]") {
  const PoissonSystem system = table1_3x3();
  const FixedPointFormat fmt = FixedPointFormat::for_grid(2, 0, 10);
  const EigenData eigs = eigenpairs(system);
  const Circuit c = build_phase_verification(system, fmt, embed(eigs.eigvecs.col(1)));
  CHECK(c.layout.total() == 8);
  CHECK_FALSE(c.layout.has_ancilla);
  CHECK(c.metadata.builder == "phase-verification");

  Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(256);
  zero(0) = 1.0;
  const Eigen::VectorXd p = reg_e_distribution(reference_apply(c.gates, zero), c.layout);
  CHECK(std::abs(p(32) - 1.0) < 1e-10);

  CHECK_THROWS_AS(build_phase_verification(system, fmt, Eigen::Vector3d(0, 1, 0)), DomainError);
  CHECK_THROWS_AS(build_phase_verification(system, fmt, Eigen::Vector4d(0, 1, 1, 0)), DomainError);
  CHECK_THROWS_AS(build_phase_verification(system, fmt, Eigen::Vector4d(1, 0, 0, 0)), DomainError);
}
