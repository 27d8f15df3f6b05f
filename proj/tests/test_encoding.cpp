#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "qpoisson/encoding.hpp"

using namespace qpoisson;
using Catch::Approx;

namespace {

// 10111.11011011101011 in binary.
double worked_example_lambda() { return static_cast<double>(0b1011111011011101011) / (1 << 14); }

std::vector<BitString> parse_all(std::initializer_list<const char*> texts) {
  std::vector<BitString> out;
  for (const char* t : texts) out.push_back(BitString::parse(t));
  return out;
}

// Exhaustive oracle: smallest p whose prefixes are distinct.
int brute_force_prefix(const std::vector<BitString>& s) {
  for (int p = 0; p <= s.front().width(); ++p) {
    std::set<std::string> seen;
    for (const auto& x : s) seen.insert(x.str().substr(0, static_cast<std::size_t>(p)));
    if (seen.size() == s.size()) return p;
  }
  return -1;
}

EigenData eigen_data(int n) {
  return eigenpairs(PoissonSystem(n, Eigen::VectorXd::Ones((1 << n) - 1)));
}

}  // namespace

TEST_CASE("BitString formatting and prefixes", "[encoding]") {
  const BitString s = BitString::parse("110110");
  CHECK(s.value() == 54);
  CHECK(s.str() == "110110");
  CHECK(s.bit(1));
  CHECK_FALSE(s.bit(3));
  CHECK(s.prefix(2).str() == "11");
  CHECK(s.prefix(0).width() == 0);
  CHECK(BitString(5, 6).str() == "000101");
  CHECK_THROWS_AS(BitString(8, 3), EncodingError);
  CHECK_THROWS_AS(BitString::parse("10x"), EncodingError);
}

TEST_CASE("amplify_encode truncates the worked example", "[encoding]") {
  const double lambda = worked_example_lambda();
  CHECK(amplify_encode(lambda, {5, 0, 10}).str() == "10111");
  CHECK(amplify_encode(lambda, {5, 4, 10}).str() == "101111101");
  CHECK(amplify_encode(lambda, {5, 8, 10}).str() == "1011111011011");
  // Zero padding up to the register width.
  CHECK(amplify_encode(lambda, {7, 4, 10}).str() == "00101111101");
}

TEST_CASE("amplify_encode of exact integers", "[encoding]") {
  CHECK(amplify_encode(32.0, {6, 0, 10}).str() == "100000");
  // 64 sin^2(pi/4) evaluates to 31.999999999999993 in floating point.
  const double lambda = 64.0 * std::pow(std::sin(std::numbers::pi / 4.0), 2);
  CHECK(amplify_encode(lambda, {6, 0, 10}).str() == "100000");
  CHECK(amplify_encode(lambda, {6, 4, 10}).value() == 512);
}

TEST_CASE("amplify_encode rejects overflow", "[encoding]") {
  CHECK_THROWS_AS(amplify_encode(64.0, {6, 0, 10}), EncodingError);
  CHECK_THROWS_AS(amplify_encode(64.5, {6, 1, 10}), EncodingError);
  CHECK_THROWS_WITH(amplify_encode(70.5, {6, 0, 10}), Catch::Matchers::ContainsSubstring("70.5"));
  CHECK_THROWS_AS(amplify_encode(-1.0, {6, 0, 10}), EncodingError);
}

TEST_CASE("effective_lambda", "[encoding]") {
  const FixedPointFormat f0{6, 0, 10};
  const FixedPointFormat f4{6, 4, 10};
  CHECK(effective_lambda(BitString::parse("100000"), f0) == 32.0);
  CHECK(effective_lambda(amplify_encode(9.3726, f4), f4) == 149.0 / 16.0);
  CHECK(effective_lambda(amplify_encode(9.3726, f0), f0) == 9.0);
}

TEST_CASE("angle_coefficient", "[encoding]") {
  CHECK(angle_coefficient(1.0) == 0.5);
  const double w32 = angle_coefficient(32.0);
  CHECK(w32 == Approx(std::asin(1.0 / 32.0) / std::numbers::pi).epsilon(1e-14));
  CHECK(w32 == Approx(0.0099488).margin(1e-7));
  CHECK(std::abs(std::sin(w32 * std::numbers::pi) * 32.0 - 1.0) < 1e-12);
  const double w9 = angle_coefficient(9.3726);
  CHECK(std::abs(std::sin(w9 * std::numbers::pi) - 1.0 / 9.3726) < 1e-12);
  CHECK_THROWS_AS(angle_coefficient(0.5), DomainError);
}

TEST_CASE("angle_coefficient satisfies sin(omega pi) = 1/lambda", "[encoding][property]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(0.0, 12.0);
  for (int k = 0; k < 500; ++k) {
    const double lambda = std::exp(dist(rng));
    const double w = angle_coefficient(lambda);
    CHECK(w > 0.0);
    CHECK(w <= 0.5);
    CHECK(std::abs(std::sin(w * std::numbers::pi) - 1.0 / lambda) < 1e-14);
  }
}

TEST_CASE("encode_angle rounds to nearest", "[encoding]") {
  CHECK(encode_angle(0.5, 4).str() == "1000");
  CHECK(encode_angle(0.00994865, 16).str() == "0000001010001100");
  CHECK(std::abs(decode_angle(encode_angle(0.00994865, 16)) - 0.00994865) <= std::ldexp(1.0, -17));
  CHECK(encode_angle(0.0, 10).str() == "0000000000");
  CHECK(encode_angle(1.0 / 32.0, 4).str() == "0001");  // tie rounds up
  CHECK(encode_angle(0.999, 4).str() == "1111");       // clamped
  CHECK_THROWS_AS(encode_angle(1.0, 4), DomainError);
  CHECK_THROWS_AS(encode_angle(-0.1, 4), DomainError);
}

TEST_CASE("encode_angle round trip is bit exact", "[encoding][property]") {
  std::mt19937_64 rng(3);
  for (int l = 1; l <= 30; ++l) {
    std::uniform_int_distribution<std::uint64_t> dist(0, (std::uint64_t{1} << l) - 1);
    for (int k = 0; k < 50; ++k) {
      const BitString s(dist(rng), l);
      CHECK(encode_angle(decode_angle(s), l) == s);
    }
  }
}

TEST_CASE("prune_zero_columns", "[encoding]") {
  const auto example = parse_all({"0000100110", "0000001010", "0000000101"});
  const PrunedColumns pruned = prune_zero_columns(example);
  CHECK(pruned.kept == std::vector<int>{5, 7, 8, 9, 10});
  CHECK(pruned.reduced[0].str() == "10110");
  CHECK(pruned.reduced[2].str() == "00101");

  CHECK(prune_zero_columns(parse_all({"0000", "0000"})).kept.empty());
  CHECK(prune_zero_columns(parse_all({"1111"})).kept == std::vector<int>{1, 2, 3, 4});
  CHECK_THROWS_AS(prune_zero_columns(parse_all({"01", "001"})), EncodingError);
}

TEST_CASE("pruning is lossless", "[encoding][property]") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int width = 1 + static_cast<int>(rng() % 20);
    // Sparse patterns so that some columns are dropped.
    std::vector<BitString> strings;
    const std::uint64_t mask = rng() & ((std::uint64_t{1} << width) - 1);
    for (int k = 0; k < 1 + static_cast<int>(rng() % 6); ++k) {
      strings.emplace_back(rng() & mask, width);
    }
    const PrunedColumns pruned = prune_zero_columns(strings);
    for (const auto& s : strings) {
      for (int k = 1; k <= width; ++k) {
        if (std::find(pruned.kept.begin(), pruned.kept.end(), k) == pruned.kept.end()) {
          CHECK_FALSE(s.bit(k));
        }
      }
    }
    CHECK(restore_columns(pruned, width) == strings);
  }
}

TEST_CASE("distinguishing_prefix", "[encoding]") {
  CHECK(distinguishing_prefix(parse_all({"001001", "100000", "110110"})) == 2);
  CHECK(distinguishing_prefix(parse_all({"101010"})) == 0);
  CHECK(distinguishing_prefix(std::vector<BitString>{}) == 0);
  CHECK(distinguishing_prefix(parse_all({"10", "11"})) == 2);
  CHECK_THROWS_AS(distinguishing_prefix(parse_all({"0110", "0110"})), EncodingError);
}

TEST_CASE("distinguishing_prefix is minimal", "[encoding][property]") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const int width = 2 + static_cast<int>(rng() % 10);
    std::set<std::uint64_t> values;
    const int count = 1 + static_cast<int>(rng() % 6);
    while (static_cast<int>(values.size()) < std::min(count, 1 << width)) {
      values.insert(rng() & ((std::uint64_t{1} << width) - 1));
    }
    std::vector<BitString> strings;
    for (auto v : values) strings.emplace_back(v, width);
    std::shuffle(strings.begin(), strings.end(), rng);
    const int p = distinguishing_prefix(strings);
    CHECK(p == brute_force_prefix(strings));
  }
}

TEST_CASE("angle table for the 3x3 baseline", "[encoding]") {
  const AngleTable table = build_angle_table(eigen_data(2), FixedPointFormat::for_grid(2, 0, 10));
  REQUIRE(table.size() == 3);
  CHECK(table.encoded_lambdas[0].str() == "001001");
  CHECK(table.encoded_lambdas[1].str() == "100000");
  CHECK(table.encoded_lambdas[2].str() == "110110");
  CHECK(table.prefix_len == 2);
  // round(1024 asin(1/lambda)/pi) for lambda = 9, 32, 54 is 36, 10, 6.
  CHECK(table.encoded_omegas[0].value() == 36);
  CHECK(table.encoded_omegas[1].value() == 10);
  CHECK(table.encoded_omegas[2].value() == 6);
  CHECK(table.kept_columns == std::vector<int>{5, 7, 8, 9});
}

TEST_CASE("angle table invariants hold at f = 8", "[encoding]") {
  const AngleTable table = build_angle_table(eigen_data(2), FixedPointFormat::for_grid(2, 8, 16));
  CHECK(table.encoded_lambdas[0].width() == 14);
  std::set<std::string> prefixes;
  for (std::size_t j = 0; j < table.size(); ++j) prefixes.insert(table.lambda_prefix(j).str());
  CHECK(prefixes.size() == table.size());
  const PrunedColumns pruned = prune_zero_columns(table.encoded_omegas);
  CHECK(pruned.kept == table.kept_columns);
  CHECK(restore_columns(pruned, 16) == table.encoded_omegas);
  // The 2^-1 column is always zero for lambda > 2.
  CHECK(table.kept_columns.front() > 1);
}

TEST_CASE("angle table with a single eigenvalue", "[encoding]") {
  const AngleTable table = build_angle_table(eigen_data(1), FixedPointFormat::for_grid(1, 0, 10));
  CHECK(table.size() == 1);
  CHECK(table.prefix_len == 0);
  CHECK(table.effective_lambdas[0] == 8.0);
}

TEST_CASE("encoding invariants across formats", "[encoding][property]") {
  for (int n = 1; n <= 5; ++n) {
    const EigenData eigs = eigen_data(n);
    for (const Eigen::Index j : {Eigen::Index{0}, eigs.lambdas.size() / 2, eigs.lambdas.size() - 1}) {
      const double lambda = eigs.lambdas(j);
      double previous_error = std::numeric_limits<double>::infinity();
      for (int f = 0; f <= 12; ++f) {
        const FixedPointFormat fmt = FixedPointFormat::for_grid(n, f, 16);
        const double eff = effective_lambda(amplify_encode(lambda, fmt), fmt);
        // Truncation bound (allowing the integer snap for exact values).
        CHECK(eff <= lambda + 1e-9);
        CHECK(eff > lambda - std::ldexp(1.0, -f));
        const double error = std::abs(lambda - eff);
        CHECK(error <= previous_error + 1e-12);
        previous_error = error;
      }
    }
    for (int l : {8, 12, 16}) {
      const AngleTable table = build_angle_table(eigs, FixedPointFormat::for_grid(n, 4, l));
      for (std::size_t j = 0; j < table.size(); ++j) {
        const double s = std::sin(std::numbers::pi * table.decoded_omega(j)) * table.effective_lambdas[j];
        const double bound = std::ldexp(1.0, -l + 1) * std::numbers::pi * table.effective_lambdas[j];
        CHECK(std::abs(s - 1.0) <= bound);
      }
    }
  }
}

TEST_CASE("angle table JSON", "[encoding]") {
  const AngleTable table = build_angle_table(eigen_data(2), FixedPointFormat::for_grid(2, 0, 10));
  const nlohmann::json j = table;
  CHECK(j.at("prefix_len") == 2);
  CHECK(j.at("kept_columns") == nlohmann::json::array({5, 7, 8, 9}));
  CHECK(j.at("rows").at(1).at("encoded_lambda") == "100000");
  CHECK(j.at("rows").at(0).at("encoded_omega") == "0000100100");
  CHECK(j.at("format").at("i") == 6);
}

TEST_CASE("format validation", "[encoding]") {
  CHECK_THROWS_AS(FixedPointFormat({6, 0, 0}).validate(10.0), EncodingError);
  CHECK_THROWS_AS(FixedPointFormat({6, -1, 4}).validate(10.0), EncodingError);
  CHECK_THROWS_AS(FixedPointFormat({5, 0, 4}).validate(54.6), EncodingError);
  CHECK_NOTHROW(FixedPointFormat({6, 0, 4}).validate(54.6));
  CHECK(FixedPointFormat::for_grid(4, 8, 16).total_bits() == 18);
}
