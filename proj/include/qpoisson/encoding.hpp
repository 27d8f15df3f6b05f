#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qpoisson/model.hpp"

namespace qpoisson {

/// Fixed-width unsigned bit pattern. Bits are addressed 1-indexed from the
/// most significant end, which for a fraction is the 2^-1 place.
class BitString {
 public:
  BitString() = default;
  BitString(std::uint64_t value, int width);
  static BitString parse(std::string_view text);

  std::uint64_t value() const { return value_; }
  int width() const { return width_; }
  /// Bit at 1-indexed position from the most significant end.
  bool bit(int position) const;
  /// The leading `length` bits as a shorter pattern.
  BitString prefix(int length) const;
  std::string str() const;

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  std::uint64_t value_ = 0;
  int width_ = 0;
};

/// Register E holds `integer_bits + frac_bits` qubits; the rotation angle is
/// quantized to `angle_bits` fractional bits before pruning.
struct FixedPointFormat {
  int integer_bits = 0;
  int frac_bits = 0;
  int angle_bits = 1;

  int total_bits() const { return integer_bits + frac_bits; }

  /// Default integer width 2n + 2.
  static FixedPointFormat for_grid(int n, int frac_bits, int angle_bits);

  /// Throws EncodingError unless the widths are usable and lambda_max * 2^f < 2^m.
  void validate(double lambda_max) const;
};

void to_json(nlohmann::json& j, const FixedPointFormat& fmt);

/// floor(lambda * 2^f) as an m-bit pattern.
BitString amplify_encode(double lambda, const FixedPointFormat& fmt);

/// The eigenvalue represented by an encoded pattern, value * 2^-f.
double effective_lambda(const BitString& encoded, const FixedPointFormat& fmt);

/// (1/pi) arccot(sqrt(lambda^2 - 1)), i.e. the omega with sin(omega pi) = 1/lambda.
double angle_coefficient(double lambda);

/// round(omega * 2^l) clamped to [0, 2^l - 1], ties rounding up.
BitString encode_angle(double omega, int angle_bits);
double decode_angle(const BitString& encoded);

struct PrunedColumns {
  std::vector<int> kept;  // 1-indexed from the binary point, ascending
  std::vector<BitString> reduced;
};

/// Drops the bit columns that are zero in every pattern.
PrunedColumns prune_zero_columns(std::span<const BitString> encoded);

/// Reinserts dropped zero columns, undoing prune_zero_columns.
std::vector<BitString> restore_columns(const PrunedColumns& pruned, int width);

/// Smallest p such that the p-bit leading prefixes are pairwise distinct.
int distinguishing_prefix(std::span<const BitString> encoded);

struct AngleTable {
  FixedPointFormat fmt;
  std::vector<BitString> encoded_lambdas;
  std::vector<double> effective_lambdas;
  std::vector<double> omegas;  // from effective_lambdas, before quantization
  std::vector<BitString> encoded_omegas;
  std::vector<int> kept_columns;
  int prefix_len = 0;

  std::size_t size() const { return encoded_lambdas.size(); }
  double decoded_omega(std::size_t j) const { return decode_angle(encoded_omegas[j]); }
  BitString lambda_prefix(std::size_t j) const { return encoded_lambdas[j].prefix(prefix_len); }
};

AngleTable build_angle_table(const EigenData& eigs, const FixedPointFormat& fmt);

void to_json(nlohmann::json& j, const AngleTable& table);

}  // namespace qpoisson
