#include "qpoisson/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace qpoisson {

namespace {

constexpr int kMaxWidth = 62;

// Relative tolerance under which a scaled eigenvalue is treated as an exact
// integer, so that 64 sin^2(pi/4) = 31.999999999999996 still encodes as 32.
constexpr double kIntegralSnap = 1e-9;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

BitString::BitString(std::uint64_t value, int width) : value_(value), width_(width) {
  if (width < 0 || width > kMaxWidth) {
    throw EncodingError("BitString: width " + std::to_string(width) + " outside [0, 62]");
  }
  if (width < 64 && (value >> width) != 0) {
    throw EncodingError("BitString: value " + std::to_string(value) + " does not fit in " +
                        std::to_string(width) + " bits");
  }
}

BitString BitString::parse(std::string_view text) {
  std::uint64_t value = 0;
  for (char c : text) {
    if (c != '0' && c != '1') {
      throw EncodingError("BitString: invalid character in '" + std::string(text) + "'");
    }
    value = (value << 1) | static_cast<std::uint64_t>(c == '1');
  }
  return BitString(value, static_cast<int>(text.size()));
}

bool BitString::bit(int position) const {
  return ((value_ >> (width_ - position)) & 1U) != 0;
}

BitString BitString::prefix(int length) const {
  if (length < 0 || length > width_) {
    throw EncodingError("BitString: prefix length " + std::to_string(length) + " out of range");
  }
  return BitString(length == 0 ? 0 : value_ >> (width_ - length), length);
}

std::string BitString::str() const {
  std::string s(static_cast<std::size_t>(width_), '0');
  for (int k = 1; k <= width_; ++k) {
    if (bit(k)) s[static_cast<std::size_t>(k - 1)] = '1';
  }
  return s;
}

FixedPointFormat FixedPointFormat::for_grid(int n, int frac_bits, int angle_bits) {
  return FixedPointFormat{2 * n + 2, frac_bits, angle_bits};
}

void FixedPointFormat::validate(double lambda_max) const {
  if (integer_bits < 1 || frac_bits < 0 || angle_bits < 1) {
    throw EncodingError("FixedPointFormat: need i >= 1, f >= 0, l >= 1 (got i=" +
                        std::to_string(integer_bits) + ", f=" + std::to_string(frac_bits) +
                        ", l=" + std::to_string(angle_bits) + ")");
  }
  if (total_bits() > kMaxWidth || angle_bits > kMaxWidth) {
    throw EncodingError("FixedPointFormat: register widths above 62 bits are not supported");
  }
  if (!(std::ldexp(lambda_max, frac_bits) < std::ldexp(1.0, total_bits()))) {
    throw EncodingError("FixedPointFormat: lambda_max = " + format_double(lambda_max) +
                        " overflows " + std::to_string(total_bits()) + " bits at f = " +
                        std::to_string(frac_bits));
  }
}

void to_json(nlohmann::json& j, const FixedPointFormat& fmt) {
  j = nlohmann::json{{"i", fmt.integer_bits}, {"f", fmt.frac_bits}, {"l", fmt.angle_bits}};
}

BitString amplify_encode(double lambda, const FixedPointFormat& fmt) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw EncodingError("amplify_encode: eigenvalue must be positive, got " + format_double(lambda));
  }
  double scaled = std::ldexp(lambda, fmt.frac_bits);
  const double nearest = std::nearbyint(scaled);
  if (std::abs(scaled - nearest) <= kIntegralSnap * std::max(1.0, scaled)) scaled = nearest;
  const double limit = std::ldexp(1.0, fmt.total_bits());
  if (scaled >= limit) {
    throw EncodingError("amplify_encode: eigenvalue " + format_double(lambda) + " scaled by 2^" +
                        std::to_string(fmt.frac_bits) + " overflows " +
                        std::to_string(fmt.total_bits()) + " bits");
  }
  return BitString(static_cast<std::uint64_t>(std::floor(scaled)), fmt.total_bits());
}

double effective_lambda(const BitString& encoded, const FixedPointFormat& fmt) {
  return std::ldexp(static_cast<double>(encoded.value()), -fmt.frac_bits);
}

double angle_coefficient(double lambda) {
  if (!(lambda >= 1.0)) {
    throw DomainError("angle_coefficient: lambda must be >= 1, got " + format_double(lambda));
  }
  // arccot(y) = atan2(1, y) for y >= 0.
  return std::atan2(1.0, std::sqrt(lambda * lambda - 1.0)) / std::numbers::pi;
}

BitString encode_angle(double omega, int angle_bits) {
  if (!(omega >= 0.0 && omega < 1.0)) {
    throw DomainError("encode_angle: omega must lie in [0, 1), got " + format_double(omega));
  }
  const double top = std::ldexp(1.0, angle_bits) - 1.0;
  const double q = std::min(std::floor(std::ldexp(omega, angle_bits) + 0.5), top);
  return BitString(static_cast<std::uint64_t>(q), angle_bits);
}

double decode_angle(const BitString& encoded) {
  return std::ldexp(static_cast<double>(encoded.value()), -encoded.width());
}

PrunedColumns prune_zero_columns(std::span<const BitString> encoded) {
  PrunedColumns out;
  if (encoded.empty()) return out;
  const int width = encoded.front().width();
  std::uint64_t any = 0;
  for (const auto& s : encoded) {
    if (s.width() != width) throw EncodingError("prune_zero_columns: mixed bit widths");
    any |= s.value();
  }
  const BitString mask(any, width);
  for (int k = 1; k <= width; ++k) {
    if (mask.bit(k)) out.kept.push_back(k);
  }
  const int kept_width = static_cast<int>(out.kept.size());
  out.reduced.reserve(encoded.size());
  for (const auto& s : encoded) {
    std::uint64_t v = 0;
    for (int k : out.kept) v = (v << 1) | static_cast<std::uint64_t>(s.bit(k));
    out.reduced.emplace_back(v, kept_width);
  }
  return out;
}

std::vector<BitString> restore_columns(const PrunedColumns& pruned, int width) {
  std::vector<BitString> out;
  out.reserve(pruned.reduced.size());
  for (const auto& r : pruned.reduced) {
    std::uint64_t v = 0;
    for (std::size_t c = 0; c < pruned.kept.size(); ++c) {
      if (r.bit(static_cast<int>(c) + 1)) v |= std::uint64_t{1} << (width - pruned.kept[c]);
    }
    out.emplace_back(v, width);
  }
  return out;
}

int distinguishing_prefix(std::span<const BitString> encoded) {
  if (encoded.size() <= 1) return 0;
  const int width = encoded.front().width();
  std::set<std::uint64_t> full;
  for (const auto& s : encoded) {
    if (s.width() != width) throw EncodingError("distinguishing_prefix: mixed bit widths");
    if (!full.insert(s.value()).second) {
      throw EncodingError("distinguishing_prefix: encoded eigenvalue " + s.str() +
                          " appears twice; increase f or m");
    }
  }
  for (int p = 1; p <= width; ++p) {
    std::set<std::uint64_t> seen;
    bool distinct = true;
    for (const auto& s : encoded) {
      if (!seen.insert(s.prefix(p).value()).second) {
        distinct = false;
        break;
      }
    }
    if (distinct) return p;
  }
  return width;  // unreachable: full-width patterns are distinct
}

AngleTable build_angle_table(const EigenData& eigs, const FixedPointFormat& fmt) {
  fmt.validate(eigs.lambdas.maxCoeff());
  AngleTable table;
  table.fmt = fmt;
  const auto count = static_cast<std::size_t>(eigs.lambdas.size());
  table.encoded_lambdas.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    const BitString enc = amplify_encode(eigs.lambdas(static_cast<Eigen::Index>(j)), fmt);
    const double eff = effective_lambda(enc, fmt);
    const double omega = angle_coefficient(eff);
    table.encoded_lambdas.push_back(enc);
    table.effective_lambdas.push_back(eff);
    table.omegas.push_back(omega);
    table.encoded_omegas.push_back(encode_angle(omega, fmt.angle_bits));
  }
  table.kept_columns = prune_zero_columns(table.encoded_omegas).kept;
  table.prefix_len = distinguishing_prefix(table.encoded_lambdas);
  return table;
}

void to_json(nlohmann::json& j, const AngleTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < table.size(); ++r) {
    rows.push_back({{"j", r + 1},
                    {"encoded_lambda", table.encoded_lambdas[r].str()},
                    {"effective_lambda", table.effective_lambdas[r]},
                    {"omega", table.omegas[r]},
                    {"encoded_omega", table.encoded_omegas[r].str()},
                    {"prefix", table.lambda_prefix(r).str()}});
  }
  j = nlohmann::json{{"format", table.fmt},
                     {"kept_columns", table.kept_columns},
                     {"prefix_len", table.prefix_len},
                     {"rows", rows}};
}

}  // namespace qpoisson
