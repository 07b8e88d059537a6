#include "lorasim/radio/params.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace lorasim::radio {
namespace {

bool supported_bandwidth(std::uint32_t bw) { return bw == 125'000 || bw == 250'000 || bw == 500'000; }

std::int64_t ceil_div(std::int64_t num, std::int64_t den) {
  return num >= 0 ? (num + den - 1) / den : -((-num) / den);
}

}  // namespace

void RadioParams::validate() const {
  if (spreading_factor < 7 || spreading_factor > 12)
    throw std::invalid_argument("spreading_factor must be 7..12, got " + std::to_string(spreading_factor));
  if (!supported_bandwidth(bandwidth_hz))
    throw std::invalid_argument("bandwidth_hz must be 125000, 250000 or 500000, got " +
                                std::to_string(bandwidth_hz));
  if (coding_rate_denominator < 5 || coding_rate_denominator > 8)
    throw std::invalid_argument("coding_rate must be 5..8 (4/5..4/8), got " +
                                std::to_string(coding_rate_denominator));
  if (tx_power_dbm < -4 || tx_power_dbm > 20)
    throw std::invalid_argument("tx_power_dbm must be -4..20, got " + std::to_string(tx_power_dbm));
  if (preamble_symbols < 6 || preamble_symbols > 65535)
    throw std::invalid_argument("preamble_symbols must be 6..65535, got " + std::to_string(preamble_symbols));
  if (frequency_hz == 0) throw std::invalid_argument("frequency_hz must be positive");
}

Duration RadioParams::symbol_time() const {
  // 2^SF / BW seconds, exact in microseconds for the supported bandwidths.
  return Duration((std::int64_t{1} << spreading_factor) * 1'000'000 / bandwidth_hz);
}

bool RadioParams::effective_ldro() const { return low_data_rate_optimize || symbol_time() > 16ms; }

std::int64_t payload_symbols(const RadioParams& p, std::size_t payload_len) {
  const std::int64_t sf = p.spreading_factor;
  const std::int64_t de = p.effective_ldro() ? 1 : 0;
  const std::int64_t ih = p.explicit_header ? 0 : 1;
  const std::int64_t crc = p.crc_enabled ? 1 : 0;
  const std::int64_t num = 8 * static_cast<std::int64_t>(payload_len) - 4 * sf + 28 + 16 * crc - 20 * ih;
  const std::int64_t blocks = std::max<std::int64_t>(ceil_div(num, 4 * (sf - 2 * de)), 0);
  return 8 + blocks * p.coding_rate_denominator;
}

Duration airtime(const RadioParams& p, std::size_t payload_len) {
  if (payload_len > kMaxPhyPayload)
    throw std::invalid_argument("payload_len " + std::to_string(payload_len) + " exceeds 255 bytes");
  // Work in quarter symbols so the 4.25-symbol preamble tail stays integral.
  const std::int64_t quarter_symbols = 4 * p.preamble_symbols + 17 + 4 * payload_symbols(p, payload_len);
  const std::int64_t numerator = quarter_symbols * (std::int64_t{1} << p.spreading_factor) * 1'000'000;
  const std::int64_t denominator = 4 * static_cast<std::int64_t>(p.bandwidth_hz);
  return Duration((numerator + denominator / 2) / denominator);
}

double sensitivity_dbm(int spreading_factor, std::uint32_t bandwidth_hz) {
  static constexpr std::array<double, 6> k125{-123.0, -126.0, -129.0, -132.0, -134.5, -137.0};
  static constexpr std::array<double, 6> k250{-120.0, -123.0, -125.0, -128.0, -130.0, -133.0};
  static constexpr std::array<double, 6> k500{-116.0, -119.0, -122.0, -125.0, -128.0, -130.0};
  if (spreading_factor < 7 || spreading_factor > 12) throw std::invalid_argument("spreading_factor out of range");
  const auto i = static_cast<std::size_t>(spreading_factor - 7);
  switch (bandwidth_hz) {
    case 125'000: return k125[i];
    case 250'000: return k250[i];
    case 500'000: return k500[i];
    default: throw std::invalid_argument("unsupported bandwidth");
  }
}

}  // namespace lorasim::radio
