#pragma once

#include <cstddef>
#include <cstdint>

#include "lorasim/time.hpp"

namespace lorasim::radio {

inline constexpr std::size_t kMaxPhyPayload = 255;

/// LoRa modem configuration. Defaults are SF7 / 125 kHz / CR 4/5 / 20 dBm / 868 MHz.
struct RadioParams {
  int spreading_factor = 7;
  std::uint32_t bandwidth_hz = 125'000;
  int coding_rate_denominator = 5;
  int tx_power_dbm = 20;
  std::uint64_t frequency_hz = 868'000'000;
  int preamble_symbols = 8;
  bool explicit_header = true;
  bool crc_enabled = true;
  bool low_data_rate_optimize = false;

  bool operator==(const RadioParams&) const = default;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  Duration symbol_time() const;
  /// True when requested, and always when the symbol time exceeds 16 ms.
  bool effective_ldro() const;
};

/// Number of payload symbols (including the 8 fixed header symbols).
std::int64_t payload_symbols(const RadioParams& p, std::size_t payload_len);

/// Semtech SX127x time-on-air, rounded to the nearest microsecond.
/// Throws std::invalid_argument when payload_len > 255.
Duration airtime(const RadioParams& p, std::size_t payload_len);

/// Receiver sensitivity in dBm for the (SF, BW) pair, SX1276 datasheet figures.
double sensitivity_dbm(int spreading_factor, std::uint32_t bandwidth_hz);

}  // namespace lorasim::radio
