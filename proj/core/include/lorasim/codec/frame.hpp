#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lorasim/sim/kernel.hpp"

namespace lorasim::codec {

// Wire layout, big-endian, 10-byte header followed by the body:
//
//   0      version:4 | kind:4
//   1      source node id
//   2      destination node id (255 = broadcast)
//   3..4   message id
//   5..6   fragment index
//   7..8   fragment total
//   9      body length
//   10..   body (<= 242 bytes)

inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::size_t kHeaderBytes = 10;
inline constexpr std::size_t kMaxFrameBytes = 252;
inline constexpr std::size_t kMaxBodyBytes = kMaxFrameBytes - kHeaderBytes;
inline constexpr std::size_t kDefaultMaxMessageBytes = 1 << 20;

enum class FrameKind : std::uint8_t {
  kData = 1,
  kAck = 2,
  kNack = 3,
  kHeartbeat = 4,
  kBundleData = 5,
  kMetricsData = 6,
};

const char* to_string(FrameKind kind);

/// DATA, BUNDLE_DATA and METRICS_DATA carry base64 bodies and are reassembled.
constexpr bool is_data_kind(FrameKind k) {
  return k == FrameKind::kData || k == FrameKind::kBundleData || k == FrameKind::kMetricsData;
}

struct FrameHeader {
  std::uint8_t version = kProtocolVersion;
  FrameKind kind = FrameKind::kData;
  NodeId source = 0;
  NodeId dest = kBroadcast;
  std::uint16_t message_id = 0;
  std::uint16_t fragment_index = 0;
  std::uint16_t fragment_total = 1;

  bool operator==(const FrameHeader&) const = default;
};

struct Frame {
  FrameHeader header;
  std::vector<std::uint8_t> body;

  std::size_t wire_size() const { return kHeaderBytes + body.size(); }
  bool operator==(const Frame&) const = default;
};

class FrameError : public std::runtime_error {
 public:
  enum class Code { kTooShort, kLengthMismatch, kVersion, kUnknownKind, kBadFragment, kAlphabet, kTooLong, kOversize };

  FrameError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

std::vector<std::uint8_t> encode_frame(const Frame& frame);
/// Throws FrameError on malformed input.
Frame decode_frame(std::span<const std::uint8_t> wire);

/// Base64-encodes the whole payload, then splits the text into <=242-byte
/// bodies. Always yields at least one frame. Throws FrameError(kOversize) when
/// the payload exceeds max_message_bytes or needs more than 65535 fragments.
std::vector<Frame> encode_message(FrameKind kind, NodeId source, NodeId dest, std::uint16_t message_id,
                                  std::span<const std::uint8_t> payload,
                                  std::size_t max_message_bytes = kDefaultMaxMessageBytes);

/// Number of frames encode_message produces for a payload of `raw_bytes`.
std::size_t fragment_count(std::size_t raw_bytes);

/// NACK body: consecutive big-endian 16-bit fragment indices.
std::vector<std::uint8_t> encode_nack_body(std::span<const std::uint16_t> missing);
std::vector<std::uint16_t> decode_nack_body(std::span<const std::uint8_t> body);

}  // namespace lorasim::codec
