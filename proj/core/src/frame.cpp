#include "lorasim/codec/frame.hpp"

#include <algorithm>

#include "lorasim/codec/base64.hpp"

namespace lorasim::codec {
namespace {

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

std::uint16_t get16(std::span<const std::uint8_t> in, std::size_t at) {
  return static_cast<std::uint16_t>((in[at] << 8) | in[at + 1]);
}

bool known_kind(std::uint8_t k) { return k >= 1 && k <= 6; }

}  // namespace

const char* to_string(FrameKind kind) {
  switch (kind) {
    case FrameKind::kData: return "DATA";
    case FrameKind::kAck: return "ACK";
    case FrameKind::kNack: return "NACK";
    case FrameKind::kHeartbeat: return "HEARTBEAT";
    case FrameKind::kBundleData: return "BUNDLE_DATA";
    case FrameKind::kMetricsData: return "METRICS_DATA";
  }
  return "?";
}

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  if (frame.body.size() > kMaxBodyBytes)
    throw FrameError(FrameError::Code::kTooLong, "frame body exceeds 242 bytes");
  const auto& h = frame.header;
  std::vector<std::uint8_t> out;
  out.reserve(frame.wire_size());
  out.push_back(static_cast<std::uint8_t>((h.version << 4) | static_cast<std::uint8_t>(h.kind)));
  out.push_back(h.source);
  out.push_back(h.dest);
  put16(out, h.message_id);
  put16(out, h.fragment_index);
  put16(out, h.fragment_total);
  out.push_back(static_cast<std::uint8_t>(frame.body.size()));
  out.insert(out.end(), frame.body.begin(), frame.body.end());
  return out;
}

Frame decode_frame(std::span<const std::uint8_t> wire) {
  using Code = FrameError::Code;
  if (wire.size() < kHeaderBytes)
    throw FrameError(Code::kTooShort, "frame shorter than the 10-byte header (" + std::to_string(wire.size()) + ")");
  if (wire.size() > kMaxFrameBytes) throw FrameError(Code::kTooLong, "frame longer than 252 bytes");

  Frame f;
  auto& h = f.header;
  h.version = wire[0] >> 4;
  const std::uint8_t kind = wire[0] & 0x0f;
  if (h.version != kProtocolVersion)
    throw FrameError(Code::kVersion, "unsupported protocol version " + std::to_string(h.version));
  if (!known_kind(kind)) throw FrameError(Code::kUnknownKind, "unknown frame kind " + std::to_string(kind));
  h.kind = static_cast<FrameKind>(kind);
  h.source = wire[1];
  h.dest = wire[2];
  h.message_id = get16(wire, 3);
  h.fragment_index = get16(wire, 5);
  h.fragment_total = get16(wire, 7);
  const std::size_t body_len = wire[9];
  if (body_len != wire.size() - kHeaderBytes)
    throw FrameError(Code::kLengthMismatch, "body length field " + std::to_string(body_len) + " != " +
                                                std::to_string(wire.size() - kHeaderBytes));
  if (h.fragment_total == 0 || h.fragment_index >= h.fragment_total)
    throw FrameError(Code::kBadFragment, "fragment " + std::to_string(h.fragment_index) + " of " +
                                             std::to_string(h.fragment_total));
  f.body.assign(wire.begin() + kHeaderBytes, wire.end());
  if (is_data_kind(h.kind) && !std::all_of(f.body.begin(), f.body.end(), is_base64_char))
    throw FrameError(Code::kAlphabet, "non-base64 byte in data body");
  return f;
}

std::size_t fragment_count(std::size_t raw_bytes) {
  const std::size_t text = base64_length(raw_bytes);
  return text == 0 ? 1 : (text + kMaxBodyBytes - 1) / kMaxBodyBytes;
}

std::vector<Frame> encode_message(FrameKind kind, NodeId source, NodeId dest, std::uint16_t message_id,
                                  std::span<const std::uint8_t> payload, std::size_t max_message_bytes) {
  if (payload.size() > max_message_bytes)
    throw FrameError(FrameError::Code::kOversize, "payload of " + std::to_string(payload.size()) +
                                                      " bytes exceeds the " + std::to_string(max_message_bytes) +
                                                      "-byte message limit");
  const std::size_t total = fragment_count(payload.size());
  if (total > 0xffff) throw FrameError(FrameError::Code::kOversize, "payload needs more than 65535 fragments");

  const std::string text = base64_encode(payload);
  std::vector<Frame> frames;
  frames.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    Frame f;
    f.header.kind = kind;
    f.header.source = source;
    f.header.dest = dest;
    f.header.message_id = message_id;
    f.header.fragment_index = static_cast<std::uint16_t>(i);
    f.header.fragment_total = static_cast<std::uint16_t>(total);
    const std::size_t begin = i * kMaxBodyBytes;
    const std::size_t end = std::min(text.size(), begin + kMaxBodyBytes);
    if (begin < end) f.body.assign(text.begin() + static_cast<std::ptrdiff_t>(begin), text.begin() + static_cast<std::ptrdiff_t>(end));
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<std::uint8_t> encode_nack_body(std::span<const std::uint16_t> missing) {
  std::vector<std::uint8_t> out;
  out.reserve(missing.size() * 2);
  for (const auto idx : missing) put16(out, idx);
  return out;
}

std::vector<std::uint16_t> decode_nack_body(std::span<const std::uint8_t> body) {
  if (body.size() % 2 != 0) throw FrameError(FrameError::Code::kLengthMismatch, "odd-length NACK body");
  std::vector<std::uint16_t> out;
  out.reserve(body.size() / 2);
  for (std::size_t i = 0; i < body.size(); i += 2) out.push_back(get16(body, i));
  return out;
}

}  // namespace lorasim::codec
