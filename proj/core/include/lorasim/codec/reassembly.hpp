#pragma once

#include <compare>
#include <map>
#include <stdexcept>
#include <variant>
#include <vector>

#include "lorasim/codec/frame.hpp"

namespace lorasim::codec {

struct ReassemblyKey {
  NodeId source = 0;
  std::uint16_t message_id = 0;
  auto operator<=>(const ReassemblyKey&) const = default;
};

struct ReassemblyBuffer {
  ReassemblyKey key;
  FrameKind kind = FrameKind::kData;
  std::uint16_t expected_total = 0;
  std::vector<bool> received;
  std::vector<std::vector<std::uint8_t>> fragments;
  std::size_t received_count = 0;
  SimTime first_seen;
  SimTime last_activity;

  bool complete() const { return received_count == expected_total; }
  /// Unset indices, ascending.
  std::vector<std::uint16_t> missing() const;
};

struct Incomplete {
  std::size_t missing = 0;
};
struct Complete {
  std::vector<std::uint8_t> payload;
};
struct Duplicate {};
using AcceptStatus = std::variant<Incomplete, Complete, Duplicate>;

/// Violations of the fragmentation protocol (conflicting totals, corrupt text).
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reassembly buffers keyed by (source, message id). Completed buffers are
/// released immediately.
class ReassemblySet {
 public:
  /// Throws ProtocolError when fragment_total disagrees with an existing buffer,
  /// the frame is not a data kind, or the reassembled text is not valid base64.
  AcceptStatus accept_fragment(const Frame& frame, SimTime t);

  /// Throws std::out_of_range for an unknown key.
  std::vector<std::uint16_t> missing_fragments(const ReassemblyKey& key) const;

  const ReassemblyBuffer* find(const ReassemblyKey& key) const;
  bool erase(const ReassemblyKey& key) { return buffers_.erase(key) > 0; }

  /// Removes buffers idle for at least `idle`; returns their keys.
  std::vector<ReassemblyKey> expire(SimTime now, Duration idle);

  std::size_t size() const { return buffers_.size(); }

 private:
  std::map<ReassemblyKey, ReassemblyBuffer> buffers_;
};

}  // namespace lorasim::codec
