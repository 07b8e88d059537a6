#include "lorasim/codec/reassembly.hpp"

#include <string>

#include "lorasim/codec/base64.hpp"

namespace lorasim::codec {

std::vector<std::uint16_t> ReassemblyBuffer::missing() const {
  std::vector<std::uint16_t> out;
  for (std::size_t i = 0; i < received.size(); ++i) {
    if (!received[i]) out.push_back(static_cast<std::uint16_t>(i));
  }
  return out;
}

AcceptStatus ReassemblySet::accept_fragment(const Frame& frame, SimTime t) {
  const auto& h = frame.header;
  if (!is_data_kind(h.kind)) throw ProtocolError(std::string("not a data frame: ") + to_string(h.kind));
  const ReassemblyKey key{h.source, h.message_id};

  auto it = buffers_.find(key);
  if (it == buffers_.end()) {
    ReassemblyBuffer buf;
    buf.key = key;
    buf.kind = h.kind;
    buf.expected_total = h.fragment_total;
    buf.received.assign(h.fragment_total, false);
    buf.fragments.resize(h.fragment_total);
    buf.first_seen = t;
    buf.last_activity = t;
    it = buffers_.emplace(key, std::move(buf)).first;
  } else if (it->second.expected_total != h.fragment_total || it->second.kind != h.kind) {
    throw ProtocolError("fragment_total " + std::to_string(h.fragment_total) + " conflicts with buffer for message " +
                        std::to_string(h.message_id) + " from node " + std::to_string(h.source) + " (expected " +
                        std::to_string(it->second.expected_total) + ")");
  }

  auto& buf = it->second;
  buf.last_activity = t;
  if (buf.received[h.fragment_index]) return Duplicate{};
  buf.received[h.fragment_index] = true;
  buf.fragments[h.fragment_index] = frame.body;
  ++buf.received_count;
  if (!buf.complete()) return Incomplete{buf.expected_total - buf.received_count};

  std::string text;
  for (const auto& part : buf.fragments) text.append(part.begin(), part.end());
  buffers_.erase(it);
  auto payload = base64_decode(text);
  if (!payload) throw ProtocolError("reassembled message is not valid base64");
  return Complete{std::move(*payload)};
}

std::vector<std::uint16_t> ReassemblySet::missing_fragments(const ReassemblyKey& key) const {
  auto it = buffers_.find(key);
  if (it == buffers_.end()) throw std::out_of_range("no reassembly buffer for that key");
  return it->second.missing();
}

const ReassemblyBuffer* ReassemblySet::find(const ReassemblyKey& key) const {
  auto it = buffers_.find(key);
  return it == buffers_.end() ? nullptr : &it->second;
}

std::vector<ReassemblyKey> ReassemblySet::expire(SimTime now, Duration idle) {
  std::vector<ReassemblyKey> gone;
  for (auto it = buffers_.begin(); it != buffers_.end();) {
    if (now - it->second.last_activity >= idle) {
      gone.push_back(it->first);
      it = buffers_.erase(it);
    } else {
      ++it;
    }
  }
  return gone;
}

}  // namespace lorasim::codec
