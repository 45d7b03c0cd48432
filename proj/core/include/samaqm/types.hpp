#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

namespace samaqm {

/// Virtual time in seconds.
using SimTime = double;

using FlowId = std::uint32_t;

struct Packet {
  std::uint64_t id = 0;
  FlowId flow = 0;
  std::uint32_t size_bytes = 0;
  /// When the source handed the packet to the network; used for RTT samples.
  SimTime sent_time = 0.0;
  /// Set iff the bottleneck accepted the packet.
  std::optional<SimTime> enqueue_time;
};

/// Bottleneck buffer occupancy. `occupancy` counts waiting packets only;
/// the packet being serialized onto the link is `in_service`.
struct QueueState {
  std::size_t occupancy = 0;
  std::size_t capacity = 0;
  std::size_t in_service = 0;

  bool full() const { return occupancy >= capacity; }
  double utilization() const {
    return capacity == 0 ? 0.0 : static_cast<double>(occupancy) / static_cast<double>(capacity);
  }
};

enum class AqmDecision { Enqueue, Drop };

}  // namespace samaqm
