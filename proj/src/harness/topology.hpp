#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcx/mcx.h"

namespace mcx::harness {

// Declarative wiring: which nodes exist and which directed channels connect
// them. Parsed from a sectioned key/value text file:
//
//   [nodes]
//   ids = 0, 1
//
//   [channel]        # one section per channel
//   send = 0
//   recv = 1
//   kind = message   # message | packet | scalar
//   priority = 0     # 0 (highest) .. 3
//   capacity = 64    # ring slots, power of two; 0 = runtime default
struct ChannelSpec {
    uint32_t send_node = 0;
    uint32_t recv_node = 0;
    mcx_kind kind = MCX_KIND_MESSAGE;
    uint32_t priority = 0;
    uint32_t ring_capacity = 0;
    int line = 0;  // where the section started, for diagnostics
};

struct Topology {
    std::vector<uint32_t> nodes;
    std::vector<ChannelSpec> channels;
};

struct TopologyError {
    int line = 0;  // 0 when the problem is file-level
    std::string message;
};

bool load_topology(const std::string& path, Topology& out, TopologyError& err);

}  // namespace mcx::harness
