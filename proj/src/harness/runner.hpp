#pragma once

#include <optional>
#include <string>
#include <vector>

#include "harness/report.hpp"
#include "harness/topology.hpp"
#include "mcx/mcx.h"

namespace mcx::harness {

enum class Affinity { PinnedOne, None, Spread };

struct RunConfig {
    mcx_backend backend = MCX_BACKEND_LOCKFREE;
    Affinity affinity = Affinity::None;
    std::optional<mcx_kind> kind_override;  // applied to every channel
    uint32_t count = 1000;    // transaction ids 1..count per channel
    uint32_t payload = 24;    // bytes per message/packet
    uint32_t reps = 1;
    uint32_t warmup = 1;      // discarded runs per config
    double deadline_s = 30.0; // wall-clock bound per repetition
};

const char* backend_name(mcx_backend b);
const char* affinity_name(Affinity a);
const char* kind_name(mcx_kind k);

// Effective core count: MCX_CORES environment override, else hardware.
uint32_t detect_cores();

// Runs every config against the topology, one node thread per declared node,
// warmups discarded. Returns false (with `error` set) on OUT_OF_ORDER,
// DEADLINE, or any runtime/validation failure; reports produced so far are
// left in `reports`.
bool run_matrix(const Topology& topo, const std::vector<RunConfig>& configs,
                std::vector<RunReport>& reports, std::string& error);

}  // namespace mcx::harness
