#pragma once
// Runs an engine against a simulated world without the network, and
// replays recorded percept traces.

#include <cstdint>
#include <functional>
#include <vector>

#include "teleo/engine.hpp"
#include "teleo/sim.hpp"

namespace teleo {

struct LockstepOptions {
    std::uint64_t max_ticks = 2000;
    double tick_rate = 20;  // engine time is tick / tick_rate
    bool stop_when_done = true;
};

struct LockstepResult {
    std::uint64_t ticks = 0;  // ticks stepped
    bool done = false;        // the world reached its goal
    std::vector<sim::TraceLine> trace;
};

/// Each tick: sense, one engine cycle, apply any new controls, step. The
/// trace line for tick k holds the percepts sensed at k and the controls in
/// force for the step from k to k + 1. EngineError propagates.
LockstepResult run_lockstep(const Program& program, const Term& task, sim::World& world,
                            const LockstepOptions& options = {}, const EngineOptions& engine = {},
                            const std::function<void(const CycleReport&)>& on_cycle = {});

/// Feeds recorded percepts to a fresh engine, one cycle per line, at time
/// tick / tick_rate.
std::vector<CycleReport> replay_percepts(const Program& program, const Term& task,
                                         const std::vector<sim::TraceLine>& trace, double tick_rate,
                                         const EngineOptions& engine = {},
                                         const std::function<void(const CycleReport&)>& on_cycle = {});

}  // namespace teleo
