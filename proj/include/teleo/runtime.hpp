#pragma once
// Networked runners: an agent driven by percepts from the broker, and a
// simulator that publishes percepts and applies controls in real time.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "teleo/engine.hpp"
#include "teleo/pedro.hpp"
#include "teleo/sim.hpp"

namespace teleo::runtime {

struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = pedro::kDefaultPort;
};

struct AgentRunOptions {
    Endpoint broker;
    EngineOptions engine;
    std::uint64_t max_cycles = 0;  // 0 = until stopped or disconnected
    std::function<void(const CycleReport&)> on_cycle;
    std::function<void(const std::string&)> on_warning;
    /// Called once the agent is connected and subscribed.
    std::function<void()> on_ready;
};

/// Subscribes to `percepts(P)` and runs the engine on each update; a burst
/// of queued updates coalesces to the latest. Engine time is wall-clock
/// seconds since start. Returns when stopped, after max_cycles, or throws
/// EngineError / TransportError.
void run_live_agent(const Program& program, const Term& task, const AgentRunOptions& options,
                    const std::atomic<bool>& stop);

struct SimRunOptions {
    Endpoint broker;
    double tick_rate = 20;
    std::uint64_t max_ticks = 0;  // 0 = until stopped
    bool stop_when_done = true;
    std::function<void(const sim::TraceLine&)> on_tick;
    std::function<void(const std::string&)> on_warning;
};

/// Each tick: publish `percepts([...])`, wait out the tick period applying
/// any controls that arrive, then step. Returns the number of ticks run.
std::uint64_t run_live_sim(sim::World& world, const SimRunOptions& options,
                           const std::atomic<bool>& stop);

/// Parses a task such as `thermostat_task()`, `thermostat_task` or
/// `regulate_temperature(18)`. Throws SyntaxError or std::invalid_argument.
Term parse_task(const std::string& text);

}  // namespace teleo::runtime
