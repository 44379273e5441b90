#include "teleo/harness.hpp"

namespace teleo {

LockstepResult run_lockstep(const Program& program, const Term& task, sim::World& world,
                            const LockstepOptions& options, const EngineOptions& engine_options,
                            const std::function<void(const CycleReport&)>& on_cycle) {
    Engine engine(program, task, engine_options);
    LockstepResult result;
    Term current = controls_term({});
    while (result.ticks < options.max_ticks) {
        if (options.stop_when_done && world.done()) break;
        std::uint64_t tick = world.tick();
        std::vector<Term> percepts = world.sense();
        CycleReport report = engine.cycle(percepts, static_cast<double>(tick) / options.tick_rate);
        if (report.controls) {
            current = *report.controls;
            world.apply_controls(current);
        }
        if (on_cycle) on_cycle(report);
        result.trace.push_back({tick, std::move(percepts), current});
        world.step();
        ++result.ticks;
    }
    result.done = world.done();
    return result;
}

std::vector<CycleReport> replay_percepts(const Program& program, const Term& task,
                                         const std::vector<sim::TraceLine>& trace, double tick_rate,
                                         const EngineOptions& engine_options,
                                         const std::function<void(const CycleReport&)>& on_cycle) {
    Engine engine(program, task, engine_options);
    std::vector<CycleReport> out;
    for (const auto& line : trace) {
        out.push_back(engine.cycle(line.percepts, static_cast<double>(line.tick) / tick_rate));
        if (on_cycle) on_cycle(out.back());
    }
    return out;
}

}  // namespace teleo
