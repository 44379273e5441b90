#include "teleo/runtime.hpp"

#include <thread>

#include "teleo/errors.hpp"

namespace teleo::runtime {

using namespace std::chrono_literals;
using Clock = std::chrono::steady_clock;

Term parse_task(const std::string& text) {
    std::string t = text;
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
    if (t.size() > 2 && t.compare(t.size() - 2, 2, "()") == 0) t.resize(t.size() - 2);
    Term task = parse_term(t);
    if (!task.is_predicate() || !is_ground(task)) {
        throw std::invalid_argument("task must be a ground procedure call: " + text);
    }
    return task;
}

namespace {

class PedroAgentIO : public AgentIO {
public:
    PedroAgentIO(pedro::Client& client, const AgentRunOptions& options, const std::atomic<bool>& stop)
        : client_(client), options_(options), stop_(stop), start_(Clock::now()) {}

    std::optional<std::vector<Term>> next_percepts() override {
        if (options_.max_cycles && cycles_ >= options_.max_cycles) return std::nullopt;
        while (!stop_) {
            auto d = client_.next_delivery(50ms);
            if (!d) {
                if (!client_.connected()) throw pedro::TransportError("broker connection closed");
                continue;
            }
            while (auto more = client_.next_delivery(0ms)) d = std::move(more);
            const Term& msg = d->second;
            if (!msg.is_compound() || msg.name() != "percepts" || msg.arity() != 1 ||
                !msg.args()[0].is_list()) {
                on_warning("ignored delivery " + format_term(msg));
                continue;
            }
            now_ = std::chrono::duration<double>(Clock::now() - start_).count();
            ++cycles_;
            auto items = msg.args()[0].args();
            return std::vector<Term>(items.begin(), items.end());
        }
        return std::nullopt;
    }

    double now() override { return now_; }

    void send_controls(const Term& controls) override {
        if (!client_.notify(controls)) on_warning("broker refused " + format_term(controls));
    }

    void on_cycle(const CycleReport& r) override {
        if (options_.on_cycle) options_.on_cycle(r);
    }

    void on_warning(const std::string& w) override {
        if (options_.on_warning) options_.on_warning(w);
    }

private:
    pedro::Client& client_;
    const AgentRunOptions& options_;
    const std::atomic<bool>& stop_;
    Clock::time_point start_;
    double now_ = 0;
    std::uint64_t cycles_ = 0;
};

}  // namespace

void run_live_agent(const Program& program, const Term& task, const AgentRunOptions& options,
                    const std::atomic<bool>& stop) {
    pedro::Client client = pedro::Client::connect(options.broker.host, options.broker.port);
    if (!client.subscribe(parse_term("percepts(P)"), Term::atom("true"), 0)) {
        throw pedro::TransportError("broker refused the percepts subscription");
    }
    if (options.on_ready) options.on_ready();
    PedroAgentIO io(client, options, stop);
    run_task(program, task, io, options.engine);
}

std::uint64_t run_live_sim(sim::World& world, const SimRunOptions& options,
                           const std::atomic<bool>& stop) {
    pedro::Client client = pedro::Client::connect(options.broker.host, options.broker.port);
    if (!client.subscribe(parse_term("controls(X)"), Term::atom("true"), 0)) {
        throw pedro::TransportError("broker refused the controls subscription");
    }
    auto warn = [&](const std::string& w) {
        if (options.on_warning) options.on_warning(w);
    };
    const auto period = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(1.0 / options.tick_rate));
    Term current = controls_term({});
    std::uint64_t ticks = 0;
    auto deadline = Clock::now();
    while (!stop && (options.max_ticks == 0 || ticks < options.max_ticks)) {
        if (options.stop_when_done && world.done()) break;
        deadline += period;
        std::vector<Term> percepts = world.sense();
        if (!client.notify(Term::compound("percepts", {Term::list(percepts)}))) {
            warn("broker refused percepts");
        }
        for (;;) {
            auto left = deadline - Clock::now();
            if (left <= Clock::duration::zero()) break;
            auto d = client.next_delivery(std::chrono::duration_cast<std::chrono::milliseconds>(left) + 1ms);
            if (!d) {
                if (!client.connected()) throw pedro::TransportError("broker connection closed");
                continue;
            }
            try {
                for (const auto& name : world.apply_controls(d->second)) warn("unknown action " + name);
                current = d->second;
            } catch (const InternalError& e) {
                warn(e.what());
            }
        }
        if (options.on_tick) options.on_tick({world.tick(), std::move(percepts), current});
        world.step();
        ++ticks;
    }
    return ticks;
}

}  // namespace teleo::runtime
