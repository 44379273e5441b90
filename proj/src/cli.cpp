#include "teleo/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "teleo/errors.hpp"
#include "teleo/harness.hpp"
#include "teleo/runtime.hpp"

namespace teleo::cli {

namespace {

using namespace std::chrono_literals;

/// Bad arguments discovered after parsing; exits with kDiagnostics.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// `-` or empty means the fallback stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw UsageError("cannot write " + path);
            stream_ = &file_;
        }
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

std::string where(const std::string& file, const SyntaxError& e) {
    if (e.line() == 0) return file;
    return file + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column());
}

int exit_code(EngineFailure f) {
    switch (f) {
        case EngineFailure::ExceededRecursionDepth: return kRecursionDepth;
        case EngineFailure::NoFirableRule: return kNoFirableRule;
        case EngineFailure::UnboundAction: return kRuntime;
    }
    return kRuntime;
}

/// Maps exceptions escaping a command to exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kDiagnostics;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kDiagnostics;
    } catch (const EngineError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const EvalError& e) {
        err << "error: evaluation failed: " << e.what() << '\n';
        return kRuntime;
    } catch (const pedro::TransportError& e) {
        err << "error: " << e.what() << '\n';
        return kTransport;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntime;
    }
}

/// Parses a program file; prints the error and sets `code` on failure.
std::optional<Program> load(const std::string& path, std::ostream& err, int& code) {
    std::string source = read_file(path);
    try {
        return parse_program(source);
    } catch (const DuplicateDefinition& e) {
        err << where(path, e) << ": error: " << e.what() << '\n';
        code = kDiagnostics;
    } catch (const SyntaxError& e) {
        err << where(path, e) << ": error: " << e.what() << '\n';
        code = kSyntax;
    }
    return std::nullopt;
}

/// Parses and type-checks; returns nullopt after printing diagnostics.
std::optional<Program> load_checked(const std::string& path, std::ostream& err, int& code) {
    auto program = load(path, err, code);
    if (!program) return std::nullopt;
    auto diags = check_program(*program);
    bool errors = false;
    for (const auto& d : diags) {
        err << d.render(path) << '\n';
        errors = errors || d.severity == "error";
    }
    if (errors) {
        code = kDiagnostics;
        return std::nullopt;
    }
    return program;
}

std::string bracketed(const std::vector<DependencySign>& deps) {
    std::string out = "[";
    for (std::size_t i = 0; i < deps.size(); ++i) {
        if (i) out += ", ";
        out += to_string(deps[i]);
    }
    return out + "]";
}

const Procedure& find_proc(const Program& p, const std::string& name) {
    const Procedure* proc = p.find_procedure(name);
    if (!proc) throw UsageError("no procedure named '" + name + "'");
    return *proc;
}

std::size_t rule_index(const Procedure& proc, long long rule) {
    if (rule < 1 || static_cast<std::size_t>(rule) > proc.rules.size()) {
        throw UsageError(proc.name + " has no rule " + std::to_string(rule) + " (it has " +
                         std::to_string(proc.rules.size()) + ")");
    }
    return static_cast<std::size_t>(rule - 1);
}

/// `proc1:3,proc2:2` -> a firing stack, outermost first.
FiredRules parse_stack(const Program& p, const std::string& text) {
    FiredRules fired;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto colon = item.rfind(':');
        if (colon == std::string::npos) throw UsageError("stack entry '" + item + "' needs proc:rule");
        long long n = 0;
        try {
            n = std::stoll(item.substr(colon + 1));
        } catch (const std::exception&) {
            throw UsageError("bad rule number in '" + item + "'");
        }
        const Procedure& proc = find_proc(p, item.substr(0, colon));
        FiringRecord rec;
        rec.depth = fired.size() + 1;
        rec.proc = proc.name;
        rec.call = Term::atom(proc.name);
        rec.rule_index = rule_index(proc, n);
        fired.push_back(std::move(rec));
    }
    if (fired.empty()) throw UsageError("empty --stack");
    return fired;
}

std::vector<sim::TraceLine> read_percept_trace(const std::string& path, std::ostream& err, int& code) {
    std::istringstream in(read_file(path));
    std::vector<sim::TraceLine> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            out.push_back(sim::parse_trace_line(line));
        } catch (const SyntaxError& e) {
            err << path << ":" << n << ":" << e.offset() + 1 << ": error: " << e.what() << '\n';
            code = kSyntax;
            return {};
        }
    }
    return out;
}

struct BrokerFlags {
    std::string host = "127.0.0.1";
    std::uint16_t port = pedro::kDefaultPort;

    void add_to(CLI::App* app) {
        app->add_option("--host", host, "Broker host")
            ->envname("TELEO_BROKER_HOST")
            ->capture_default_str();
        app->add_option("--port", port, "Broker port")
            ->envname("TELEO_BROKER_PORT")
            ->capture_default_str();
    }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        const std::atomic<bool>& stop) {
    CLI::App app{"Teleo-reactive agent toolkit", "teleo"};
    app.require_subcommand(1);

    // check
    std::string check_file;
    auto* check = app.add_subcommand("check", "Parse and type-check a program");
    check->add_option("program", check_file, "Program file")->required();

    // analyze
    std::string an_file, an_proc, an_stack;
    long long an_rule = 0;
    bool an_all = false;
    auto* analyze = app.add_subcommand("analyze", "Print dependent predicates of rule firings");
    analyze->add_option("program", an_file, "Program file")->required();
    analyze->add_option("--proc", an_proc, "Procedure name");
    auto* rule_opt = analyze->add_option("--rule", an_rule, "Rule number, 1-based");
    auto* all_opt = analyze->add_flag("--all", an_all, "Every rule (of --proc, or of every procedure)");
    auto* stack_opt =
        analyze->add_option("--stack", an_stack, "Firing stack such as proc1:3,proc2:2; prints the union");
    rule_opt->excludes(all_opt)->excludes(stack_opt);
    all_opt->excludes(stack_opt);

    // run-agent
    std::string ag_file, ag_task, ag_trace, ag_replay;
    std::size_t ag_depth = 64;
    double ag_rate = 20;
    std::uint64_t ag_cycles = 0;
    bool ag_no_guard = false;
    BrokerFlags ag_broker;
    auto* agent = app.add_subcommand("run-agent", "Run a task against the broker or a recorded trace");
    agent->add_option("program", ag_file, "Program file")->required();
    agent->add_option("task", ag_task, "Task call, e.g. thermostat_task()")->required();
    agent->add_option("--max-depth", ag_depth, "Maximum procedure call depth")->capture_default_str();
    agent->add_option("--trace", ag_trace, "Per-cycle trace output (- for stdout)");
    agent->add_option("--percepts-from", ag_replay, "Replay percepts from a sim trace file instead of the broker");
    agent->add_option("--tick-rate", ag_rate, "Replay clock, ticks per second")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    agent->add_option("--max-cycles", ag_cycles, "Stop after this many cycles (0: no limit)");
    agent->add_flag("--no-dependency-guard", ag_no_guard, "Re-evaluate on every percept update");
    ag_broker.add_to(agent);

    // run-broker
    BrokerFlags br;
    auto* broker = app.add_subcommand("run-broker", "Run the publish/subscribe broker");
    br.add_to(broker);

    // run-sim
    std::string sim_kind, sim_trace, sim_agent, sim_task, sim_config;
    std::uint64_t sim_ticks = 0;
    double sim_rate = 20;
    BrokerFlags sim_broker;
    sim::ThermostatConfig tcfg;
    sim::AsteroidsConfig acfg;
    auto* simc = app.add_subcommand("run-sim", "Run a simulated world");
    simc->add_option("kind", sim_kind, "thermostat or asteroids")
        ->required()
        ->check(CLI::IsMember({"thermostat", "asteroids"}));
    simc->add_option("--ticks", sim_ticks, "Ticks to run (0: until stopped, 2000 with --agent)");
    simc->add_option("--tick-rate", sim_rate, "Ticks per second")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    simc->add_option("--trace", sim_trace, "Trace output, one line per tick (- for stdout)");
    simc->add_option("--agent", sim_agent, "Run this program in lock-step instead of using the broker");
    simc->add_option("--task", sim_task, "Task for --agent");
    simc->add_option("--config", sim_config, "key=value file of world settings");
    simc->allow_config_extras(CLI::config_extras_mode::error);
    sim_broker.add_to(simc);
    auto num = [&](const char* name, auto& field) {
        simc->add_option(std::string("--") + name, field)->capture_default_str()->group("World");
    };
    num("initial_temperature", tcfg.initial_temperature);
    num("heat_rate", tcfg.heat_rate);
    num("cool_rate", tcfg.cool_rate);
    num("width", acfg.width);
    num("height", acfg.height);
    num("vision_range", acfg.vision_range);
    num("dead_centre", acfg.dead_centre);
    num("centre", acfg.centre);
    num("side", acfg.side);
    num("thrust", acfg.thrust);
    num("turn_rate", acfg.turn_rate);
    num("friction", acfg.friction);
    num("max_speed", acfg.max_speed);
    num("bullet_speed", acfg.bullet_speed);
    num("bullet_life", acfg.bullet_life);
    num("asteroids", acfg.asteroids);
    num("min_radius", acfg.min_radius);
    num("max_radius", acfg.max_radius);
    num("max_drift", acfg.max_drift);
    num("clear_zone", acfg.clear_zone);
    num("seed", acfg.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kOk : kDiagnostics;
    }

    if (simc->parsed() && !sim_config.empty()) {
        // Values given on the command line win over the file.
        std::ifstream in(sim_config);
        if (!in) {
            err << "error: cannot read " << sim_config << '\n';
            return kDiagnostics;
        }
        try {
            simc->parse_from_stream(in);
        } catch (const CLI::ParseError& e) {
            err << "error: " << sim_config << ": " << e.what() << '\n';
            return kDiagnostics;
        }
    }

    if (check->parsed()) {
        return guarded(err, [&] {
            int code = kOk;
            if (!load_checked(check_file, err, code)) return code;
            out << check_file << ": ok\n";
            return static_cast<int>(kOk);
        });
    }

    if (analyze->parsed()) {
        return guarded(err, [&] {
            int code = kOk;
            auto program = load(an_file, err, code);
            if (!program) return code;
            if (!an_stack.empty()) {
                out << bracketed(dependent_predicates(parse_stack(*program, an_stack), *program)) << '\n';
            } else if (an_all) {
                for (const auto& [name, proc] : program->procedures) {
                    if (!an_proc.empty() && name != an_proc) continue;
                    for (std::size_t i = 0; i < proc.rules.size(); ++i) {
                        out << name << ':' << i + 1 << ' '
                            << bracketed(local_dependent_predicates(proc, i)) << '\n';
                    }
                }
                if (!an_proc.empty()) find_proc(*program, an_proc);
            } else {
                if (an_proc.empty() || rule_opt->count() == 0) {
                    throw UsageError("analyze needs --proc with --rule, --all, or --stack");
                }
                const Procedure& proc = find_proc(*program, an_proc);
                out << bracketed(local_dependent_predicates(proc, rule_index(proc, an_rule))) << '\n';
            }
            return static_cast<int>(kOk);
        });
    }

    if (agent->parsed()) {
        return guarded(err, [&] {
            int code = kOk;
            auto program = load_checked(ag_file, err, code);
            if (!program) return code;
            Term task = [&] {
                try {
                    return runtime::parse_task(ag_task);
                } catch (const SyntaxError& e) {
                    throw UsageError("bad task '" + ag_task + "': " + e.what());
                }
            }();
            EngineOptions eo{ag_depth, !ag_no_guard};
            Engine probe(*program, task, eo);  // validates the task

            if (!ag_replay.empty()) {
                auto trace = read_percept_trace(ag_replay, err, code);
                if (code != kOk) return code;
                if (ag_cycles && trace.size() > ag_cycles) trace.resize(ag_cycles);
                Sink sink(ag_trace, out);
                replay_percepts(*program, task, trace, ag_rate, eo, [&](const CycleReport& r) {
                    *sink << format_cycle(r) << '\n';
                    for (const auto& w : r.rejected_percepts) err << "warning: " << w << '\n';
                });
                return static_cast<int>(kOk);
            }

            std::optional<Sink> sink;
            if (!ag_trace.empty()) sink.emplace(ag_trace, out);
            runtime::AgentRunOptions ro;
            ro.broker = {ag_broker.host, ag_broker.port};
            ro.engine = eo;
            ro.max_cycles = ag_cycles;
            ro.on_cycle = [&](const CycleReport& r) {
                if (sink) **sink << format_cycle(r) << std::endl;
            };
            ro.on_warning = [&](const std::string& w) { err << "warning: " << w << '\n'; };
            runtime::run_live_agent(*program, task, ro, stop);
            return static_cast<int>(kOk);
        });
    }

    if (broker->parsed()) {
        return guarded(err, [&] {
            pedro::Broker b({br.host, br.port});
            b.start();
            out << "listening on " << br.host << ':' << b.port() << std::endl;
            while (!stop) std::this_thread::sleep_for(50ms);
            b.stop();
            return static_cast<int>(kOk);
        });
    }

    if (simc->parsed()) {
        return guarded(err, [&] {
            if (!(0 < acfg.dead_centre && acfg.dead_centre < acfg.centre && acfg.centre < acfg.side)) {
                throw UsageError("cutoffs must satisfy 0 < dead_centre < centre < side");
            }
            std::unique_ptr<sim::World> world;
            if (sim_kind == "thermostat") {
                world = std::make_unique<sim::ThermostatWorld>(tcfg);
            } else {
                world = std::make_unique<sim::AsteroidsWorld>(acfg);
            }
            std::optional<Sink> sink;
            if (!sim_trace.empty()) sink.emplace(sim_trace, out);

            if (!sim_agent.empty()) {
                if (sim_task.empty()) throw UsageError("--agent needs --task");
                int code = kOk;
                auto program = load_checked(sim_agent, err, code);
                if (!program) return code;
                Term task = runtime::parse_task(sim_task);
                LockstepOptions lo;
                lo.max_ticks = sim_ticks ? sim_ticks : 2000;
                lo.tick_rate = sim_rate;
                auto result = run_lockstep(*program, task, *world, lo);
                if (sink) {
                    for (const auto& line : result.trace) **sink << sim::format_trace_line(line) << '\n';
                }
                out << "ticks=" << result.ticks << " done=" << (result.done ? "true" : "false") << '\n';
                return static_cast<int>(kOk);
            }

            runtime::SimRunOptions so;
            so.broker = {sim_broker.host, sim_broker.port};
            so.tick_rate = sim_rate;
            so.max_ticks = sim_ticks;
            so.on_tick = [&](const sim::TraceLine& line) {
                if (sink) **sink << sim::format_trace_line(line) << '\n';
            };
            so.on_warning = [&](const std::string& w) { err << "warning: " << w << '\n'; };
            auto ticks = runtime::run_live_sim(*world, so, stop);
            out << "ticks=" << ticks << " done=" << (world->done() ? "true" : "false") << '\n';
            return static_cast<int>(kOk);
        });
    }
    return kDiagnostics;
}

}  // namespace teleo::cli
