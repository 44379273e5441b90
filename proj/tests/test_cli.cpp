#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <condition_variable>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "support/corpus.hpp"
#include "teleo/cli.hpp"
#include "teleo/harness.hpp"
#include "teleo/runtime.hpp"

extern char** environ;

using namespace teleo;
using namespace teleo::testing;
using namespace std::chrono_literals;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

CliResult teleo_cli(std::vector<std::string> args) {
    std::vector<const char*> argv{"teleo"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    std::atomic<bool> stop{false};
    CliResult r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err, stop);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / ("teleo_cli_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

std::string write_temp(const std::string& name, const std::string& text) {
    auto path = temp_dir() / name;
    std::ofstream(path) << text;
    return path.string();
}

std::size_t count_lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("check: exit codes and diagnostics") {
    auto ok = teleo_cli({"check", corpus_path("regulate_temperature.tr")});
    CHECK(ok.code == cli::kOk);
    CHECK(ok.err.empty());

    auto dog = teleo_cli({"check", corpus_path("dog.tr")});
    CHECK(dog.code == cli::kDiagnostics);
    CHECK(count_lines(dog.err) == 1);
    CHECK(dog.err.rfind(corpus_path("dog.tr") + ":", 0) == 0);
    CHECK(dog.err.find(": error: ") != std::string::npos);

    std::string src = read_corpus("thermostat_task.tr");
    auto cut = write_temp("truncated.tr", src.substr(0, src.size() / 2 + 20));
    auto trunc = teleo_cli({"check", cut});
    CHECK(trunc.code == cli::kSyntax);
    CHECK(trunc.err.rfind(cut + ":", 0) == 0);

    auto zig = teleo_cli({"check", corpus_path("zigzag.tr")});
    CHECK(zig.code == cli::kSyntax);
    CHECK(zig.err.find("unsupported") != std::string::npos);

    CHECK(teleo_cli({"check", "/nonexistent/x.tr"}).code == cli::kDiagnostics);
}

TEST_CASE("analyze: local lists and the stack union") {
    std::string p1 = corpus_path("dependent_proc1.tr");
    CHECK(teleo_cli({"analyze", p1, "--proc", "proc1", "--rule", "1"}).out == "[--a, --b]\n");
    CHECK(teleo_cli({"analyze", p1, "--proc", "proc1", "--rule", "2"}).out == "[--d, --e, ++a, ++b]\n");
    auto all = teleo_cli({"analyze", p1, "--all"});
    CHECK(all.code == 0);
    CHECK(all.out ==
          "proc1:1 [--a, --b]\n"
          "proc1:2 [--d, --e, ++a, ++b]\n"
          "proc1:3 [--f, --g, ++a, ++b, ++d, ++e]\n"
          "proc1:4 [++a, ++b, ++d, ++e, ++f, ++g]\n");
    auto stack = teleo_cli({"analyze", corpus_path("dependent_stack.tr"), "--stack", "proc1:3,proc2:2"});
    CHECK(stack.code == 0);
    CHECK(stack.out == "[++a, ++b, ++d, ++e, --f, ++k, --m]\n");

    auto single = write_temp("single.tr", "durative go : ()\np : () ~>\np(){\ntrue ~> go\n}\n");
    CHECK(teleo_cli({"analyze", single, "--proc", "p", "--rule", "1"}).out == "[]\n");

    CHECK(teleo_cli({"analyze", p1, "--proc", "nope", "--rule", "1"}).code == cli::kDiagnostics);
    CHECK(teleo_cli({"analyze", p1, "--proc", "proc1", "--rule", "5"}).code == cli::kDiagnostics);
    CHECK(teleo_cli({"analyze", p1, "--proc", "proc1", "--rule", "0"}).code == cli::kDiagnostics);
    CHECK(teleo_cli({"analyze", p1, "--stack", "proc1:9"}).code == cli::kDiagnostics);
    CHECK(teleo_cli({"analyze", p1, "--proc", "proc1"}).code == cli::kDiagnostics);
}

TEST_CASE("run-agent replay: thermostat heats then stops") {
    auto trace = write_temp("cold.trace",
                            "T=0 P=percepts([is_too_cold]) C=controls([])\n"
                            "T=1 P=percepts([]) C=controls([])\n");
    auto r = teleo_cli({"run-agent", corpus_path("thermostat_task.tr"), "thermostat_task()",
                        "--percepts-from", trace});
    CHECK(r.code == 0);
    CHECK(count_lines(r.out) == 2);
    auto on = r.out.find("controls([turn_on_heating])");
    auto off = r.out.find("controls([turn_off_heating])");
    CHECK(on != std::string::npos);
    CHECK(off != std::string::npos);
    CHECK(on < off);

    auto out_file = (temp_dir() / "agent.out").string();
    auto to_file = teleo_cli({"run-agent", corpus_path("thermostat_task.tr"), "thermostat_task",
                              "--percepts-from", trace, "--trace", out_file});
    CHECK(to_file.out.empty());
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == r.out);
}

TEST_CASE("run-agent failure exit codes") {
    auto trace = write_temp("empty.trace", "T=0 P=percepts([]) C=controls([])\n");
    auto loop = write_temp("loop.tr", "deep : () ~>\ndeep(){\ntrue ~> deep()\n}\n");
    auto depth = teleo_cli({"run-agent", loop, "deep()", "--percepts-from", trace, "--max-depth", "5"});
    CHECK(depth.code == cli::kRecursionDepth);
    CHECK(depth.err.find("exceeded-recursion-depth") != std::string::npos);

    auto never = write_temp("never.tr",
                            "percept p : ()\ndurative go : ()\nstuck : () ~>\nstuck(){\np ~> go\n}\n");
    auto none = teleo_cli({"run-agent", never, "stuck()", "--percepts-from", trace});
    CHECK(none.code == cli::kNoFirableRule);
    CHECK(none.err.find("no-firable-rule") != std::string::npos);

    CHECK(teleo_cli({"run-agent", corpus_path("dog.tr"), "x()", "--percepts-from", trace}).code ==
          cli::kDiagnostics);
    CHECK(teleo_cli({"run-agent", loop, "missing()", "--percepts-from", trace}).code == cli::kDiagnostics);
    CHECK(teleo_cli({"run-agent", loop, "deep(", "--percepts-from", trace}).code == cli::kDiagnostics);
    auto bad = write_temp("bad.trace", "T=0 P=percepts([]) C=controls([])\nT=x P=percepts([])\n");
    auto bad_run = teleo_cli({"run-agent", loop, "deep()", "--percepts-from", bad});
    CHECK(bad_run.code == cli::kSyntax);
    CHECK(bad_run.err.find("bad.trace:2:") != std::string::npos);
}

TEST_CASE("run-agent cannot reach a broker") {
    auto r = teleo_cli({"run-agent", corpus_path("thermostat_task.tr"), "thermostat_task()", "--port", "1"});
    CHECK(r.code == cli::kTransport);
}

TEST_CASE("run-sim lock-step and config files") {
    auto cfg = write_temp("room.cfg", "initial_temperature=20\ncool_rate=0.25\n");
    auto trace = (temp_dir() / "room.trace").string();
    auto r = teleo_cli({"run-sim", "thermostat", "--config", cfg, "--cool_rate", "0.5", "--ticks", "3", "--trace", trace,
                        "--agent", corpus_path("regulate_temperature.tr"), "--task",
                        "regulate_temperature(18)"});
    CHECK(r.code == 0);
    CHECK(r.out == "ticks=3 done=false\n");
    std::ifstream in(trace);
    std::vector<sim::TraceLine> lines = sim::read_trace(in);
    REQUIRE(lines.size() == 3);
    CHECK(format_term(lines[0].percepts[0]) == "temperature(20.0)");
    CHECK(format_term(lines[1].percepts[0]) == "temperature(19.5)");

    auto bad = teleo_cli({"run-sim", "asteroids", "--dead_centre", "0.5", "--centre", "0.3", "--agent",
                          corpus_path("proc3.tr"), "--task", "proc3"});
    CHECK(bad.code == cli::kDiagnostics);
    CHECK(teleo_cli({"run-sim", "pong"}).code == cli::kDiagnostics);
    auto junk = write_temp("junk.cfg", "warp_factor=9\n");
    CHECK(teleo_cli({"run-sim", "thermostat", "--config", junk, "--agent", corpus_path("regulate_temperature.tr"),
                     "--task", "regulate_temperature(18)"})
              .code == cli::kDiagnostics);
    CHECK(teleo_cli({"run-sim", "asteroids", "--agent", corpus_path("proc3.tr")}).code == cli::kDiagnostics);

    auto ast = teleo_cli({"run-sim", "asteroids", "--agent", corpus_path("proc3.tr"), "--task", "proc3()"});
    CHECK(ast.code == 0);
    CHECK(ast.out.find("done=true") != std::string::npos);
}

TEST_CASE("every command honours --help") {
    for (auto cmd : {"check", "analyze", "run-agent", "run-broker", "run-sim"}) {
        CAPTURE(cmd);
        auto r = teleo_cli({cmd, "--help"});
        CHECK(r.code == 0);
        CHECK(r.out.find("Usage") != std::string::npos);
    }
    CHECK(teleo_cli({"--help"}).code == 0);
    CHECK(teleo_cli({}).code == cli::kDiagnostics);
    CHECK(teleo_cli({"frobnicate"}).code == cli::kDiagnostics);
}

TEST_CASE("live and replay agents agree on the same percept sequence") {
    Program program = parse_program(read_corpus("regulate_temperature.tr"));
    Term task = runtime::parse_task("regulate_temperature(18)");
    std::vector<sim::TraceLine> trace;
    for (int i = 0; i < 40; ++i) {
        double temp = 16 + (i % 9) * 0.5;
        trace.push_back({static_cast<std::uint64_t>(i),
                         {Term::compound("temperature", {Term::decimal(temp)})},
                         controls_term({})});
    }
    std::vector<CycleReport> replayed = replay_percepts(program, task, trace, 20);

    pedro::Broker broker({"127.0.0.1", 0});
    broker.start();
    std::mutex m;
    std::condition_variable cv;
    std::vector<CycleReport> live;
    bool ready = false;
    std::atomic<bool> stop{false};
    runtime::AgentRunOptions opts;
    opts.broker = {"127.0.0.1", broker.port()};
    opts.max_cycles = trace.size();
    opts.on_ready = [&] {
        std::lock_guard lock(m);
        ready = true;
        cv.notify_all();
    };
    opts.on_cycle = [&](const CycleReport& r) {
        std::lock_guard lock(m);
        live.push_back(r);
        cv.notify_all();
    };
    std::thread agent([&] { runtime::run_live_agent(program, task, opts, stop); });
    {
        std::unique_lock lock(m);
        REQUIRE(cv.wait_for(lock, 5s, [&] { return ready; }));
    }
    auto publisher = pedro::Client::connect("127.0.0.1", broker.port());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        CHECK(publisher.notify(Term::compound("percepts", {Term::list(trace[i].percepts)})));
        std::unique_lock lock(m);
        REQUIRE(cv.wait_for(lock, 5s, [&] { return live.size() == i + 1; }));
    }
    agent.join();
    broker.stop();

    REQUIRE(live.size() == replayed.size());
    for (std::size_t i = 0; i < live.size(); ++i) {
        CAPTURE(i);
        // first_fired is wall-clock time in the live run
        auto untimed = [](FiredRules f) {
            for (auto& rec : f) rec.first_fired = 0;
            return f;
        };
        CHECK(untimed(live[i].fired) == untimed(replayed[i].fired));
        CHECK(live[i].actions == replayed[i].actions);
        CHECK(live[i].controls == replayed[i].controls);
        CHECK(live[i].evaluated == replayed[i].evaluated);
    }
}

namespace {

struct Child {
    pid_t pid = -1;
    int out_fd = -1;
};

Child spawn(const std::vector<std::string>& args, bool capture) {
    std::vector<char*> argv;
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    posix_spawn_file_actions_t fa;
    posix_spawn_file_actions_init(&fa);
    int fds[2] = {-1, -1};
    if (capture) {
        REQUIRE(::pipe(fds) == 0);
        posix_spawn_file_actions_adddup2(&fa, fds[1], STDOUT_FILENO);
        posix_spawn_file_actions_addclose(&fa, fds[0]);
        posix_spawn_file_actions_addclose(&fa, fds[1]);
    }
    Child c;
    REQUIRE(posix_spawn(&c.pid, argv[0], &fa, nullptr, argv.data(), environ) == 0);
    posix_spawn_file_actions_destroy(&fa);
    if (capture) {
        ::close(fds[1]);
        c.out_fd = fds[0];
    }
    return c;
}

int wait_exit(pid_t pid) {
    int status = 0;
    ::waitpid(pid, &status, 0);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_line(int fd) {
    std::string line;
    char ch;
    while (::read(fd, &ch, 1) == 1 && ch != '\n') line += ch;
    return line;
}

}  // namespace

TEST_CASE("broker, sim and agent processes sustain a loop on loopback") {
    Child broker = spawn({TELEO_BIN, "run-broker", "--port", "0"}, true);
    std::string banner = read_line(broker.out_fd);
    REQUIRE(banner.rfind("listening on 127.0.0.1:", 0) == 0);
    std::string port = banner.substr(banner.rfind(':') + 1);

    ::setenv("TELEO_BROKER_PORT", port.c_str(), 1);
    Child agent = spawn({TELEO_BIN, "run-agent", corpus_path("regulate_temperature.tr"),
                         "regulate_temperature(18)"},
                        false);
    ::unsetenv("TELEO_BROKER_PORT");
    std::this_thread::sleep_for(300ms);

    auto trace = (temp_dir() / "loop.trace").string();
    Child simc = spawn({TELEO_BIN, "run-sim", "thermostat", "--port", port, "--ticks", "150",
                        "--tick-rate", "100", "--trace", trace},
                       false);
    CHECK(wait_exit(simc.pid) == 0);

    ::kill(agent.pid, SIGTERM);
    CHECK(wait_exit(agent.pid) == 0);
    ::kill(broker.pid, SIGTERM);
    CHECK(wait_exit(broker.pid) == 0);
    ::close(broker.out_fd);

    std::ifstream in(trace);
    auto lines = sim::read_trace(in);
    REQUIRE(lines.size() == 150);
    std::size_t heating = 0;
    for (const auto& l : lines) heating += format_term(l.controls) == "controls([turn_on_heating])";
    CHECK(heating > 0);
    CHECK(heating < lines.size());
    CHECK(format_term(lines.back().percepts[0]) != "temperature(15.0)");
}
