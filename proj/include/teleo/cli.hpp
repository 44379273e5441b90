#pragma once
// Command-line front end: check, analyze, run-agent, run-broker, run-sim.

#include <atomic>
#include <iosfwd>

namespace teleo::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kDiagnostics = 1,  // type diagnostics, usage errors, unknown proc/rule
    kSyntax = 2,       // syntax error or unsupported feature
    kRecursionDepth = 3,
    kNoFirableRule = 4,
    kRuntime = 5,
    kTransport = 6,
};

/// Runs one command. Long-running commands return once `stop` is set.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        const std::atomic<bool>& stop);

}  // namespace teleo::cli
