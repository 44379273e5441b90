#pragma once

#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "teleo/belief_store.hpp"
#include "teleo/program.hpp"
#include "teleo/term.hpp"
#include "teleo/types.hpp"

namespace teleo {

enum class EngineFailure { ExceededRecursionDepth, NoFirableRule, UnboundAction };

std::string_view to_string(EngineFailure f) noexcept;

class EngineError : public std::runtime_error {
public:
    EngineError(EngineFailure kind, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}
    EngineFailure kind() const noexcept { return kind_; }

private:
    EngineFailure kind_;
};

/// One entry of the fired-rules stack.
struct FiringRecord {
    std::size_t depth = 1;  // 1-based
    std::string proc;
    Term call = Term::atom("_");  // ground procedure call
    std::size_t rule_index = 0;   // 0-based
    Bindings bindings;            // parameters plus the guard's answer
    double first_fired = 0;
    std::vector<Term> actions;  // ground right-hand side

    friend bool operator==(const FiringRecord&, const FiringRecord&) = default;
};

using FiredRules = std::vector<FiringRecord>;  // element i has depth i + 1

/// `expired(T)`: true when T is 0, otherwise `now - first_fired > T`.
bool expired(double min_time, double first_fired, double now) noexcept;

/// The continuation condition
///   inferable(G) or ((inferable(WC) or not expired(WT)) and
///                    (not inferable(UC) or not expired(UT)))
/// with every query evaluated under the firing's frozen bindings.
bool continuation_holds(const FiringRecord& firing, const Rule& rule, const BeliefStore& store,
                        double now);

/// Chooses the rule firing for one procedure call. A rule above the previous
/// firing preempts it; the previous rule re-fires with a fresh answer while
/// its guard is inferable; otherwise it keeps firing unchanged while its
/// continuation condition holds; otherwise the rules below it are tried.
FiringRecord get_action(const BeliefStore& store, const Procedure& procedure, const Term& call,
                        const Bindings& params, double now, const FiringRecord* prev,
                        std::size_t depth);

struct CallResult {
    std::vector<Term> actions;
    FiredRules fired;
};

/// Descends from `call` at `depth`, reusing and truncating `fired` as it
/// goes. Throws EngineError.
CallResult call_procedure(const Program& program, const Term& call, const BeliefStore& store,
                          double now, FiredRules fired, std::size_t max_depth,
                          std::size_t depth = 1);

struct DependencySign {
    enum class Sign { Plus, Minus };
    Sign sign = Sign::Plus;
    FunctorKey functor;

    friend auto operator<=>(const DependencySign&, const DependencySign&) = default;
};

/// `++name` or `--name`.
std::string to_string(const DependencySign& d);
std::string format_dependencies(const std::vector<DependencySign>& deps);

/// `--f` for each positive query of the rule's own guard, then `++f` for the
/// positive queries of every earlier rule, in rule order, without repeats.
std::vector<DependencySign> local_dependent_predicates(const Procedure& procedure,
                                                       std::size_t rule_index);

/// Union of the local lists of every firing, listed depth by depth with the
/// `++` entries of each depth before its `--` entries.
std::vector<DependencySign> dependent_predicates(const FiredRules& fired, const Program& program);

struct StoreDelta {
    std::set<FunctorKey> added;
    std::set<FunctorKey> removed;

    bool empty() const noexcept { return added.empty() && removed.empty(); }
};

/// Functor-level difference: per functor, facts present only in `after` are
/// additions and facts present only in `before` are removals; a change of
/// order within a functor counts as both.
StoreDelta diff_stores(const BeliefStore& before, const BeliefStore& after);

bool update_is_relevant(const StoreDelta& delta, const std::vector<DependencySign>& deps);

struct EngineOptions {
    std::size_t max_depth = 64;
    /// Skip re-evaluation when a store update cannot break the firing stack.
    bool dependency_guard = true;
};

struct CycleReport {
    std::size_t cycle = 0;
    double time = 0;
    bool evaluated = true;
    std::vector<std::string> rejected_percepts;
    FiredRules fired;
    std::vector<Term> actions;               // primitive actions after belief updates
    std::optional<Term> controls;            // `controls([...])` when the action set changed
};

/// Evaluation state for one task: the fired-rules stack, the remembered
/// beliefs, and the last emitted action set.
class Engine {
public:
    /// Throws std::invalid_argument when `task` is not a ground call of a
    /// defined procedure with the right arity.
    Engine(const Program& program, Term task, EngineOptions options = {});

    /// One pass of the main loop for a fresh percept set observed at `now`
    /// (seconds since task start). Throws EngineError or EvalError.
    CycleReport cycle(const std::vector<Term>& percepts, double now);

    const FiredRules& fired_rules() const noexcept { return fired_; }
    const BeliefStore& store() const noexcept { return store_; }
    const Term& task() const noexcept { return task_; }

private:
    bool must_evaluate(const BeliefStore& next) const;

    const Program& program_;
    Term task_;
    EngineOptions options_;
    TypeHierarchy hierarchy_;
    SignatureTable sigs_;

    BeliefStore store_;           // store of the last cycle, after belief updates
    BeliefStore evaluated_store_; // store the last full evaluation looked at
    FiredRules fired_;
    std::vector<Term> rhs_actions_;  // ground actions before belief updates
    std::optional<std::vector<Term>> last_actions_;
    std::size_t cycles_ = 0;
};

/// Controls message for an action tuple.
Term controls_term(const std::vector<Term>& actions);

/// One line per cycle: `cycle=N t=T fired=[proc:R,...] actions=[...] controls=...`.
std::string format_cycle(const CycleReport& report);

/// Percept source and controls sink for run_task.
class AgentIO {
public:
    virtual ~AgentIO() = default;
    /// Blocks for the next percept set; nullopt ends the run.
    virtual std::optional<std::vector<Term>> next_percepts() = 0;
    /// Seconds since the task started, for the percepts just returned.
    virtual double now() = 0;
    virtual void send_controls(const Term& controls) = 0;
    virtual void on_cycle(const CycleReport&) {}
    virtual void on_warning(const std::string&) {}
};

/// Main loop: runs cycles until the percept source is exhausted. Errors
/// propagate as EngineError / EvalError.
void run_task(const Program& program, const Term& task, AgentIO& io, EngineOptions options = {});

}  // namespace teleo
