#include "teleo/engine.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "teleo/errors.hpp"

namespace teleo {

std::string_view to_string(EngineFailure f) noexcept {
    switch (f) {
        case EngineFailure::ExceededRecursionDepth: return "exceeded-recursion-depth";
        case EngineFailure::NoFirableRule: return "no-firable-rule";
        case EngineFailure::UnboundAction: return "unbound-action";
    }
    return "?";
}

bool expired(double min_time, double first_fired, double now) noexcept {
    if (min_time == 0) return true;
    return now - first_fired > min_time;
}

bool continuation_holds(const FiringRecord& firing, const Rule& rule, const BeliefStore& store,
                        double now) {
    const Bindings& theta = firing.bindings;
    if (inferable(rule.guard, store, theta)) return true;
    bool wc = rule.while_cond && inferable(*rule.while_cond, store, theta);
    bool uc = rule.until_cond && inferable(*rule.until_cond, store, theta);
    bool wt_expired = expired(rule.while_min, firing.first_fired, now);
    bool ut_expired = expired(rule.until_min, firing.first_fired, now);
    return (wc || !wt_expired) && (!uc || !ut_expired);
}

namespace {

std::vector<Term> ground_actions(const Procedure& procedure, std::size_t index,
                                 const Bindings& theta) {
    std::vector<Term> out;
    for (const Term& a : procedure.rules[index].actions) {
        Term g = substitute(a, theta);
        if (!is_ground(g)) {
            throw EngineError(EngineFailure::UnboundAction,
                              format_term(g) + " in rule " + std::to_string(index + 1) + " of " +
                                  procedure.name);
        }
        out.push_back(std::move(g));
    }
    return out;
}

std::optional<FiringRecord> try_fire(const BeliefStore& store, const Procedure& procedure,
                                     const Term& call, const Bindings& params, double now,
                                     std::size_t index, std::size_t depth) {
    auto answer = first_answer(procedure.rules[index].guard, store, params);
    if (!answer) return std::nullopt;
    FiringRecord rec;
    rec.depth = depth;
    rec.proc = procedure.name;
    rec.call = call;
    rec.rule_index = index;
    rec.actions = ground_actions(procedure, index, *answer);
    rec.bindings = std::move(*answer);
    rec.first_fired = now;
    return rec;
}

}  // namespace

FiringRecord get_action(const BeliefStore& store, const Procedure& procedure, const Term& call,
                        const Bindings& params, double now, const FiringRecord* prev,
                        std::size_t depth) {
    const std::size_t n = procedure.rules.size();
    std::size_t from = 0;
    if (prev) {
        const std::size_t r = prev->rule_index;
        for (std::size_t i = 0; i < r; ++i) {
            if (auto rec = try_fire(store, procedure, call, params, now, i, depth)) return *rec;
        }
        if (auto rec = try_fire(store, procedure, call, params, now, r, depth)) {
            if (rec->actions == prev->actions) rec->first_fired = prev->first_fired;
            return *rec;
        }
        if (continuation_holds(*prev, procedure.rules[r], store, now)) return *prev;
        from = r + 1;
    }
    for (std::size_t i = from; i < n; ++i) {
        if (auto rec = try_fire(store, procedure, call, params, now, i, depth)) return *rec;
    }
    throw EngineError(EngineFailure::NoFirableRule, "no rule of " + format_term(call) + " can fire");
}

CallResult call_procedure(const Program& program, const Term& call, const BeliefStore& store,
                          double now, FiredRules fired, std::size_t max_depth, std::size_t depth) {
    Term current = call;
    for (;; ++depth) {
        if (depth > max_depth) {
            throw EngineError(EngineFailure::ExceededRecursionDepth,
                              "call depth " + std::to_string(depth) + " exceeds the maximum of " +
                                  std::to_string(max_depth) + " at " + format_term(current));
        }
        const Procedure* proc = program.find_procedure(current.name());
        if (!proc || proc->params.size() != current.arity()) {
            throw InternalError("call of undefined procedure " + format_term(current));
        }
        Bindings params;
        for (std::size_t i = 0; i < proc->params.size(); ++i) {
            params.bind(proc->params[i], current.args()[i]);
        }

        const FiringRecord* prev = nullptr;
        if (fired.size() >= depth && fired[depth - 1].proc == proc->name &&
            fired[depth - 1].call == current) {
            prev = &fired[depth - 1];
        }
        FiringRecord rec = get_action(store, *proc, current, params, now, prev, depth);
        if (!prev || prev->rule_index != rec.rule_index || prev->actions != rec.actions) {
            // A different firing here invalidates everything below it.
            fired.resize(depth - 1);
        }
        if (fired.size() >= depth) {
            fired[depth - 1] = rec;
        } else {
            fired.push_back(rec);
        }

        if (rule_action_kind(proc->rules[rec.rule_index], program) == ActionKind::ActionTuple) {
            fired.resize(depth);
            return CallResult{std::move(rec.actions), std::move(fired)};
        }
        current = rec.actions.front();
    }
}

// ---------------------------------------------------------------------------
// Dependent predicates

std::string to_string(const DependencySign& d) {
    return (d.sign == DependencySign::Sign::Plus ? "++" : "--") + d.functor.name;
}

std::string format_dependencies(const std::vector<DependencySign>& deps) {
    std::string out;
    for (const auto& d : deps) {
        if (!out.empty()) out += ' ';
        out += to_string(d);
    }
    return out;
}

namespace {

void add_unique(std::vector<DependencySign>& out, DependencySign d) {
    if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(std::move(d));
}

void positive_queries(const Rule& rule, DependencySign::Sign sign,
                      std::vector<DependencySign>& out) {
    for (const Condition& c : rule.guard) {
        if (c.kind == Condition::Kind::Query) add_unique(out, {sign, functor_key(c.query)});
    }
}

}  // namespace

std::vector<DependencySign> local_dependent_predicates(const Procedure& procedure,
                                                       std::size_t rule_index) {
    if (rule_index >= procedure.rules.size()) {
        throw std::out_of_range("rule " + std::to_string(rule_index + 1) + " of " +
                                procedure.name + " does not exist");
    }
    std::vector<DependencySign> out;
    positive_queries(procedure.rules[rule_index], DependencySign::Sign::Minus, out);
    for (std::size_t i = 0; i < rule_index; ++i) {
        positive_queries(procedure.rules[i], DependencySign::Sign::Plus, out);
    }
    return out;
}

std::vector<DependencySign> dependent_predicates(const FiredRules& fired, const Program& program) {
    std::vector<DependencySign> out;
    for (const FiringRecord& rec : fired) {
        const Procedure* proc = program.find_procedure(rec.proc);
        if (!proc) throw InternalError("firing of unknown procedure " + rec.proc);
        auto local = local_dependent_predicates(*proc, rec.rule_index);
        for (const auto& d : local) {
            if (d.sign == DependencySign::Sign::Plus) add_unique(out, d);
        }
        for (const auto& d : local) {
            if (d.sign == DependencySign::Sign::Minus) add_unique(out, d);
        }
    }
    return out;
}

StoreDelta diff_stores(const BeliefStore& before, const BeliefStore& after) {
    std::map<FunctorKey, std::vector<Term>> old_facts;
    std::map<FunctorKey, std::vector<Term>> new_facts;
    for (const auto& f : before.facts()) old_facts[functor_key(f.term)].push_back(f.term);
    for (const auto& f : after.facts()) new_facts[functor_key(f.term)].push_back(f.term);

    StoreDelta delta;
    auto contains = [](const std::vector<Term>& v, const Term& t) {
        return std::find(v.begin(), v.end(), t) != v.end();
    };
    for (const auto& [key, facts] : new_facts) {
        auto it = old_facts.find(key);
        if (it == old_facts.end()) {
            delta.added.insert(key);
            continue;
        }
        if (it->second == facts) continue;
        bool gained = std::any_of(facts.begin(), facts.end(),
                                  [&](const Term& t) { return !contains(it->second, t); });
        bool lost = std::any_of(it->second.begin(), it->second.end(),
                                [&](const Term& t) { return !contains(facts, t); });
        if (gained || !lost) delta.added.insert(key);  // reordering counts both ways
        if (lost || !gained) delta.removed.insert(key);
    }
    for (const auto& [key, facts] : old_facts) {
        if (!new_facts.count(key)) delta.removed.insert(key);
    }
    return delta;
}

bool update_is_relevant(const StoreDelta& delta, const std::vector<DependencySign>& deps) {
    for (const auto& d : deps) {
        const auto& side = d.sign == DependencySign::Sign::Plus ? delta.added : delta.removed;
        if (side.count(d.functor)) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Engine

Term controls_term(const std::vector<Term>& actions) {
    return Term::compound("controls", {Term::list(actions)});
}

namespace {

std::vector<Term> as_set(std::vector<Term> v) {
    std::sort(v.begin(), v.end(), TermLess{});
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

bool binds_beyond_params(const Rule& rule, const Procedure& proc) {
    std::set<std::string> vars;
    for (const Condition& c : rule.guard) {
        if (c.kind == Condition::Kind::Query) collect_vars(c.query, vars);
    }
    for (const auto& p : proc.params) vars.erase(p);
    return !vars.empty();
}

}  // namespace

Engine::Engine(const Program& program, Term task, EngineOptions options)
    : program_(program),
      task_(std::move(task)),
      options_(options),
      hierarchy_(TypeHierarchy::build(program.type_defs)),
      sigs_(SignatureTable::build(program)) {
    if (!task_.is_predicate() || !is_ground(task_)) {
        throw std::invalid_argument("task must be a ground procedure call: " + format_term(task_));
    }
    const Procedure* proc = program_.find_procedure(task_.name());
    if (!proc) throw std::invalid_argument("no procedure named " + task_.name());
    if (proc->params.size() != task_.arity()) {
        throw std::invalid_argument(task_.name() + " takes " + std::to_string(proc->params.size()) +
                                    " argument(s)");
    }
    if (options_.max_depth == 0) throw std::invalid_argument("max depth must be positive");
}

bool Engine::must_evaluate(const BeliefStore& next) const {
    if (!options_.dependency_guard || fired_.empty()) return true;
    std::vector<DependencySign> deps = dependent_predicates(fired_, program_);
    for (const FiringRecord& rec : fired_) {
        const Procedure& proc = *program_.find_procedure(rec.proc);
        const Rule& rule = proc.rules[rec.rule_index];
        // Timing and negation are outside what the functor analysis covers.
        if (rule.has_continuation_clauses()) return true;
        for (std::size_t i = 0; i <= rec.rule_index; ++i) {
            for (const Condition& c : proc.rules[i].guard) {
                if (c.kind == Condition::Kind::NegatedQuery) return true;
            }
        }
        // A new fact may give the fired rule a different first answer.
        if (binds_beyond_params(rule, proc)) {
            for (const Condition& c : rule.guard) {
                if (c.kind == Condition::Kind::Query) {
                    add_unique(deps, {DependencySign::Sign::Plus, functor_key(c.query)});
                }
            }
        }
    }
    return update_is_relevant(diff_stores(evaluated_store_, next), deps);
}

CycleReport Engine::cycle(const std::vector<Term>& percepts, double now) {
    CycleReport report;
    report.cycle = ++cycles_;
    report.time = now;

    std::vector<Term> valid;
    for (const Term& p : percepts) {
        if (auto why = validate_percept(p, sigs_, hierarchy_)) {
            report.rejected_percepts.push_back(*why);
        } else {
            valid.push_back(p);
        }
    }
    BeliefStore next = store_;
    next.set_percepts(valid);

    report.evaluated = !last_actions_ || must_evaluate(next);
    if (report.evaluated) {
        CallResult r = call_procedure(program_, task_, next, now, fired_, options_.max_depth);
        fired_ = std::move(r.fired);
        rhs_actions_ = std::move(r.actions);
        evaluated_store_ = next;
    }
    report.actions = apply_belief_updates(rhs_actions_, next);
    store_ = std::move(next);

    if (!last_actions_ || as_set(*last_actions_) != as_set(report.actions)) {
        report.controls = controls_term(report.actions);
        last_actions_ = report.actions;
    }
    report.fired = fired_;
    return report;
}

std::string format_cycle(const CycleReport& report) {
    char time[32];
    std::snprintf(time, sizeof time, "%.3f", report.time);
    std::string out = "cycle=" + std::to_string(report.cycle) + " t=" + time +
                      (report.evaluated ? " eval" : " skip") + " fired=[";
    for (std::size_t i = 0; i < report.fired.size(); ++i) {
        if (i) out += ',';
        out += report.fired[i].proc + ":" + std::to_string(report.fired[i].rule_index + 1);
    }
    out += "] actions=" + format_term(Term::list(report.actions));
    out += " controls=" + (report.controls ? format_term(*report.controls) : std::string("-"));
    return out;
}

void run_task(const Program& program, const Term& task, AgentIO& io, EngineOptions options) {
    Engine engine(program, task, options);
    while (auto percepts = io.next_percepts()) {
        CycleReport report = engine.cycle(*percepts, io.now());
        for (const auto& w : report.rejected_percepts) io.on_warning("rejected percept: " + w);
        if (report.controls) io.send_controls(*report.controls);
        io.on_cycle(report);
    }
}

}  // namespace teleo
