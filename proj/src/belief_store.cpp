#include "teleo/belief_store.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "teleo/errors.hpp"

namespace teleo {

void BeliefStore::set_percepts(const std::vector<Term>& percepts) {
    std::vector<Fact> next;
    next.reserve(percepts.size() + (facts_.size() - percept_count_));
    for (const Term& p : percepts) {
        if (!is_ground(p)) throw InternalError("non-ground percept " + format_term(p));
        bool dup = std::any_of(next.begin(), next.end(),
                               [&](const Fact& f) { return f.term == p; });
        if (!dup) next.push_back(Fact{p, FactTag::Percept});
    }
    std::size_t count = next.size();
    next.insert(next.end(), facts_.begin() + static_cast<std::ptrdiff_t>(percept_count_),
                facts_.end());
    facts_ = std::move(next);
    percept_count_ = count;
}

bool BeliefStore::remember(const Term& belief) {
    if (!is_ground(belief)) throw InternalError("non-ground belief " + format_term(belief));
    auto first = facts_.begin() + static_cast<std::ptrdiff_t>(percept_count_);
    if (std::any_of(first, facts_.end(), [&](const Fact& f) { return f.term == belief; })) {
        return false;
    }
    facts_.push_back(Fact{belief, FactTag::Remembered});
    return true;
}

bool BeliefStore::forget(const Term& belief) {
    auto first = facts_.begin() + static_cast<std::ptrdiff_t>(percept_count_);
    auto it = std::find_if(first, facts_.end(), [&](const Fact& f) { return f.term == belief; });
    if (it == facts_.end()) return false;
    facts_.erase(it);
    return true;
}

std::vector<Term> BeliefStore::percepts() const {
    std::vector<Term> out;
    for (std::size_t i = 0; i < percept_count_; ++i) out.push_back(facts_[i].term);
    return out;
}

std::vector<Term> BeliefStore::remembered() const {
    std::vector<Term> out;
    for (std::size_t i = percept_count_; i < facts_.size(); ++i) out.push_back(facts_[i].term);
    return out;
}

bool BeliefStore::contains(const Term& fact) const {
    return std::any_of(facts_.begin(), facts_.end(), [&](const Fact& f) { return f.term == fact; });
}

// ---------------------------------------------------------------------------

EvalResult evaluate_query(const Term& query, const BeliefStore& store, const Bindings& vars) {
    EvalResult r;
    for (const auto& fact : store.facts()) {
        if (auto b = match(query, fact.term, vars)) r.bindings.push_back(std::move(*b));
    }
    r.success = !r.bindings.empty();
    return r;
}

namespace {

bool comparison_holds(const Condition& c, const Bindings& vars) {
    return compare_numbers(evaluate_expr(c.lhs, vars), c.op, evaluate_expr(c.rhs, vars));
}

}  // namespace

EvalResult evaluate_condition(const Condition& cond, const BeliefStore& store,
                              const Bindings& vars) {
    switch (cond.kind) {
        case Condition::Kind::Query:
            return evaluate_query(cond.query, store, vars);
        case Condition::Kind::NegatedQuery:
            if (evaluate_query(cond.query, store, vars).success) return {};
            return {true, {vars}};
        case Condition::Kind::Comparison:
            if (!comparison_holds(cond, vars)) return {};
            return {true, {vars}};
        case Condition::Kind::True:
            return {true, {vars}};
    }
    throw InternalError("unknown condition kind");
}

EvalResult evaluate_conjunction(const Conjunction& conds, const BeliefStore& store,
                                const Bindings& vars) {
    std::vector<Bindings> current{vars};
    for (const Condition& c : conds) {
        std::vector<Bindings> next;
        for (const Bindings& b : current) {
            EvalResult r = evaluate_condition(c, store, b);
            std::move(r.bindings.begin(), r.bindings.end(), std::back_inserter(next));
        }
        current = std::move(next);
        if (current.empty()) break;
    }
    EvalResult r;
    r.success = !current.empty();
    if (r.success) r.bindings = std::move(current);
    return r;
}

namespace {

std::optional<Bindings> first_from(const Conjunction& conds, std::size_t i,
                                   const BeliefStore& store, const Bindings& vars) {
    if (i == conds.size()) return vars;
    const Condition& c = conds[i];
    if (c.kind == Condition::Kind::Query) {
        for (const auto& fact : store.facts()) {
            auto b = match(c.query, fact.term, vars);
            if (!b) continue;
            if (auto done = first_from(conds, i + 1, store, *b)) return done;
        }
        return std::nullopt;
    }
    if (!evaluate_condition(c, store, vars).success) return std::nullopt;
    return first_from(conds, i + 1, store, vars);
}

}  // namespace

std::optional<Bindings> first_answer(const Conjunction& conds, const BeliefStore& store,
                                     const Bindings& vars) {
    return first_from(conds, 0, store, vars);
}

// ---------------------------------------------------------------------------

namespace {

Number arith(char op, const Number& a, const Number& b) {
    if (a.is_integer() && b.is_integer()) {
        std::int64_t x = a.as_integer();
        std::int64_t y = b.as_integer();
        std::int64_t out = 0;
        switch (op) {
            case '+':
                if (!__builtin_add_overflow(x, y, &out)) return Number{out};
                break;
            case '-':
                if (!__builtin_sub_overflow(x, y, &out)) return Number{out};
                break;
            case '*':
                if (!__builtin_mul_overflow(x, y, &out)) return Number{out};
                break;
            case '/':
                if (y == 0) throw EvalError("division by zero");
                if (!(x == std::numeric_limits<std::int64_t>::min() && y == -1) && x % y == 0) {
                    return Number{x / y};
                }
                break;
            default:
                throw InternalError(std::string("unknown operator ") + op);
        }
    }
    double x = a.as_double();
    double y = b.as_double();
    switch (op) {
        case '+': return Number{x + y};
        case '-': return Number{x - y};
        case '*': return Number{x * y};
        case '/':
            if (y == 0) throw EvalError("division by zero");
            return Number{x / y};
        default: throw InternalError(std::string("unknown operator ") + op);
    }
}

}  // namespace

Number evaluate_expr(const Expr& e, const Bindings& vars) {
    switch (e.kind()) {
        case Expr::Kind::Number:
            return e.number();
        case Expr::Kind::Var: {
            const Term* v = vars.find(e.var_name());
            if (!v) {
                throw EvalError("variable " + e.var_name() +
                                " has not been instantiated and cannot be evaluated");
            }
            if (!v->is_number()) {
                throw EvalError("variable " + e.var_name() + " is bound to the non-numeric " +
                                format_term(*v));
            }
            return v->number_value();
        }
        case Expr::Kind::BinOp:
            return arith(e.op(), evaluate_expr(e.lhs(), vars), evaluate_expr(e.rhs(), vars));
    }
    throw InternalError("unknown expression kind");
}

bool compare_numbers(const Number& lhs, CompareOp op, const Number& rhs) noexcept {
    // NaN compares false under every operator.
    if ((!lhs.is_integer() && std::isnan(lhs.as_double())) ||
        (!rhs.is_integer() && std::isnan(rhs.as_double()))) {
        return false;
    }
    int c = numeric_compare(lhs, rhs);
    switch (op) {
        case CompareOp::Gt: return c > 0;
        case CompareOp::Ge: return c >= 0;
        case CompareOp::Eq: return c == 0;
        case CompareOp::Le: return c <= 0;
        case CompareOp::Lt: return c < 0;
    }
    return false;
}

std::vector<Term> apply_belief_updates(const std::vector<Term>& actions, BeliefStore& store) {
    std::vector<Term> primitives;
    for (const Term& a : actions) {
        if (a.is_compound() && a.arity() == 1 && a.name() == "remember") {
            store.remember(a.args()[0]);
        } else if (a.is_compound() && a.arity() == 1 && a.name() == "forget") {
            store.forget(a.args()[0]);
        } else {
            primitives.push_back(a);
        }
    }
    return primitives;
}

}  // namespace teleo
