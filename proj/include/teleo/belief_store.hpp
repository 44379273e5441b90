#pragma once

#include <vector>

#include "teleo/program.hpp"
#include "teleo/term.hpp"

namespace teleo {

enum class FactTag { Percept, Remembered };

/// Ground facts: the current percepts (in arrival order) followed by the
/// remembered beliefs (in remember order). Each partition is a set.
class BeliefStore {
public:
    struct Fact {
        Term term;
        FactTag tag;
    };

    BeliefStore() = default;

    /// Replaces the whole percept partition. Duplicates are collapsed;
    /// throws InternalError on a non-ground fact.
    void set_percepts(const std::vector<Term>& percepts);
    /// Returns false if the belief was already remembered.
    bool remember(const Term& belief);
    /// Returns false if the belief was not remembered.
    bool forget(const Term& belief);

    const std::vector<Fact>& facts() const noexcept { return facts_; }
    std::vector<Term> percepts() const;
    std::vector<Term> remembered() const;
    bool contains(const Term& fact) const;
    std::size_t size() const noexcept { return facts_.size(); }
    bool empty() const noexcept { return facts_.empty(); }

private:
    std::vector<Fact> facts_;  // percepts first, then remembered facts
    std::size_t percept_count_ = 0;
};

/// `success` is true iff `bindings` is non-empty.
struct EvalResult {
    bool success = false;
    std::vector<Bindings> bindings;
};

/// Every extension of `vars` under which `query` matches a fact, in store order.
EvalResult evaluate_query(const Term& query, const BeliefStore& store, const Bindings& vars);

/// Throws EvalError when a comparison mentions an unbound or non-numeric variable.
EvalResult evaluate_condition(const Condition& cond, const BeliefStore& store,
                              const Bindings& vars);

/// Left-to-right threading of the binding list through the conditions.
EvalResult evaluate_conjunction(const Conjunction& conds, const BeliefStore& store,
                                const Bindings& vars);

/// First answer of evaluate_conjunction, found depth-first without building
/// the whole answer list.
std::optional<Bindings> first_answer(const Conjunction& conds, const BeliefStore& store,
                                     const Bindings& vars);

inline bool inferable(const Conjunction& conds, const BeliefStore& store, const Bindings& vars) {
    return first_answer(conds, store, vars).has_value();
}

/// Integer arithmetic stays exact; a non-exact integer division or an
/// overflow yields a decimal. Throws EvalError on unbound or non-numeric
/// variables and on division by zero.
Number evaluate_expr(const Expr& e, const Bindings& vars);

bool compare_numbers(const Number& lhs, CompareOp op, const Number& rhs) noexcept;

/// Applies remember/forget actions to `store` and returns the other actions
/// in their original order.
std::vector<Term> apply_belief_updates(const std::vector<Term>& actions, BeliefStore& store);

}  // namespace teleo
