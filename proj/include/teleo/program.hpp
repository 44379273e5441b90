#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "teleo/term.hpp"

namespace teleo {

/// 1-based source position. Locations are not part of AST identity: two
/// nodes that differ only in where they were parsed compare equal.
struct SourceLoc {
    std::size_t line = 0;
    std::size_t column = 0;

    friend bool operator==(const SourceLoc&, const SourceLoc&) { return true; }
};

struct AtomDisjunction {
    std::vector<std::string> atoms;
    friend bool operator==(const AtomDisjunction&, const AtomDisjunction&) = default;
};

struct TypeUnion {
    std::vector<std::string> members;
    friend bool operator==(const TypeUnion&, const TypeUnion&) = default;
};

struct IntRange {
    std::int64_t min = 0;
    std::int64_t max = 0;
    friend bool operator==(const IntRange&, const IntRange&) = default;
};

struct TypeDef {
    std::string name;
    std::variant<AtomDisjunction, TypeUnion, IntRange> body;
    SourceLoc loc;

    friend bool operator==(const TypeDef&, const TypeDef&) = default;
};

enum class DeclKind { Percept, Belief, Durative, Discrete };

std::string_view to_string(DeclKind kind) noexcept;

struct Declaration {
    DeclKind kind = DeclKind::Percept;
    std::string name;
    std::vector<std::string> arg_types;
    SourceLoc loc;

    friend bool operator==(const Declaration&, const Declaration&) = default;
};

struct ProcSig {
    std::string name;
    std::vector<std::string> arg_types;
    SourceLoc loc;

    friend bool operator==(const ProcSig&, const ProcSig&) = default;
};

/// Arithmetic expression: literal, variable reference, or binary operation
/// (`+ - * /`, with `* /` binding tighter, left associative).
class Expr {
public:
    enum class Kind { Number, Var, BinOp };

    static Expr literal(Number n);
    static Expr variable(std::string name);
    static Expr binary(char op, Expr lhs, Expr rhs);

    Kind kind() const noexcept { return kind_; }
    const Number& number() const noexcept { return number_; }
    const std::string& var_name() const noexcept { return var_; }
    char op() const noexcept { return op_; }
    const Expr& lhs() const { return *lhs_; }
    const Expr& rhs() const { return *rhs_; }

    friend bool operator==(const Expr& a, const Expr& b);

private:
    Kind kind_ = Kind::Number;
    Number number_{std::int64_t{0}};
    std::string var_;
    char op_ = 0;
    std::shared_ptr<const Expr> lhs_;
    std::shared_ptr<const Expr> rhs_;
};

void collect_vars(const Expr& e, std::set<std::string>& out);

enum class CompareOp { Gt, Ge, Eq, Le, Lt };

std::string_view to_string(CompareOp op) noexcept;

struct Condition {
    enum class Kind { Query, NegatedQuery, Comparison, True };

    Kind kind = Kind::True;
    Term query = Term::atom("true");  // Query / NegatedQuery
    Expr lhs;                         // Comparison
    CompareOp op = CompareOp::Eq;
    Expr rhs;
    SourceLoc loc;

    static Condition make_query(Term q, SourceLoc loc = {});
    static Condition make_negated(Term q, SourceLoc loc = {});
    static Condition make_comparison(Expr lhs, CompareOp op, Expr rhs, SourceLoc loc = {});
    static Condition make_true(SourceLoc loc = {});

    friend bool operator==(const Condition&, const Condition&) = default;
};

using Conjunction = std::vector<Condition>;

/// `G while WC min WT until UC min UT ~> actions`. An absent while/until
/// condition means `false`; absent minimum times are 0.
struct Rule {
    Conjunction guard;
    std::optional<Conjunction> while_cond;
    double while_min = 0;
    std::optional<Conjunction> until_cond;
    double until_min = 0;
    /// Either one procedure call or a (possibly empty) tuple of primitive actions.
    std::vector<Term> actions;
    SourceLoc loc;

    /// True if any of the while/until clauses differ from their defaults.
    bool has_continuation_clauses() const noexcept {
        return while_cond.has_value() || until_cond.has_value() || while_min != 0 ||
               until_min != 0;
    }

    friend bool operator==(const Rule&, const Rule&) = default;
};

struct Procedure {
    std::string name;
    std::vector<std::string> params;
    std::vector<Rule> rules;
    SourceLoc loc;

    friend bool operator==(const Procedure&, const Procedure&) = default;
};

struct Program {
    std::vector<TypeDef> type_defs;
    std::vector<Declaration> declarations;
    std::map<std::string, ProcSig> proc_sigs;
    std::map<std::string, Procedure> procedures;

    const Declaration* find_declaration(std::string_view name) const;
    const Procedure* find_procedure(std::string_view name) const;

    friend bool operator==(const Program&, const Program&) = default;
};

/// Parses TR source text. Throws SyntaxError (with line/column),
/// UnsupportedFeature, or DuplicateDefinition.
Program parse_program(std::string_view source);

enum class ActionKind { ProcCall, ActionTuple };

ActionKind rule_action_kind(const Rule& rule, const Program& program);

/// Debug printer; its output parses back to an equal Program.
std::string format_program(const Program& program);
std::string format_condition(const Condition& c);
std::string format_expr(const Expr& e);

}  // namespace teleo
