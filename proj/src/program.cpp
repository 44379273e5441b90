#include "teleo/program.hpp"

#include <algorithm>
#include <set>

#include "teleo/errors.hpp"
#include "term_parser.hpp"

namespace teleo {

using detail::Token;
using detail::TokenCursor;
using detail::TokenKind;

std::string_view to_string(DeclKind kind) noexcept {
    switch (kind) {
        case DeclKind::Percept: return "percept";
        case DeclKind::Belief: return "belief";
        case DeclKind::Durative: return "durative";
        case DeclKind::Discrete: return "discrete";
    }
    return "?";
}

std::string_view to_string(CompareOp op) noexcept {
    switch (op) {
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
        case CompareOp::Eq: return "==";
        case CompareOp::Le: return "<=";
        case CompareOp::Lt: return "<";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Expr / Condition

Expr Expr::literal(Number n) {
    Expr e;
    e.kind_ = Kind::Number;
    e.number_ = n;
    return e;
}

Expr Expr::variable(std::string name) {
    Expr e;
    e.kind_ = Kind::Var;
    e.var_ = std::move(name);
    return e;
}

Expr Expr::binary(char op, Expr lhs, Expr rhs) {
    Expr e;
    e.kind_ = Kind::BinOp;
    e.op_ = op;
    e.lhs_ = std::make_shared<const Expr>(std::move(lhs));
    e.rhs_ = std::make_shared<const Expr>(std::move(rhs));
    return e;
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.kind_ != b.kind_) return false;
    switch (a.kind_) {
        case Expr::Kind::Number: return a.number_ == b.number_;
        case Expr::Kind::Var: return a.var_ == b.var_;
        case Expr::Kind::BinOp:
            return a.op_ == b.op_ && *a.lhs_ == *b.lhs_ && *a.rhs_ == *b.rhs_;
    }
    return false;
}

void collect_vars(const Expr& e, std::set<std::string>& out) {
    switch (e.kind()) {
        case Expr::Kind::Var: out.insert(e.var_name()); break;
        case Expr::Kind::BinOp:
            collect_vars(e.lhs(), out);
            collect_vars(e.rhs(), out);
            break;
        case Expr::Kind::Number: break;
    }
}

Condition Condition::make_query(Term q, SourceLoc loc) {
    Condition c;
    c.kind = Kind::Query;
    c.query = std::move(q);
    c.loc = loc;
    return c;
}

Condition Condition::make_negated(Term q, SourceLoc loc) {
    Condition c;
    c.kind = Kind::NegatedQuery;
    c.query = std::move(q);
    c.loc = loc;
    return c;
}

Condition Condition::make_comparison(Expr lhs, CompareOp op, Expr rhs, SourceLoc loc) {
    Condition c;
    c.kind = Kind::Comparison;
    c.lhs = std::move(lhs);
    c.op = op;
    c.rhs = std::move(rhs);
    c.loc = loc;
    return c;
}

Condition Condition::make_true(SourceLoc loc) {
    Condition c;
    c.kind = Kind::True;
    c.loc = loc;
    return c;
}

const Declaration* Program::find_declaration(std::string_view name) const {
    auto it = std::find_if(declarations.begin(), declarations.end(),
                           [&](const Declaration& d) { return d.name == name; });
    return it == declarations.end() ? nullptr : &*it;
}

const Procedure* Program::find_procedure(std::string_view name) const {
    auto it = procedures.find(std::string(name));
    return it == procedures.end() ? nullptr : &it->second;
}

ActionKind rule_action_kind(const Rule& rule, const Program& program) {
    if (rule.actions.size() == 1 && rule.actions.front().is_predicate() &&
        program.proc_sigs.count(rule.actions.front().name())) {
        return ActionKind::ProcCall;
    }
    return ActionKind::ActionTuple;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

const std::set<std::string, std::less<>> kReserved = {
    "while", "until", "min",      "not",    "true",     "for",      "wait",
    "repeat", "percept", "belief", "durative", "discrete", "remember", "forget"};

std::optional<DeclKind> decl_kind(const Token& t) {
    if (t.kind != TokenKind::Ident) return std::nullopt;
    if (t.text == "percept") return DeclKind::Percept;
    if (t.text == "belief") return DeclKind::Belief;
    if (t.text == "durative") return DeclKind::Durative;
    if (t.text == "discrete") return DeclKind::Discrete;
    return std::nullopt;
}

std::optional<CompareOp> compare_op(const Token& t) {
    if (t.kind != TokenKind::Punct) return std::nullopt;
    if (t.text == ">") return CompareOp::Gt;
    if (t.text == ">=") return CompareOp::Ge;
    if (t.text == "==") return CompareOp::Eq;
    if (t.text == "<=") return CompareOp::Le;
    if (t.text == "<") return CompareOp::Lt;
    return std::nullopt;
}

SourceLoc loc_of(const Token& t) { return SourceLoc{t.line, t.column}; }

class ProgramParser {
public:
    explicit ProgramParser(const std::vector<Token>& tokens) : cur_(tokens) {}

    Program run() {
        while (!cur_.at_end()) parse_item();
        for (const auto& [name, proc] : program_.procedures) {
            auto sig = program_.proc_sigs.find(name);
            if (sig == program_.proc_sigs.end()) {
                throw SyntaxError("procedure '" + name + "' has no type signature", 0,
                                  proc.loc.line, proc.loc.column);
            }
            if (sig->second.arg_types.size() != proc.params.size()) {
                throw SyntaxError("procedure '" + name + "' has " +
                                      std::to_string(proc.params.size()) +
                                      " parameters but its signature declares " +
                                      std::to_string(sig->second.arg_types.size()),
                                  0, proc.loc.line, proc.loc.column);
            }
        }
        return std::move(program_);
    }

private:
    [[noreturn]] void fail(const std::string& message, const Token& at) {
        TokenCursor::fail(message, at);
    }

    [[noreturn]] void unsupported(const std::string& what, const Token& at) {
        throw UnsupportedFeature("unsupported TeleoR feature: " + what, at.offset, at.line,
                                 at.column);
    }

    std::string expect_name(std::string_view context) {
        const Token& t = cur_.peek();
        if (t.kind != TokenKind::Ident) {
            fail("expected a name " + std::string(context) + ", found " + detail::describe(t),
                 t);
        }
        if (kReserved.count(t.text)) fail("'" + t.text + "' is a reserved word", t);
        return cur_.next().text;
    }

    void claim_name(const std::string& name, const Token& at) {
        if (!names_.insert(name).second) {
            throw DuplicateDefinition(name, at.offset, at.line, at.column);
        }
    }

    void parse_item() {
        const Token& t = cur_.peek();
        if (decl_kind(t) && cur_.peek(1).kind == TokenKind::Ident) {
            parse_declarations();
            return;
        }
        if (t.kind != TokenKind::Ident) {
            fail("expected a definition, declaration or procedure, found " +
                     detail::describe(t),
                 t);
        }
        const Token& after = cur_.peek(1);
        if (after.is("::=")) {
            parse_type_def();
        } else if (after.is(":")) {
            parse_proc_sig();
        } else if (after.is("(")) {
            parse_procedure();
        } else if (after.is("<=") || after.is("::") || after.is("->")) {
            unsupported("relation and function definitions", after);
        } else {
            fail("unexpected " + detail::describe(after) + " after '" + t.text + "'", after);
        }
    }

    std::vector<std::string> parse_type_list() {
        cur_.expect("(", "to open a type list");
        std::vector<std::string> types;
        if (cur_.accept(")")) return types;
        while (true) {
            types.push_back(expect_name("in type list"));
            if (cur_.accept(")")) return types;
            cur_.expect(",", "in type list");
        }
    }

    // A further `name : (types)` entry in a declaration group written on its
    // own line without a separating comma, and not a procedure signature.
    bool continues_declaration_group() const {
        const Token& name = cur_.peek();
        if (name.kind != TokenKind::Ident || decl_kind(name) || !cur_.peek(1).is(":") ||
            !cur_.peek(2).is("(")) {
            return false;
        }
        std::size_t i = 3;
        while (cur_.peek(i).kind != TokenKind::End && !cur_.peek(i).is(")")) ++i;
        return !cur_.peek(i + 1).is("~>");
    }

    void parse_declarations() {
        DeclKind kind = *decl_kind(cur_.next());
        while (true) {
            const Token& at = cur_.peek();
            Declaration d;
            d.kind = kind;
            d.loc = loc_of(at);
            d.name = expect_name("in declaration");
            claim_name(d.name, at);
            cur_.expect(":", "after declared name");
            d.arg_types = parse_type_list();
            program_.declarations.push_back(std::move(d));
            if (cur_.accept(",")) continue;
            if (continues_declaration_group()) continue;
            return;
        }
    }

    void parse_type_def() {
        const Token& at = cur_.peek();
        TypeDef def;
        def.loc = loc_of(at);
        def.name = expect_name("for type definition");
        claim_name(def.name, at);
        cur_.expect("::=", "in type definition");
        if (cur_.accept("(")) {
            IntRange range;
            range.min = expect_integer("as range minimum");
            cur_.expect("..", "in range type");
            range.max = expect_integer("as range maximum");
            cur_.expect(")", "to close range type");
            if (range.min > range.max) fail("range minimum exceeds maximum", at);
            def.body = range;
        } else {
            std::vector<std::string> names{expect_name("in type definition")};
            if (cur_.peek().is("||")) {
                while (cur_.accept("||")) names.push_back(expect_name("in type union"));
                def.body = TypeUnion{std::move(names)};
            } else {
                while (cur_.accept("|")) names.push_back(expect_name("in atom disjunction"));
                if (cur_.peek().is("||")) fail("cannot mix '|' and '||'", cur_.peek());
                def.body = AtomDisjunction{std::move(names)};
            }
        }
        program_.type_defs.push_back(std::move(def));
    }

    std::int64_t expect_integer(std::string_view context) {
        const Token& t = cur_.peek();
        if (t.kind != TokenKind::Integer) {
            fail("expected an integer " + std::string(context) + ", found " + detail::describe(t),
                 t);
        }
        return cur_.next().number.as_integer();
    }

    void parse_proc_sig() {
        const Token& at = cur_.peek();
        ProcSig sig;
        sig.loc = loc_of(at);
        sig.name = expect_name("for procedure signature");
        claim_name(sig.name, at);
        cur_.expect(":", "in procedure signature");
        sig.arg_types = parse_type_list();
        cur_.expect("~>", "after procedure signature types");
        std::string name = sig.name;
        program_.proc_sigs.emplace(std::move(name), std::move(sig));
    }

    void parse_procedure() {
        const Token& at = cur_.peek();
        Procedure proc;
        proc.loc = loc_of(at);
        proc.name = expect_name("for procedure");
        cur_.expect("(", "to open parameter list");
        std::set<std::string> seen;
        if (!cur_.accept(")")) {
            while (true) {
                const Token& p = cur_.peek();
                if (p.kind != TokenKind::Var) {
                    // `foo(a)` followed by `<=` is a relation definition.
                    skip_to_close_paren();
                    if (cur_.peek().is("<=") || cur_.peek().is("::") || cur_.peek().is("->")) {
                        unsupported("relation and function definitions", cur_.peek());
                    }
                    fail("procedure parameters must be variables", p);
                }
                if (!seen.insert(p.text).second) fail("duplicate parameter " + p.text, p);
                proc.params.push_back(cur_.next().text);
                if (cur_.accept(")")) break;
                cur_.expect(",", "in parameter list");
            }
        }
        const Token& brace = cur_.peek();
        if (brace.is("<=") || brace.is("::") || brace.is("->")) {
            unsupported("relation and function definitions", brace);
        }
        cur_.expect("{", "to open procedure body");
        while (!cur_.accept("}")) {
            if (cur_.at_end()) fail("unterminated procedure body", cur_.peek());
            proc.rules.push_back(parse_rule());
        }
        if (proc.rules.empty()) fail("procedure '" + proc.name + "' has no rules", at);
        if (program_.procedures.count(proc.name)) {
            throw DuplicateDefinition(proc.name, at.offset, at.line, at.column);
        }
        std::string name = proc.name;
        program_.procedures.emplace(std::move(name), std::move(proc));
    }

    void skip_to_close_paren() {
        int depth = 1;
        while (!cur_.at_end() && depth > 0) {
            const Token& t = cur_.next();
            if (t.is("(")) ++depth;
            if (t.is(")")) --depth;
        }
    }

    bool at_clause_end() const {
        const Token& t = cur_.peek();
        return t.is("~>") || t.is_ident("while") || t.is_ident("until") || t.is_ident("min") ||
               t.kind == TokenKind::End;
    }

    Rule parse_rule() {
        Rule rule;
        rule.loc = loc_of(cur_.peek());
        if (cur_.peek().is("(") && cur_.peek(1).is(")")) {
            // `() ~> A` is the always-firing guard.
            rule.guard.push_back(Condition::make_true(loc_of(cur_.peek())));
            cur_.next();
            cur_.next();
        } else {
            rule.guard = parse_conjunction("guard");
        }
        if (cur_.peek().is_ident("while")) {
            cur_.next();
            if (!cur_.peek().is_ident("min")) rule.while_cond = parse_conjunction("while condition");
            if (cur_.peek().is_ident("min")) {
                cur_.next();
                rule.while_min = expect_duration();
            }
        }
        if (cur_.peek().is_ident("until")) {
            cur_.next();
            if (!cur_.peek().is_ident("min")) rule.until_cond = parse_conjunction("until condition");
            if (cur_.peek().is_ident("min")) {
                cur_.next();
                rule.until_min = expect_duration();
            }
        }
        cur_.expect("~>", "between rule conditions and actions");
        rule.actions = parse_actions();
        return rule;
    }

    double expect_duration() {
        const Token& t = cur_.peek();
        if (t.kind != TokenKind::Integer && t.kind != TokenKind::Decimal) {
            fail("expected a numeric time after 'min', found " + detail::describe(t), t);
        }
        double v = cur_.next().number.as_double();
        if (v < 0) fail("minimum times must be non-negative", t);
        return v;
    }

    Conjunction parse_conjunction(std::string_view what) {
        Conjunction conds;
        if (at_clause_end()) fail("empty " + std::string(what), cur_.peek());
        while (true) {
            conds.push_back(parse_condition());
            if (!cur_.accept("&")) return conds;
        }
    }

    Condition parse_condition() {
        const Token& t = cur_.peek();
        SourceLoc loc = loc_of(t);
        if (t.is_ident("true") && !cur_.peek(1).is("(")) {
            cur_.next();
            return Condition::make_true(loc);
        }
        if (t.is_ident("not")) {
            cur_.next();
            if (cur_.peek().is("(")) unsupported("negation of a conjunction", cur_.peek());
            return Condition::make_negated(parse_query(), loc);
        }
        if (t.kind == TokenKind::Ident) {
            Term q = parse_query();
            if (compare_op(cur_.peek())) {
                fail("comparisons apply to arithmetic expressions, not predicates", cur_.peek());
            }
            return Condition::make_query(std::move(q), loc);
        }
        Expr lhs = parse_expr();
        auto op = compare_op(cur_.peek());
        if (!op) {
            fail("expected a comparison operator, found " + detail::describe(cur_.peek()),
                 cur_.peek());
        }
        cur_.next();
        Expr rhs = parse_expr();
        return Condition::make_comparison(std::move(lhs), *op, std::move(rhs), loc);
    }

    Term parse_query() {
        const Token& t = cur_.peek();
        if (t.kind != TokenKind::Ident) {
            fail("expected a percept or belief query, found " + detail::describe(t), t);
        }
        if (kReserved.count(t.text)) fail("'" + t.text + "' is a reserved word", t);
        return parse_predicate();
    }

    // Like a term, but `name()` is accepted as the atom `name`.
    Term parse_predicate() {
        const Token& t = cur_.peek();
        if (t.kind == TokenKind::Ident && cur_.peek(1).is("(") && cur_.peek(2).is(")") &&
            cur_.peek(1).line == t.line) {
            std::string name = cur_.next().text;
            cur_.next();
            cur_.next();
            return Term::atom(std::move(name));
        }
        return detail::parse_operand_term(cur_);
    }

    Expr parse_expr() {
        Expr lhs = parse_product();
        while (cur_.peek().is("+") || cur_.peek().is("-")) {
            char op = cur_.next().text[0];
            lhs = Expr::binary(op, std::move(lhs), parse_product());
        }
        return lhs;
    }

    Expr parse_product() {
        Expr lhs = parse_factor();
        while (cur_.peek().is("*") || cur_.peek().is("/")) {
            char op = cur_.next().text[0];
            lhs = Expr::binary(op, std::move(lhs), parse_factor());
        }
        return lhs;
    }

    Expr parse_factor() {
        const Token& t = cur_.next();
        switch (t.kind) {
            case TokenKind::Integer:
            case TokenKind::Decimal:
                return Expr::literal(t.number);
            case TokenKind::Var:
                return Expr::variable(t.text);
            case TokenKind::Punct:
                if (t.text == "(") {
                    Expr inner = parse_expr();
                    cur_.expect(")", "to close parenthesised expression");
                    return inner;
                }
                break;
            default:
                break;
        }
        fail("expected a number, variable or '(' in expression, found " + detail::describe(t), t);
    }

    std::vector<Term> parse_actions() {
        std::vector<Term> actions;
        if (cur_.peek().is("(") && cur_.peek(1).is(")")) {
            cur_.next();
            cur_.next();
        } else {
            while (true) {
                const Token& t = cur_.peek();
                if (t.kind != TokenKind::Ident) {
                    fail("expected an action or procedure call, found " + detail::describe(t), t);
                }
                if (t.is_ident("wait") || t.is_ident("for") || t.is_ident("repeat")) break;
                actions.push_back(parse_predicate());
                if (!cur_.accept(",")) break;
            }
        }
        const Token& t = cur_.peek();
        if (t.is_ident("for") || t.is(";")) unsupported("timed action sequences", t);
        if (t.is_ident("wait") || t.is_ident("repeat")) unsupported("wait/repeat actions", t);
        return actions;
    }

    TokenCursor cur_;
    Program program_;
    std::set<std::string> names_;
};

}  // namespace

Program parse_program(std::string_view source) {
    auto tokens = detail::tokenize(source, detail::LexOptions{.percent_comments = true});
    return ProgramParser(tokens).run();
}

// ---------------------------------------------------------------------------
// Debug printer

namespace {

std::string format_conjunction(const Conjunction& conds) {
    std::string out;
    for (std::size_t i = 0; i < conds.size(); ++i) {
        if (i) out += " & ";
        out += format_condition(conds[i]);
    }
    return out;
}

std::string format_duration(double v) { return format_term(Term::decimal(v)); }

std::string format_types(const std::vector<std::string>& types) {
    std::string out = "(";
    for (std::size_t i = 0; i < types.size(); ++i) {
        if (i) out += ", ";
        out += types[i];
    }
    return out + ")";
}

}  // namespace

std::string format_expr(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Number: return format_term(Term::number(e.number()));
        case Expr::Kind::Var: return e.var_name();
        case Expr::Kind::BinOp: {
            auto side = [](const Expr& s) {
                return s.kind() == Expr::Kind::BinOp ? "(" + format_expr(s) + ")" : format_expr(s);
            };
            return side(e.lhs()) + " " + e.op() + " " + side(e.rhs());
        }
    }
    return {};
}

std::string format_condition(const Condition& c) {
    switch (c.kind) {
        case Condition::Kind::Query: return format_term(c.query);
        case Condition::Kind::NegatedQuery: return "not " + format_term(c.query);
        case Condition::Kind::Comparison:
            return format_expr(c.lhs) + " " + std::string(to_string(c.op)) + " " +
                   format_expr(c.rhs);
        case Condition::Kind::True: return "true";
    }
    return {};
}

std::string format_program(const Program& program) {
    std::string out;
    for (const TypeDef& def : program.type_defs) {
        out += def.name + " ::= ";
        if (const auto* atoms = std::get_if<AtomDisjunction>(&def.body)) {
            for (std::size_t i = 0; i < atoms->atoms.size(); ++i) {
                if (i) out += " | ";
                out += atoms->atoms[i];
            }
        } else if (const auto* u = std::get_if<TypeUnion>(&def.body)) {
            for (std::size_t i = 0; i < u->members.size(); ++i) {
                if (i) out += " || ";
                out += u->members[i];
            }
        } else {
            const auto& r = std::get<IntRange>(def.body);
            out += "(" + std::to_string(r.min) + " .. " + std::to_string(r.max) + ")";
        }
        out += "\n";
    }
    for (const Declaration& d : program.declarations) {
        out += std::string(to_string(d.kind)) + " " + d.name + " : " + format_types(d.arg_types) +
               "\n";
    }
    for (const auto& [name, sig] : program.proc_sigs) {
        out += name + " : " + format_types(sig.arg_types) + " ~>\n";
    }
    for (const auto& [name, proc] : program.procedures) {
        out += name + "(";
        for (std::size_t i = 0; i < proc.params.size(); ++i) {
            if (i) out += ", ";
            out += proc.params[i];
        }
        out += ") {\n";
        for (const Rule& r : proc.rules) {
            out += "  " + format_conjunction(r.guard);
            if (r.while_cond || r.while_min != 0) {
                out += " while";
                if (r.while_cond) out += " " + format_conjunction(*r.while_cond);
                if (r.while_min != 0) out += " min " + format_duration(r.while_min);
            }
            if (r.until_cond || r.until_min != 0) {
                out += " until";
                if (r.until_cond) out += " " + format_conjunction(*r.until_cond);
                if (r.until_min != 0) out += " min " + format_duration(r.until_min);
            }
            out += " ~> ";
            if (r.actions.empty()) {
                out += "()";
            } else {
                for (std::size_t i = 0; i < r.actions.size(); ++i) {
                    if (i) out += ", ";
                    out += format_term(r.actions[i]);
                }
            }
            out += "\n";
        }
        out += "}\n";
    }
    return out;
}

}  // namespace teleo
