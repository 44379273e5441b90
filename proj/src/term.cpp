#include "teleo/term.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

#include "teleo/errors.hpp"
#include "term_parser.hpp"

namespace teleo {

int numeric_compare(const Number& a, const Number& b) noexcept {
    if (a.is_integer() && b.is_integer()) {
        auto x = a.as_integer();
        auto y = b.as_integer();
        return x < y ? -1 : (x > y ? 1 : 0);
    }
    double x = a.as_double();
    double y = b.as_double();
    return x < y ? -1 : (x > y ? 1 : 0);
}

// ---------------------------------------------------------------------------
// Term

Term Term::atom(std::string name) {
    Term t;
    t.kind_ = Kind::Atom;
    t.text_ = std::move(name);
    return t;
}

Term Term::integer(std::int64_t value) { return number(Number{value}); }

Term Term::decimal(double value) { return number(Number{value}); }

Term Term::number(Number value) {
    Term t;
    t.kind_ = Kind::Number;
    t.number_ = value;
    return t;
}

Term Term::string(std::string value) {
    Term t;
    t.kind_ = Kind::String;
    t.text_ = std::move(value);
    return t;
}

Term Term::var(std::string name) {
    Term t;
    t.kind_ = Kind::Var;
    t.text_ = std::move(name);
    return t;
}

Term Term::list(std::vector<Term> items) {
    Term t;
    t.kind_ = Kind::List;
    t.items_ = std::make_shared<const std::vector<Term>>(std::move(items));
    return t;
}

Term Term::compound(std::string functor, std::vector<Term> args) {
    if (args.empty()) return atom(std::move(functor));
    Term t;
    t.kind_ = Kind::Compound;
    t.text_ = std::move(functor);
    t.items_ = std::make_shared<const std::vector<Term>>(std::move(args));
    return t;
}

std::span<const Term> Term::args() const noexcept {
    if (!items_) return {};
    return {items_->data(), items_->size()};
}

bool operator==(const Term& a, const Term& b) {
    if (a.kind_ != b.kind_) return false;
    switch (a.kind_) {
        case Term::Kind::Number:
            return a.number_ == b.number_;
        case Term::Kind::Atom:
        case Term::Kind::String:
        case Term::Kind::Var:
            return a.text_ == b.text_;
        case Term::Kind::List:
        case Term::Kind::Compound: {
            if (a.text_ != b.text_) return false;
            if (a.items_ == b.items_) return true;
            auto x = a.args();
            auto y = b.args();
            return std::equal(x.begin(), x.end(), y.begin(), y.end());
        }
    }
    return false;
}

bool term_less(const Term& a, const Term& b) {
    if (a.kind() != b.kind()) return a.kind() < b.kind();
    switch (a.kind()) {
        case Term::Kind::Number: {
            const Number& x = a.number_value();
            const Number& y = b.number_value();
            if (x.is_integer() != y.is_integer()) return x.is_integer();
            if (x.is_integer()) return x.as_integer() < y.as_integer();
            return x.as_double() < y.as_double();
        }
        case Term::Kind::Atom:
        case Term::Kind::String:
        case Term::Kind::Var:
            return a.name() < b.name();
        case Term::Kind::List:
        case Term::Kind::Compound: {
            if (a.name() != b.name()) return a.name() < b.name();
            auto x = a.args();
            auto y = b.args();
            return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end(),
                                                term_less);
        }
    }
    return false;
}

FunctorKey functor_key(const Term& predicate) {
    return FunctorKey{predicate.name(), predicate.is_compound() ? predicate.arity() : 0};
}

// ---------------------------------------------------------------------------
// Bindings

const Term* Bindings::find(std::string_view name) const {
    auto it = map_.find(name);
    return it == map_.end() ? nullptr : &it->second;
}

void Bindings::bind(std::string name, Term value) {
    if (!is_ground(value)) {
        throw InternalError("binding " + name + " to non-ground " + format_term(value));
    }
    auto [it, inserted] = map_.emplace(std::move(name), std::move(value));
    if (!inserted) throw InternalError("variable " + it->first + " is already bound");
}

Bindings Bindings::restricted_to(const std::set<std::string>& names) const {
    Bindings out;
    for (const auto& [k, v] : map_) {
        if (names.count(k)) out.map_.emplace(k, v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Names and operators

namespace {

constexpr std::array<std::string_view, 10> kInfixOps = {"&", ">", ">=", "==", "<=",
                                                        "<", "+", "-",  "*",  "/"};

bool is_operator_compound(const Term& t) {
    return t.is_compound() && t.arity() == 2 && is_infix_operator(t.name());
}

}  // namespace

bool is_infix_operator(std::string_view functor) noexcept {
    return std::find(kInfixOps.begin(), kInfixOps.end(), functor) != kInfixOps.end();
}

bool is_atom_name(std::string_view name) noexcept {
    if (name.empty()) return false;
    if (!(std::islower(static_cast<unsigned char>(name[0])) || name[0] == '_')) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

bool is_var_name(std::string_view name) noexcept {
    if (name.empty() || !std::isupper(static_cast<unsigned char>(name[0]))) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

// ---------------------------------------------------------------------------
// Formatting

namespace {

void format_number(const Number& n, std::string& out) {
    std::array<char, 64> buf{};
    if (n.is_integer()) {
        auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), n.as_integer());
        out.append(buf.data(), ptr);
        return;
    }
    double v = n.as_double();
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    std::string s(buf.data(), ptr);
    if (std::isfinite(v)) {
        // Keep a '.' so the text reads back as a decimal.
        auto e = s.find_first_of("eE");
        if (s.find('.') == std::string::npos) {
            if (e == std::string::npos) {
                s += ".0";
            } else {
                s.insert(e, ".0");
            }
        }
    }
    out += s;
}

void format_string(const std::string& s, std::string& out) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    out += '"';
}

void format_into(const Term& t, std::string& out);

void format_operand(const Term& t, std::string& out) {
    if (is_operator_compound(t)) {
        out += '(';
        format_into(t, out);
        out += ')';
    } else {
        format_into(t, out);
    }
}

void format_into(const Term& t, std::string& out) {
    switch (t.kind()) {
        case Term::Kind::Atom:
        case Term::Kind::Var:
            out += t.name();
            return;
        case Term::Kind::Number:
            format_number(t.number_value(), out);
            return;
        case Term::Kind::String:
            format_string(t.name(), out);
            return;
        case Term::Kind::List: {
            out += '[';
            bool first = true;
            for (const Term& item : t.args()) {
                if (!first) out += ',';
                first = false;
                format_into(item, out);
            }
            out += ']';
            return;
        }
        case Term::Kind::Compound: {
            if (is_operator_compound(t)) {
                format_operand(t.args()[0], out);
                out += t.name();
                format_operand(t.args()[1], out);
                return;
            }
            out += t.name();
            out += '(';
            bool first = true;
            for (const Term& arg : t.args()) {
                if (!first) out += ',';
                first = false;
                format_into(arg, out);
            }
            out += ')';
            return;
        }
    }
}

}  // namespace

std::string format_term(const Term& t) {
    std::string out;
    format_into(t, out);
    return out;
}

std::string format_bindings(const Bindings& b) {
    std::string out = "{";
    bool first = true;
    for (const auto& [name, value] : b) {
        if (!first) out += ',';
        first = false;
        out += name;
        out += "->";
        out += format_term(value);
    }
    out += '}';
    return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

const Token& TokenCursor::expect(std::string_view punct, std::string_view context) {
    if (!peek().is(punct)) {
        fail("expected '" + std::string(punct) + "' " + std::string(context) + ", found " +
                 describe(peek()),
             peek());
    }
    return next();
}

void TokenCursor::fail(const std::string& message, const Token& at) {
    throw SyntaxError(message, at.offset, at.line, at.column);
}

std::string describe(const Token& tok) {
    switch (tok.kind) {
        case TokenKind::End: return "end of input";
        case TokenKind::String: return "string literal";
        default: return "'" + tok.text + "'";
    }
}

namespace {

std::vector<Term> parse_sequence(TokenCursor& cur, std::string_view close,
                                 std::string_view context) {
    std::vector<Term> items;
    if (cur.accept(close)) return items;
    while (true) {
        items.push_back(parse_full_term(cur));
        if (cur.accept(close)) return items;
        cur.expect(",", context);
    }
}

const char* const kComparisonOps[] = {">=", "<=", "==", ">", "<"};

bool is_comparison(const Token& t) {
    if (t.kind != TokenKind::Punct) return false;
    for (const char* op : kComparisonOps) {
        if (t.text == op) return true;
    }
    return false;
}

Term parse_product(TokenCursor& cur) {
    Term lhs = parse_operand_term(cur);
    while (cur.peek().is("*") || cur.peek().is("/")) {
        std::string op = cur.next().text;
        Term rhs = parse_operand_term(cur);
        lhs = Term::compound(op, {lhs, rhs});
    }
    return lhs;
}

Term parse_sum(TokenCursor& cur) {
    Term lhs = parse_product(cur);
    while (cur.peek().is("+") || cur.peek().is("-")) {
        std::string op = cur.next().text;
        Term rhs = parse_product(cur);
        lhs = Term::compound(op, {lhs, rhs});
    }
    return lhs;
}

Term parse_comparison(TokenCursor& cur) {
    Term lhs = parse_sum(cur);
    if (is_comparison(cur.peek())) {
        std::string op = cur.next().text;
        Term rhs = parse_sum(cur);
        return Term::compound(op, {lhs, rhs});
    }
    return lhs;
}

}  // namespace

Term parse_operand_term(TokenCursor& cur) {
    const Token& tok = cur.next();
    switch (tok.kind) {
        case TokenKind::Integer:
        case TokenKind::Decimal:
            return Term::number(tok.number);
        case TokenKind::String:
            return Term::string(tok.text);
        case TokenKind::Var:
            return Term::var(tok.text);
        case TokenKind::Ident: {
            std::string name = tok.text;
            if (cur.peek().is("(") && cur.peek().line == tok.line) {
                cur.next();
                auto args = parse_sequence(cur, ")", "in argument list");
                if (args.empty()) TokenCursor::fail("empty argument list after " + name, tok);
                return Term::compound(std::move(name), std::move(args));
            }
            return Term::atom(std::move(name));
        }
        case TokenKind::Punct:
            if (tok.text == "[") return Term::list(parse_sequence(cur, "]", "in list"));
            if (tok.text == "(") {
                Term inner = parse_full_term(cur);
                cur.expect(")", "to close parenthesis");
                return inner;
            }
            break;
        case TokenKind::End:
            break;
    }
    TokenCursor::fail("expected a term, found " + describe(tok), tok);
}

Term parse_full_term(TokenCursor& cur) {
    Term lhs = parse_comparison(cur);
    if (cur.accept("&")) {
        Term rhs = parse_full_term(cur);
        return Term::compound("&", {lhs, rhs});
    }
    return lhs;
}

}  // namespace detail

Term parse_term(std::string_view text) {
    auto tokens = detail::tokenize(text);
    detail::TokenCursor cur(tokens);
    Term t = detail::parse_full_term(cur);
    if (!cur.at_end()) {
        detail::TokenCursor::fail("unexpected " + detail::describe(cur.peek()) + " after term",
                                  cur.peek());
    }
    return t;
}

// ---------------------------------------------------------------------------
// Substitution and matching

bool is_ground(const Term& t) {
    switch (t.kind()) {
        case Term::Kind::Var:
            return false;
        case Term::Kind::List:
        case Term::Kind::Compound:
            return std::all_of(t.args().begin(), t.args().end(),
                               [](const Term& a) { return is_ground(a); });
        default:
            return true;
    }
}

Term substitute(const Term& t, const Bindings& b) {
    switch (t.kind()) {
        case Term::Kind::Var: {
            const Term* v = b.find(t.name());
            return v ? *v : t;
        }
        case Term::Kind::List:
        case Term::Kind::Compound: {
            if (is_ground(t)) return t;
            std::vector<Term> items;
            items.reserve(t.arity());
            for (const Term& a : t.args()) items.push_back(substitute(a, b));
            return t.is_list() ? Term::list(std::move(items))
                               : Term::compound(t.name(), std::move(items));
        }
        default:
            return t;
    }
}

void collect_vars(const Term& t, std::set<std::string>& out) {
    if (t.is_var()) {
        out.insert(t.name());
        return;
    }
    for (const Term& a : t.args()) collect_vars(a, out);
}

namespace {

bool match_into(const Term& query, const Term& ground, Bindings& vars) {
    switch (query.kind()) {
        case Term::Kind::Var: {
            if (const Term* bound = vars.find(query.name())) return *bound == ground;
            vars.bind(query.name(), ground);
            return true;
        }
        case Term::Kind::Compound:
        case Term::Kind::List: {
            if (ground.kind() != query.kind() || ground.name() != query.name() ||
                ground.arity() != query.arity()) {
                return false;
            }
            auto qa = query.args();
            auto ga = ground.args();
            for (std::size_t i = 0; i < qa.size(); ++i) {
                if (!match_into(qa[i], ga[i], vars)) return false;
            }
            return true;
        }
        default:
            return query == ground;
    }
}

}  // namespace

std::optional<Bindings> match(const Term& query, const Term& ground, const Bindings& b) {
    if (!is_ground(ground)) {
        throw InternalError("match against non-ground term " + format_term(ground));
    }
    Bindings out = b;
    if (!match_into(query, ground, out)) return std::nullopt;
    return out;
}

}  // namespace teleo
