#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace teleo {

/// Exact 64-bit integer or binary floating point decimal. Equality is
/// structural: `10` and `10.0` are different numbers here; use
/// `numeric_compare` for arithmetic comparison.
struct Number {
    std::variant<std::int64_t, double> value;

    bool is_integer() const noexcept { return value.index() == 0; }
    std::int64_t as_integer() const { return std::get<std::int64_t>(value); }
    double as_double() const noexcept {
        return is_integer() ? static_cast<double>(std::get<std::int64_t>(value))
                            : std::get<double>(value);
    }

    friend bool operator==(const Number&, const Number&) = default;
};

/// Three-way numeric comparison (-1, 0, 1); integers compare exactly.
int numeric_compare(const Number& a, const Number& b) noexcept;

/// Immutable term value shared by programs, beliefs and wire messages.
/// Children are held behind a shared pointer, so copies are cheap.
class Term {
public:
    enum class Kind { Atom, Number, String, Var, List, Compound };

    static Term atom(std::string name);
    static Term integer(std::int64_t value);
    static Term decimal(double value);
    static Term number(Number value);
    static Term string(std::string value);
    static Term var(std::string name);
    static Term list(std::vector<Term> items);
    /// An empty argument list yields an Atom.
    static Term compound(std::string functor, std::vector<Term> args);

    Kind kind() const noexcept { return kind_; }
    bool is_atom() const noexcept { return kind_ == Kind::Atom; }
    bool is_number() const noexcept { return kind_ == Kind::Number; }
    bool is_string() const noexcept { return kind_ == Kind::String; }
    bool is_var() const noexcept { return kind_ == Kind::Var; }
    bool is_list() const noexcept { return kind_ == Kind::List; }
    bool is_compound() const noexcept { return kind_ == Kind::Compound; }
    /// Atom or compound: something that can be a query, fact or action.
    bool is_predicate() const noexcept { return is_atom() || is_compound(); }

    /// Atom name, variable name, compound functor or string contents.
    const std::string& name() const noexcept { return text_; }
    const Number& number_value() const noexcept { return number_; }
    /// Compound arguments or list items; empty otherwise.
    std::span<const Term> args() const noexcept;
    std::size_t arity() const noexcept { return args().size(); }

    friend bool operator==(const Term& a, const Term& b);

private:
    Term() = default;

    Kind kind_ = Kind::Atom;
    std::string text_;
    Number number_{std::int64_t{0}};
    std::shared_ptr<const std::vector<Term>> items_;
};

/// Strict weak order on terms (by kind, then contents); used for sets and maps.
bool term_less(const Term& a, const Term& b);

struct TermLess {
    bool operator()(const Term& a, const Term& b) const { return term_less(a, b); }
};

/// Functor name and arity of a predicate term (atoms have arity 0).
struct FunctorKey {
    std::string name;
    std::size_t arity = 0;

    friend auto operator<=>(const FunctorKey&, const FunctorKey&) = default;
};

FunctorKey functor_key(const Term& predicate);

/// Variable name -> ground value. Entries are only ever added.
class Bindings {
public:
    using Map = std::map<std::string, Term, std::less<>>;

    Bindings() = default;

    const Term* find(std::string_view name) const;
    bool contains(std::string_view name) const { return find(name) != nullptr; }

    /// Adds a new entry. Throws InternalError if `name` is already bound or
    /// `value` is not ground.
    void bind(std::string name, Term value);

    std::size_t size() const noexcept { return map_.size(); }
    bool empty() const noexcept { return map_.empty(); }
    Map::const_iterator begin() const noexcept { return map_.begin(); }
    Map::const_iterator end() const noexcept { return map_.end(); }

    /// Keeps only the entries whose names are in `names`.
    Bindings restricted_to(const std::set<std::string>& names) const;

    friend bool operator==(const Bindings&, const Bindings&) = default;

private:
    Map map_;
};

/// Parses one complete term. Throws SyntaxError (with byte offset).
Term parse_term(std::string_view text);

/// Canonical text: no whitespace, infix for the arithmetic/comparison/`&`
/// operators, parenthesised operands. parse_term(format_term(t)) == t.
std::string format_term(const Term& t);

std::string format_bindings(const Bindings& b);

bool is_ground(const Term& t);

/// Replaces every bound variable in `t` by its value.
Term substitute(const Term& t, const Bindings& b);

/// Adds every variable name occurring in `t` to `out`.
void collect_vars(const Term& t, std::set<std::string>& out);

/// One-sided matching of `query` against the ground term `ground`, extending
/// `b`. Returns the extended bindings on success. Throws InternalError if
/// `ground` contains a variable.
std::optional<Bindings> match(const Term& query, const Term& ground, const Bindings& b);

/// True for the binary operator functors with infix syntax.
bool is_infix_operator(std::string_view functor) noexcept;

bool is_atom_name(std::string_view name) noexcept;
bool is_var_name(std::string_view name) noexcept;

}  // namespace teleo
