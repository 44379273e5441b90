#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "teleo/program.hpp"
#include "teleo/term.hpp"

namespace teleo {

class UndefinedType : public std::runtime_error {
public:
    explicit UndefinedType(const std::string& name)
        : std::runtime_error("undefined type '" + name + "'"), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class InvalidTypeDefinition : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Built-in types `atomic > num > int > nat`, `atomic > atom`,
/// `atomic > string`, plus user definitions: atom disjunctions sit under
/// `atom`, integer ranges under `int`, and a union sits above each of its
/// members and under the lowest built-in type containing all of them.
class TypeHierarchy {
public:
    /// Throws UndefinedType (union member not yet defined) or
    /// DuplicateDefinition.
    static TypeHierarchy build(const std::vector<TypeDef>& defs);

    bool contains(std::string_view name) const;
    /// Reflexive, transitive.
    bool is_subtype(std::string_view sub, std::string_view super) const;
    std::vector<std::string> parents(std::string_view name) const;
    /// Null for built-in types.
    const TypeDef* definition(std::string_view name) const;
    std::vector<std::string> type_names() const;

    static bool is_builtin(std::string_view name) noexcept;

private:
    struct Node {
        std::optional<TypeDef> def;
        std::vector<std::string> parents;
    };

    void add(const TypeDef& def);

    std::map<std::string, Node, std::less<>> nodes_;
};

/// Membership test. Variables are accepted for any type. Throws
/// UndefinedType for an unknown type name.
bool check_type(const Term& thing, std::string_view expected, const TypeHierarchy& h);

enum class Sort { Percept, Belief, Durative, Discrete, Procedure };

std::string_view to_string(Sort sort) noexcept;

struct Signature {
    Sort sort = Sort::Percept;
    std::vector<std::string> arg_types;
    SourceLoc loc;
};

/// Name -> (sort, argument types) for every declared thing and procedure.
class SignatureTable {
public:
    static SignatureTable build(const Program& program);

    const Signature* find(std::string_view name) const;

private:
    std::map<std::string, Signature, std::less<>> entries_;
};

struct Diagnostic {
    SourceLoc loc;
    std::string severity = "error";
    std::string message;

    /// `file:line:col: severity: message`
    std::string render(std::string_view file) const;
};

/// Whole-program static checks; an empty result means the program is runnable.
std::vector<Diagnostic> check_program(const Program& program);

/// Runtime check of an incoming percept against its declaration. Returns
/// a reason when the percept must be rejected.
std::optional<std::string> validate_percept(const Term& percept, const SignatureTable& sigs,
                                            const TypeHierarchy& h);

}  // namespace teleo
