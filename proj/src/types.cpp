#include "teleo/types.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "teleo/errors.hpp"

namespace teleo {

namespace {

constexpr std::array<std::string_view, 6> kBuiltins = {"atomic", "num", "int",
                                                       "nat",    "atom", "string"};

// Candidate parents for a union, lowest first.
constexpr std::array<std::string_view, 5> kUnionParents = {"int", "num", "atom", "string",
                                                           "atomic"};

}  // namespace

bool TypeHierarchy::is_builtin(std::string_view name) noexcept {
    return std::find(kBuiltins.begin(), kBuiltins.end(), name) != kBuiltins.end();
}

TypeHierarchy TypeHierarchy::build(const std::vector<TypeDef>& defs) {
    TypeHierarchy h;
    h.nodes_["atomic"] = {};
    h.nodes_["num"] = Node{std::nullopt, {"atomic"}};
    h.nodes_["int"] = Node{std::nullopt, {"num"}};
    h.nodes_["nat"] = Node{std::nullopt, {"int"}};
    h.nodes_["atom"] = Node{std::nullopt, {"atomic"}};
    h.nodes_["string"] = Node{std::nullopt, {"atomic"}};
    for (const TypeDef& def : defs) h.add(def);
    return h;
}

void TypeHierarchy::add(const TypeDef& def) {
    if (nodes_.count(def.name)) {
        throw DuplicateDefinition(def.name, 0, def.loc.line, def.loc.column);
    }
    Node node{def, {}};
    if (std::holds_alternative<AtomDisjunction>(def.body)) {
        if (std::get<AtomDisjunction>(def.body).atoms.empty()) {
            throw InvalidTypeDefinition("empty atom disjunction '" + def.name + "'");
        }
        node.parents = {"atom"};
    } else if (std::holds_alternative<IntRange>(def.body)) {
        const auto& r = std::get<IntRange>(def.body);
        if (r.min > r.max) throw InvalidTypeDefinition("empty range type '" + def.name + "'");
        node.parents = {"int"};
    } else {
        const auto& members = std::get<TypeUnion>(def.body).members;
        if (members.size() < 2) {
            throw InvalidTypeDefinition("type union '" + def.name + "' needs two members");
        }
        for (const auto& m : members) {
            if (!contains(m)) throw UndefinedType(m);
        }
        for (std::string_view candidate : kUnionParents) {
            bool is_member = std::find(members.begin(), members.end(), candidate) != members.end();
            bool covers = std::all_of(members.begin(), members.end(),
                                      [&](const std::string& m) { return is_subtype(m, candidate); });
            if (!is_member && covers) {
                node.parents = {std::string(candidate)};
                break;
            }
        }
        for (const auto& m : members) nodes_.find(m)->second.parents.push_back(def.name);
    }
    nodes_.emplace(def.name, std::move(node));
}

bool TypeHierarchy::contains(std::string_view name) const { return nodes_.count(name) > 0; }

bool TypeHierarchy::is_subtype(std::string_view sub, std::string_view super) const {
    if (sub == super) return contains(sub);
    auto it = nodes_.find(sub);
    if (it == nodes_.end()) return false;
    for (const auto& p : it->second.parents) {
        if (is_subtype(p, super)) return true;
    }
    return false;
}

std::vector<std::string> TypeHierarchy::parents(std::string_view name) const {
    auto it = nodes_.find(name);
    if (it == nodes_.end()) throw UndefinedType(std::string(name));
    return it->second.parents;
}

const TypeDef* TypeHierarchy::definition(std::string_view name) const {
    auto it = nodes_.find(name);
    if (it == nodes_.end() || !it->second.def) return nullptr;
    return &*it->second.def;
}

std::vector<std::string> TypeHierarchy::type_names() const {
    std::vector<std::string> out;
    for (const auto& [name, node] : nodes_) out.push_back(name);
    return out;
}

bool check_type(const Term& thing, std::string_view expected, const TypeHierarchy& h) {
    if (!h.contains(expected)) throw UndefinedType(std::string(expected));
    if (thing.is_var()) return true;
    if (expected == "atomic") return thing.is_atom() || thing.is_number() || thing.is_string();
    if (expected == "num") return thing.is_number();
    if (expected == "int") return thing.is_number() && thing.number_value().is_integer();
    if (expected == "nat") {
        return thing.is_number() && thing.number_value().is_integer() &&
               thing.number_value().as_integer() >= 0;
    }
    if (expected == "atom") return thing.is_atom();
    if (expected == "string") return thing.is_string();

    const TypeDef* def = h.definition(expected);
    if (!def) throw InvalidTypeDefinition("type '" + std::string(expected) + "' has no definition");
    if (const auto* atoms = std::get_if<AtomDisjunction>(&def->body)) {
        return thing.is_atom() &&
               std::find(atoms->atoms.begin(), atoms->atoms.end(), thing.name()) !=
                   atoms->atoms.end();
    }
    if (const auto* u = std::get_if<TypeUnion>(&def->body)) {
        return std::any_of(u->members.begin(), u->members.end(),
                           [&](const std::string& m) { return check_type(thing, m, h); });
    }
    if (const auto* r = std::get_if<IntRange>(&def->body)) {
        if (!thing.is_number() || !thing.number_value().is_integer()) return false;
        auto v = thing.number_value().as_integer();
        return r->min <= v && v <= r->max;
    }
    throw InvalidTypeDefinition("malformed definition of '" + std::string(expected) + "'");
}

std::string_view to_string(Sort sort) noexcept {
    switch (sort) {
        case Sort::Percept: return "percept";
        case Sort::Belief: return "belief";
        case Sort::Durative: return "durative action";
        case Sort::Discrete: return "discrete action";
        case Sort::Procedure: return "procedure";
    }
    return "?";
}

SignatureTable SignatureTable::build(const Program& program) {
    SignatureTable table;
    for (const Declaration& d : program.declarations) {
        Sort sort = Sort::Percept;
        switch (d.kind) {
            case DeclKind::Percept: sort = Sort::Percept; break;
            case DeclKind::Belief: sort = Sort::Belief; break;
            case DeclKind::Durative: sort = Sort::Durative; break;
            case DeclKind::Discrete: sort = Sort::Discrete; break;
        }
        table.entries_.emplace(d.name, Signature{sort, d.arg_types, d.loc});
    }
    for (const auto& [name, sig] : program.proc_sigs) {
        table.entries_.emplace(name, Signature{Sort::Procedure, sig.arg_types, sig.loc});
    }
    return table;
}

const Signature* SignatureTable::find(std::string_view name) const {
    auto it = entries_.find(name);
    return it == entries_.end() ? nullptr : &it->second;
}

std::string Diagnostic::render(std::string_view file) const {
    return std::string(file) + ":" + std::to_string(loc.line) + ":" + std::to_string(loc.column) +
           ": " + severity + ": " + message;
}

// ---------------------------------------------------------------------------
// Program checking

namespace {

class ProgramChecker {
public:
    explicit ProgramChecker(const Program& program)
        : program_(program), sigs_(SignatureTable::build(program)) {}

    std::vector<Diagnostic> run() {
        build_hierarchy();
        for (const Declaration& d : program_.declarations) {
            check_type_names(d.arg_types, d.loc, "declaration of '" + d.name + "'");
        }
        for (const auto& [name, sig] : program_.proc_sigs) {
            check_type_names(sig.arg_types, sig.loc, "signature of '" + name + "'");
            if (!program_.procedures.count(name)) {
                report(sig.loc, "procedure '" + name + "' is declared but never defined");
            }
        }
        for (const auto& [name, proc] : program_.procedures) check_procedure(proc);
        return std::move(diags_);
    }

private:
    // Variable name -> type name of the position that binds it.
    using VarTypes = std::map<std::string, std::string>;

    void report(SourceLoc loc, std::string message) {
        diags_.push_back(Diagnostic{loc, "error", std::move(message)});
    }

    void build_hierarchy() {
        // Add definitions one at a time so that one bad definition does not
        // hide the rest.
        std::vector<TypeDef> accepted;
        for (const TypeDef& def : program_.type_defs) {
            accepted.push_back(def);
            try {
                hierarchy_ = TypeHierarchy::build(accepted);
            } catch (const std::exception& e) {
                report(def.loc, e.what());
                accepted.pop_back();
            }
        }
        hierarchy_ = TypeHierarchy::build(accepted);
    }

    void check_type_names(const std::vector<std::string>& types, SourceLoc loc,
                          const std::string& where) {
        for (const auto& t : types) {
            if (!hierarchy_.contains(t)) report(loc, "undefined type '" + t + "' in " + where);
        }
    }

    bool known_type(const std::string& t) const { return hierarchy_.contains(t); }

    void check_procedure(const Procedure& proc) {
        const Signature* sig = sigs_.find(proc.name);
        VarTypes params;
        for (std::size_t i = 0; i < proc.params.size(); ++i) {
            if (sig && i < sig->arg_types.size()) params[proc.params[i]] = sig->arg_types[i];
        }
        for (const Rule& rule : proc.rules) check_rule(proc, rule, params);
    }

    void check_rule(const Procedure& proc, const Rule& rule, const VarTypes& params) {
        VarTypes bound = params;
        check_conjunction(rule.guard, bound);
        VarTypes guard_bound = bound;
        if (rule.while_cond) {
            VarTypes scope = guard_bound;
            check_conjunction(*rule.while_cond, scope);
        }
        if (rule.until_cond) {
            VarTypes scope = guard_bound;
            check_conjunction(*rule.until_cond, scope);
        }
        check_actions(proc, rule, guard_bound);
    }

    void check_conjunction(const Conjunction& conds, VarTypes& bound) {
        for (const Condition& c : conds) {
            switch (c.kind) {
                case Condition::Kind::True:
                    break;
                case Condition::Kind::Query:
                    check_query(c.query, c.loc, &bound);
                    break;
                case Condition::Kind::NegatedQuery:
                    check_query(c.query, c.loc, nullptr);
                    break;
                case Condition::Kind::Comparison: {
                    std::set<std::string> vars;
                    collect_vars(c.lhs, vars);
                    collect_vars(c.rhs, vars);
                    for (const auto& v : vars) {
                        auto it = bound.find(v);
                        if (it == bound.end()) {
                            report(c.loc, "variable " + v +
                                              " in comparison is not bound by a parameter or an "
                                              "earlier query");
                        } else if (known_type(it->second) &&
                                   !hierarchy_.is_subtype(it->second, "num")) {
                            report(c.loc, "variable " + v + " of type " + it->second +
                                              " used in an arithmetic comparison");
                        }
                    }
                    break;
                }
            }
        }
    }

    // Checks a percept/belief query. Positive queries record the variables
    // they bind in `bound`.
    void check_query(const Term& q, SourceLoc loc, VarTypes* bound) {
        if (!q.is_predicate()) {
            report(loc, "query must be a predicate, found " + format_term(q));
            return;
        }
        const Signature* sig = sigs_.find(q.name());
        if (!sig) {
            report(loc, "'" + q.name() + "' is not declared");
            return;
        }
        if (sig->sort != Sort::Percept && sig->sort != Sort::Belief) {
            report(loc, "'" + q.name() + "' is a " + std::string(to_string(sig->sort)) +
                            ", not a percept or belief");
            return;
        }
        if (!check_args(q, *sig, loc, bound)) return;
    }

    // Arity and per-argument types. Variables already bound are checked
    // against their binding type; unbound ones are recorded when `bind_into`
    // is given.
    bool check_args(const Term& t, const Signature& sig, SourceLoc loc, VarTypes* bind_into,
                    const VarTypes* must_be_bound = nullptr) {
        if (t.arity() != sig.arg_types.size()) {
            report(loc, "'" + t.name() + "' expects " + std::to_string(sig.arg_types.size()) +
                            " argument(s) but is given " + std::to_string(t.arity()));
            return false;
        }
        bool ok = true;
        auto args = t.args();
        for (std::size_t i = 0; i < args.size(); ++i) {
            const Term& a = args[i];
            const std::string& expected = sig.arg_types[i];
            if (!known_type(expected)) continue;  // already reported on the declaration
            if (a.is_var()) {
                const VarTypes* scope = must_be_bound ? must_be_bound : bind_into;
                auto it = scope ? scope->find(a.name()) : VarTypes::const_iterator{};
                bool is_bound = scope && it != scope->end();
                if (must_be_bound && !is_bound) {
                    report(loc, "unbound RHS variable " + a.name() + " in '" + format_term(t) + "'");
                    ok = false;
                } else if (is_bound && known_type(it->second) &&
                           !hierarchy_.is_subtype(it->second, expected) &&
                           !hierarchy_.is_subtype(expected, it->second)) {
                    report(loc, "variable " + a.name() + " of type " + it->second +
                                    " cannot be used where " + expected + " is expected");
                    ok = false;
                } else if (!is_bound && bind_into) {
                    (*bind_into)[a.name()] = expected;
                }
                continue;
            }
            if (!is_ground(a) || !check_type(a, expected, hierarchy_)) {
                report(loc, "type error: " + format_term(a) + " is not of type " + expected +
                                " in '" + format_term(t) + "'");
                ok = false;
            }
        }
        return ok;
    }

    void check_actions(const Procedure& proc, const Rule& rule, const VarTypes& bound) {
        (void)proc;
        const bool single = rule.actions.size() == 1;
        for (const Term& a : rule.actions) {
            if (!a.is_predicate()) {
                report(rule.loc, "action must be a predicate, found " + format_term(a));
                continue;
            }
            if (a.name() == "remember" || a.name() == "forget") {
                check_belief_update(a, rule.loc, bound);
                continue;
            }
            const Signature* sig = sigs_.find(a.name());
            if (!sig) {
                report(rule.loc, "action '" + a.name() + "' is not declared");
                continue;
            }
            switch (sig->sort) {
                case Sort::Procedure:
                    if (!single) {
                        report(rule.loc, "procedure call '" + a.name() +
                                             "' must be the only action of its rule");
                        continue;
                    }
                    break;
                case Sort::Durative:
                case Sort::Discrete:
                    break;
                default:
                    report(rule.loc, "'" + a.name() + "' is a " +
                                         std::string(to_string(sig->sort)) + ", not an action");
                    continue;
            }
            check_args(a, *sig, rule.loc, nullptr, &bound);
        }
    }

    void check_belief_update(const Term& a, SourceLoc loc, const VarTypes& bound) {
        if (a.arity() != 1 || !a.args()[0].is_predicate()) {
            report(loc, a.name() + " takes exactly one belief");
            return;
        }
        const Term& belief = a.args()[0];
        const Signature* sig = sigs_.find(belief.name());
        if (!sig || sig->sort != Sort::Belief) {
            report(loc, "'" + belief.name() + "' in " + a.name() + " is not a declared belief");
            return;
        }
        check_args(belief, *sig, loc, nullptr, &bound);
    }

    const Program& program_;
    SignatureTable sigs_;
    TypeHierarchy hierarchy_ = TypeHierarchy::build({});
    std::vector<Diagnostic> diags_;
};

}  // namespace

std::vector<Diagnostic> check_program(const Program& program) {
    return ProgramChecker(program).run();
}

std::optional<std::string> validate_percept(const Term& percept, const SignatureTable& sigs,
                                            const TypeHierarchy& h) {
    if (!percept.is_predicate()) return "percept is not a predicate: " + format_term(percept);
    if (!is_ground(percept)) return "percept is not ground: " + format_term(percept);
    const Signature* sig = sigs.find(percept.name());
    if (!sig || sig->sort != Sort::Percept) return "undeclared percept " + format_term(percept);
    if (percept.arity() != sig->arg_types.size()) {
        return "wrong arity for percept " + format_term(percept);
    }
    auto args = percept.args();
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (!h.contains(sig->arg_types[i]) || !check_type(args[i], sig->arg_types[i], h)) {
            return "ill-typed percept " + format_term(percept);
        }
    }
    return std::nullopt;
}

}  // namespace teleo
