#pragma once
// Random term generators and brute-force oracles shared by the unit tests and
// the acceptance suite. The oracles deliberately avoid the library's matcher
// and evaluator: they enumerate candidate assignments and compare with
// substitute().

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "teleo/term.hpp"

namespace teleo::testing {

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

/// Arbitrary terms for codec round trips: every kind, nested, including
/// infix operator compounds, negative numbers and escaped strings.
class TermGenerator {
public:
    explicit TermGenerator(std::uint64_t seed) : rng_(seed) {}

    Term operator()(int depth = 4) { return any(depth); }

    Term any(int depth) {
        std::size_t k = pick(rng_, depth > 0 ? 8 : 5);
        switch (k) {
            case 0: return Term::atom(atom_name());
            case 1: return number();
            case 2: return Term::string(string_value());
            case 3: return Term::var(var_name());
            case 4: return Term::atom(atom_name());
            case 5: {
                std::vector<Term> items;
                for (std::size_t n = pick(rng_, 4); n > 0; --n) items.push_back(any(depth - 1));
                return Term::list(std::move(items));
            }
            case 6: {
                static const char* ops[] = {"&", ">", ">=", "==", "<=", "<", "+", "-", "*", "/"};
                return Term::compound(ops[pick(rng_, 10)], {any(depth - 1), any(depth - 1)});
            }
            default: {
                std::vector<Term> args;
                for (std::size_t n = 1 + pick(rng_, 3); n > 0; --n) args.push_back(any(depth - 1));
                return Term::compound(atom_name(), std::move(args));
            }
        }
    }

    Term number() {
        switch (pick(rng_, 4)) {
            case 0:
                return Term::integer(std::uniform_int_distribution<std::int64_t>(-1000, 1000)(rng_));
            case 1:
                return Term::integer(std::uniform_int_distribution<std::int64_t>(
                    std::numeric_limits<std::int64_t>::min() + 1,
                    std::numeric_limits<std::int64_t>::max())(rng_));
            case 2:
                return Term::decimal(std::uniform_real_distribution<double>(-500, 500)(rng_));
            default: {
                double mant = std::uniform_real_distribution<double>(1, 10)(rng_);
                int exp = std::uniform_int_distribution<int>(-30, 30)(rng_);
                return Term::decimal((coin(rng_) ? -1 : 1) * mant * std::pow(10.0, exp));
            }
        }
    }

    std::string atom_name() {
        static const char* first = "abcxyz_";
        static const char* rest = "abcXYZ019_";
        std::string s(1, first[pick(rng_, 7)]);
        for (std::size_t n = pick(rng_, 6); n > 0; --n) s += rest[pick(rng_, 10)];
        return s;
    }

    std::string var_name() {
        static const char* first = "ABXYZ";
        static const char* rest = "abXY01_";
        std::string s(1, first[pick(rng_, 5)]);
        for (std::size_t n = pick(rng_, 4); n > 0; --n) s += rest[pick(rng_, 7)];
        return s;
    }

    std::string string_value() {
        static const char* chars = "ab Z9,()[]:\"\\\n\t\r%&";
        std::string s;
        for (std::size_t n = pick(rng_, 8); n > 0; --n) s += chars[pick(rng_, 19)];
        return s;
    }

    Rng& rng() { return rng_; }

private:
    Rng rng_;
};

/// Small-universe generator for matching and join tests: at most four atoms,
/// three numbers and three variables.
class SmallUniverse {
public:
    explicit SmallUniverse(std::uint64_t seed) : rng_(seed) {}

    Term constant() {
        static const Term consts[] = {Term::atom("a"), Term::atom("b"), Term::atom("c"),
                                      Term::atom("d"), Term::integer(1), Term::integer(2),
                                      Term::decimal(2.5)};
        return consts[pick(rng_, 7)];
    }

    Term variable() {
        static const char* names[] = {"X", "Y", "Z"};
        return Term::var(names[pick(rng_, 3)]);
    }

    Term ground(int depth = 2) {
        if (depth == 0 || coin(rng_, 0.55)) return constant();
        if (coin(rng_, 0.2)) {
            std::vector<Term> items;
            for (std::size_t n = pick(rng_, 3); n > 0; --n) items.push_back(ground(depth - 1));
            return Term::list(std::move(items));
        }
        static const char* functors[] = {"f", "g", "p"};
        std::vector<Term> args;
        for (std::size_t n = 1 + pick(rng_, 3); n > 0; --n) args.push_back(ground(depth - 1));
        return Term::compound(functors[pick(rng_, 3)], std::move(args));
    }

    /// Punches variables into a copy of `g`, so that matches are common.
    Term generalise(const Term& g, double p = 0.3) {
        if (coin(rng_, p)) return variable();
        if (g.is_compound() || g.is_list()) {
            std::vector<Term> kids;
            for (const Term& k : g.args()) kids.push_back(generalise(k, p));
            return g.is_list() ? Term::list(std::move(kids))
                               : Term::compound(g.name(), std::move(kids));
        }
        return g;
    }

    Term query(int depth = 2) {
        if (depth == 0 || coin(rng_, 0.5)) return coin(rng_, 0.4) ? variable() : constant();
        if (coin(rng_, 0.2)) {
            std::vector<Term> items;
            for (std::size_t n = pick(rng_, 3); n > 0; --n) items.push_back(query(depth - 1));
            return Term::list(std::move(items));
        }
        static const char* functors[] = {"f", "g", "p"};
        std::vector<Term> args;
        for (std::size_t n = 1 + pick(rng_, 3); n > 0; --n) args.push_back(query(depth - 1));
        return Term::compound(functors[pick(rng_, 3)], std::move(args));
    }

    Rng& rng() { return rng_; }

private:
    Rng rng_;
};

inline void collect_subterms(const Term& t, std::vector<Term>& out) {
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    for (const Term& k : t.args()) collect_subterms(k, out);
}

/// Every assignment of `vars` to values drawn from `universe`, in
/// lexicographic order of universe indices. Stops early if `visit` returns
/// false.
inline void for_each_assignment(const std::vector<std::string>& vars,
                                const std::vector<Term>& universe, const Bindings& fixed,
                                const std::function<bool(const Bindings&)>& visit) {
    std::vector<std::string> free;
    for (const auto& v : vars) {
        if (!fixed.contains(v)) free.push_back(v);
    }
    if (!free.empty() && universe.empty()) return;
    std::vector<std::size_t> idx(free.size(), 0);
    while (true) {
        Bindings b = fixed;
        for (std::size_t i = 0; i < free.size(); ++i) b.bind(free[i], universe[idx[i]]);
        if (!visit(b)) return;
        std::size_t i = 0;
        for (; i < idx.size(); ++i) {
            if (++idx[i] < universe.size()) break;
            idx[i] = 0;
        }
        if (i == idx.size()) return;
    }
}

/// Brute-force matcher: search the assignments of the query's free
/// variables over the subterms of `ground`.
inline std::optional<Bindings> brute_force_match(const Term& query, const Term& ground,
                                                 const Bindings& b) {
    std::set<std::string> vs;
    collect_vars(query, vs);
    std::vector<std::string> vars(vs.begin(), vs.end());
    std::vector<Term> universe;
    collect_subterms(ground, universe);
    std::optional<Bindings> found;
    for_each_assignment(vars, universe, b, [&](const Bindings& cand) {
        if (substitute(query, cand) == ground) {
            found = cand;
            return false;
        }
        return true;
    });
    return found;
}

}  // namespace teleo::testing
