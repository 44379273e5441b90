#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "support/corpus.hpp"
#include "teleo/errors.hpp"
#include "teleo/program.hpp"
#include "teleo/types.hpp"

using namespace teleo;
using teleo::testing::read_corpus;

namespace {

TypeHierarchy hierarchy_of(const char* source) {
    return TypeHierarchy::build(parse_program(source).type_defs);
}

const char* kPlants = R"(
legume ::= haricotverts | cannellini | azuki | pea
tuber ::= potato | yam
plant ::= legume || tuber
thing ::= box | shoe | cat
age ::= (0 .. 120)
small ::= (-2 .. 3)
count ::= small || nat
)";

bool has_parent(const TypeHierarchy& h, const char* t, const char* parent) {
    auto ps = h.parents(t);
    return std::find(ps.begin(), ps.end(), parent) != ps.end();
}

}  // namespace

TEST_CASE("built-in hierarchy") {
    TypeHierarchy h = TypeHierarchy::build({});
    CHECK(h.is_subtype("nat", "int"));
    CHECK(h.is_subtype("nat", "atomic"));
    CHECK(h.is_subtype("int", "num"));
    CHECK(h.is_subtype("atom", "atomic"));
    CHECK(h.is_subtype("string", "atomic"));
    CHECK_FALSE(h.is_subtype("num", "int"));
    CHECK_FALSE(h.is_subtype("atom", "num"));
    CHECK(h.type_names().size() == 6);
}

TEST_CASE("user types attach where expected") {
    TypeHierarchy h = hierarchy_of(kPlants);
    CHECK(has_parent(h, "legume", "atom"));
    CHECK(has_parent(h, "legume", "plant"));
    CHECK(has_parent(h, "tuber", "plant"));
    CHECK(has_parent(h, "plant", "atom"));
    CHECK(h.is_subtype("legume", "plant"));
    CHECK(h.is_subtype("plant", "atomic"));
    CHECK(has_parent(h, "age", "int"));
    CHECK(h.is_subtype("age", "num"));
    CHECK_FALSE(h.is_subtype("age", "nat"));
    CHECK(has_parent(h, "count", "int"));
}

TEST_CASE("hierarchy build errors") {
    CHECK_THROWS_AS(hierarchy_of("plant ::= legume || tuber"), UndefinedType);
    TypeDef a{"t", AtomDisjunction{{"x"}}, {}};
    CHECK_THROWS_AS(TypeHierarchy::build({a, a}), DuplicateDefinition);
    TypeDef nat{"nat", AtomDisjunction{{"x"}}, {}};
    CHECK_THROWS_AS(TypeHierarchy::build({nat}), DuplicateDefinition);
}

TEST_CASE("check_type examples") {
    TypeHierarchy h = hierarchy_of(kPlants);
    CHECK(check_type(Term::atom("cat"), "thing", h));
    CHECK_FALSE(check_type(Term::atom("dog"), "thing", h));
    CHECK(check_type(Term::integer(120), "age", h));
    CHECK_FALSE(check_type(Term::integer(121), "age", h));
    CHECK_FALSE(check_type(Term::integer(-1), "age", h));
    CHECK(check_type(Term::integer(0), "age", h));
    CHECK(check_type(Term::var("X"), "age", h));
    CHECK(check_type(Term::integer(18), "num", h));
    CHECK(check_type(Term::decimal(18.5), "num", h));
    CHECK_FALSE(check_type(Term::decimal(18.0), "int", h));
    CHECK_FALSE(check_type(Term::integer(-1), "nat", h));
    CHECK(check_type(Term::string("s"), "atomic", h));
    CHECK_FALSE(check_type(parse_term("f(a)"), "atomic", h));
    CHECK_THROWS_AS(check_type(Term::atom("a"), "nope", h), UndefinedType);
}

TEST_CASE("check_type agrees with enumerated membership and is monotone") {
    TypeHierarchy h = hierarchy_of(kPlants);
    std::vector<Term> universe;
    for (const char* a : {"haricotverts", "cannellini", "azuki", "pea", "potato", "yam", "box",
                          "shoe", "cat", "dog"}) {
        universe.push_back(Term::atom(a));
    }
    for (int i = -4; i <= 125; ++i) universe.push_back(Term::integer(i));
    universe.push_back(Term::decimal(1.5));
    universe.push_back(Term::decimal(3.0));
    universe.push_back(Term::string("pea"));
    universe.push_back(parse_term("f(pea)"));
    universe.push_back(Term::list({}));

    // Membership sets written out by hand from the definitions.
    auto atoms = [](std::initializer_list<const char*> xs) {
        std::set<std::string> s(xs.begin(), xs.end());
        return [s](const Term& t) { return t.is_atom() && s.count(t.name()); };
    };
    auto int_between = [](std::int64_t lo, std::int64_t hi) {
        return [=](const Term& t) {
            return t.is_number() && t.number_value().is_integer() &&
                   t.number_value().as_integer() >= lo && t.number_value().as_integer() <= hi;
        };
    };
    auto is_int = [](const Term& t) { return t.is_number() && t.number_value().is_integer(); };
    std::map<std::string, std::function<bool(const Term&)>> oracle{
        {"legume", atoms({"haricotverts", "cannellini", "azuki", "pea"})},
        {"tuber", atoms({"potato", "yam"})},
        {"plant", atoms({"haricotverts", "cannellini", "azuki", "pea", "potato", "yam"})},
        {"thing", atoms({"box", "shoe", "cat"})},
        {"age", int_between(0, 120)},
        {"small", int_between(-2, 3)},
        {"count", [=](const Term& t) { return is_int(t) && t.number_value().as_integer() >= -2; }},
        {"nat", [=](const Term& t) { return is_int(t) && t.number_value().as_integer() >= 0; }},
        {"int", is_int},
        {"num", [](const Term& t) { return t.is_number(); }},
        {"atom", [](const Term& t) { return t.is_atom(); }},
        {"string", [](const Term& t) { return t.is_string(); }},
        {"atomic", [](const Term& t) { return t.is_atom() || t.is_number() || t.is_string(); }},
    };

    for (const auto& [type, member] : oracle) {
        for (const Term& v : universe) {
            CAPTURE(type);
            CAPTURE(format_term(v));
            bool got = check_type(v, type, h);
            CHECK(got == member(v));
            if (!got) continue;
            for (const auto& [super, unused] : oracle) {
                if (h.is_subtype(type, super)) CHECK(check_type(v, super, h));
            }
        }
    }
}

TEST_CASE("well-typed corpus programs have no diagnostics") {
    for (const char* file :
         {"face_thing.tr", "face_light.tr", "thermostat_task.tr", "regulate_temperature.tr",
          "thermostat_behaviour.tr", "proc1.tr", "proc2.tr", "proc3.tr", "proc4.tr",
          "dependent_proc1.tr"}) {
        CAPTURE(file);
        auto diags = check_program(parse_program(read_corpus(file)));
        for (const auto& d : diags) MESSAGE(d.render(file));
        CHECK(diags.empty());
    }
}

TEST_CASE("dog program has exactly one type diagnostic") {
    auto diags = check_program(parse_program(read_corpus("dog.tr")));
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].message.find("dog") != std::string::npos);
    CHECK(diags[0].loc.line == 13);
    CHECK(diags[0].render("dog.tr").rfind("dog.tr:13:1: error: ", 0) == 0);
}

namespace {

std::vector<Diagnostic> diagnose(const std::string& rules, const std::string& extra = "") {
    std::string src = R"(
direction ::= left | right
percept see : (atom, direction, num), level : (num), flag : ()
belief seen : (atom)
durative turn : (direction), go : ()
discrete beep : (nat)
helper : (num) ~>
helper(N){ true ~> go }
)" + extra + "t : () ~>\nt(){\n" + rules + "\n}\n";
    return check_program(parse_program(src));
}

}  // namespace

TEST_CASE("rule-level diagnostics") {
    CHECK(diagnose("see(a, left, D) ~> turn(left)").empty());
    CHECK(diagnose("see(a, Dir, D) & D > 3 ~> turn(Dir), beep(2)").empty());
    CHECK(diagnose("see(a, Dir, D) ~> helper(D)").empty());
    CHECK(diagnose("see(T, Dir, D) ~> remember(seen(T))").empty());
    CHECK(diagnose("not flag ~> forget(seen(x))").empty());

    auto unbound = diagnose("true ~> turn(Dir)");
    REQUIRE(unbound.size() == 1);
    CHECK(unbound[0].message.find("unbound RHS variable Dir") != std::string::npos);
    CHECK(diagnose("not see(a, Dir, 1) ~> turn(Dir)").size() == 1);  // negation binds nothing

    CHECK(diagnose("X > 3 ~> go").size() == 1);                      // comparison unbound
    CHECK(diagnose("see(T, Dir, D) & T > 3 ~> go").size() == 1);     // non-numeric comparison
    CHECK(diagnose("see(a, up, 1) ~> go").size() == 1);              // bad atom
    CHECK(diagnose("see(a, left) ~> go").size() == 1);               // arity
    CHECK(diagnose("nothing ~> go").size() == 1);                    // undeclared query
    CHECK(diagnose("go ~> go").size() == 1);                         // action used as query
    CHECK(diagnose("true ~> fly").size() == 1);                      // undeclared action
    CHECK(diagnose("true ~> flag").size() == 1);                     // percept used as action
    CHECK(diagnose("true ~> beep(-1)").size() == 1);                 // nat
    CHECK(diagnose("true ~> helper(1), go").size() == 1);            // call not alone
    CHECK(diagnose("true ~> remember(flag)").size() == 1);           // not a belief
    CHECK(diagnose("true ~> remember(seen(1))").size() == 1);        // belief arg type
    CHECK(diagnose("see(a, D, X) ~> turn(X)").size() == 1);          // num where direction
    CHECK(diagnose("true ~> go", "undefined_sig : (widget) ~>\n").size() == 2);
}
