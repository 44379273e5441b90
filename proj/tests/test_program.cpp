#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "support/corpus.hpp"
#include "teleo/errors.hpp"
#include "teleo/program.hpp"

using namespace teleo;
using teleo::testing::read_corpus;

TEST_CASE("thermostat program structure") {
    Program p = parse_program(read_corpus("thermostat_task.tr"));
    REQUIRE(p.declarations.size() == 3);
    CHECK(p.declarations[0].kind == DeclKind::Discrete);
    CHECK(p.declarations[1].kind == DeclKind::Discrete);
    const Declaration* cold = p.find_declaration("is_too_cold");
    REQUIRE(cold);
    CHECK(cold->kind == DeclKind::Percept);
    CHECK(cold->arg_types.empty());
    REQUIRE(p.procedures.size() == 1);
    const Procedure& proc = p.procedures.at("thermostat_task");
    REQUIRE(proc.rules.size() == 2);
    CHECK(proc.rules[0].guard == Conjunction{Condition::make_query(Term::atom("is_too_cold"))});
    CHECK(proc.rules[1].guard == Conjunction{Condition::make_true()});
    CHECK(proc.rules[1].actions == std::vector<Term>{Term::atom("turn_off_heating")});
}

TEST_CASE("one-rule do-nothing procedure") {
    Program p = parse_program("proc1 : () ~> proc1(){ true ~> () }");
    const Procedure& proc = p.procedures.at("proc1");
    REQUIRE(proc.rules.size() == 1);
    CHECK(proc.rules[0].actions.empty());
    CHECK_FALSE(proc.rules[0].has_continuation_clauses());
    CHECK(rule_action_kind(proc.rules[0], p) == ActionKind::ActionTuple);
}

TEST_CASE("guard structure with comparisons") {
    Program p = parse_program(read_corpus("proc3.tr"));
    const Rule& r = p.procedures.at("inner_proc").rules[0];
    REQUIRE(r.guard.size() == 2);
    CHECK(r.guard[0].kind == Condition::Kind::Query);
    CHECK(r.guard[1] == Condition::make_comparison(Expr::variable("D2"), CompareOp::Lt,
                                                    Expr::variable("D")));
    CHECK(rule_action_kind(r, p) == ActionKind::ProcCall);
    const Rule& shoot = p.procedures.at("inner_proc").rules[2];
    CHECK(rule_action_kind(shoot, p) == ActionKind::ActionTuple);
    CHECK(shoot.actions.size() == 2);
}

TEST_CASE("expression precedence") {
    Program p = parse_program(R"(
percept v : (num)
durative go : ()
t : () ~>
t(){ v(X) & 2 + 3 * X - X / 2 >= -1 ~> go }
)");
    const Condition& c = p.procedures.at("t").rules[0].guard[1];
    REQUIRE(c.kind == Condition::Kind::Comparison);
    Expr three_x = Expr::binary('*', Expr::literal(Number{std::int64_t{3}}), Expr::variable("X"));
    Expr sum = Expr::binary('+', Expr::literal(Number{std::int64_t{2}}), three_x);
    Expr half = Expr::binary('/', Expr::variable("X"), Expr::literal(Number{std::int64_t{2}}));
    CHECK(c.lhs == Expr::binary('-', sum, half));
    CHECK(c.op == CompareOp::Ge);
    CHECK(c.rhs == Expr::literal(Number{std::int64_t{-1}}));
}

TEST_CASE("while/until clauses and defaults") {
    Program p = parse_program(R"(
percept g : (), w : (), u : ()
durative a : ()
t : () ~>
t(){
  g while w min 5 until u min 1.5 ~> a
  g while min 0.1 ~> a
  g until u ~> a
  true ~> ()
}
)");
    const auto& rules = p.procedures.at("t").rules;
    CHECK(rules[0].while_cond == Conjunction{Condition::make_query(Term::atom("w"))});
    CHECK(rules[0].while_min == 5);
    CHECK(rules[0].until_cond == Conjunction{Condition::make_query(Term::atom("u"))});
    CHECK(rules[0].until_min == 1.5);
    CHECK_FALSE(rules[1].while_cond.has_value());
    CHECK(rules[1].while_min == doctest::Approx(0.1));
    CHECK_FALSE(rules[1].until_cond.has_value());
    CHECK(rules[2].while_min == 0);
    CHECK(rules[2].until_cond.has_value());
    CHECK_FALSE(rules[3].has_continuation_clauses());
}

TEST_CASE("type definitions") {
    Program p = parse_program(R"(
legume ::= haricotverts | cannellini | azuki | pea
tuber ::= potato | yam
plant ::= legume || tuber
age ::= (0 .. 120)
)");
    REQUIRE(p.type_defs.size() == 4);
    CHECK(std::get<AtomDisjunction>(p.type_defs[0].body).atoms.size() == 4);
    CHECK(std::get<TypeUnion>(p.type_defs[2].body).members ==
          std::vector<std::string>{"legume", "tuber"});
    CHECK(std::get<IntRange>(p.type_defs[3].body) == IntRange{0, 120});
    CHECK_THROWS_AS(parse_program("t ::= a | b || c"), SyntaxError);
    CHECK_THROWS_AS(parse_program("t ::= (5 .. 1)"), SyntaxError);
}

TEST_CASE("duplicate definitions") {
    CHECK_THROWS_AS(parse_program("percept p : ()\npercept p : ()"), DuplicateDefinition);
    CHECK_THROWS_AS(parse_program("p ::= a | b\npercept p : ()"), DuplicateDefinition);
    CHECK_THROWS_AS(parse_program("percept p : ()\np : () ~>"), DuplicateDefinition);
    try {
        parse_program("percept p : ()\n\npercept p : ()");
        FAIL("expected DuplicateDefinition");
    } catch (const DuplicateDefinition& e) {
        CHECK(e.name() == "p");
        CHECK(e.line() == 3);
    }
}

TEST_CASE("syntax errors carry line and column") {
    try {
        parse_program("t : () ~>\nt(){\n  true ~> \n}\n");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.line() == 4);
        CHECK(e.column() == 1);
    }
    CHECK_THROWS_AS(parse_program("t(){ true ~> () }"), SyntaxError);            // no signature
    CHECK_THROWS_AS(parse_program("t : (num) ~> t(){ true ~> () }"), SyntaxError);  // arity
    CHECK_THROWS_AS(parse_program("t : (num, num) ~> t(X, X){ true ~> () }"), SyntaxError);
    CHECK_THROWS_AS(parse_program("t : () ~> t(){ }"), SyntaxError);
    CHECK_THROWS_AS(parse_program("t : () ~> t(){ true ~> () "), SyntaxError);
}

TEST_CASE("unsupported features are reported as such") {
    for (const char* file : {"zigzag.tr", "move_forward_then_turn_left.tr", "open_the_door.tr",
                             "proc3_negated_conjunction.tr"}) {
        CAPTURE(file);
        try {
            parse_program(read_corpus(file));
            FAIL("expected UnsupportedFeature");
        } catch (const UnsupportedFeature& e) {
            CHECK(std::string(e.what()).rfind("unsupported TeleoR feature", 0) == 0);
        }
    }
    CHECK_THROWS_AS(parse_program("p(X) <= q(X)"), UnsupportedFeature);
}

TEST_CASE("corpus programs parse") {
    for (const char* file :
         {"face_thing.tr", "face_light.tr", "thermostat_task.tr", "regulate_temperature.tr",
          "thermostat_behaviour.tr", "dog.tr", "proc1.tr", "proc2.tr", "proc3.tr", "proc4.tr",
          "dependent_proc1.tr", "dependent_stack.tr"}) {
        CAPTURE(file);
        CHECK_NOTHROW(parse_program(read_corpus(file)));
    }
    Program face = parse_program(read_corpus("face_thing.tr"));
    const Rule& r = face.procedures.at("face_thing").rules[2];
    CHECK(r.guard == Conjunction{Condition::make_true()});
    Program beh = parse_program(read_corpus("thermostat_behaviour.tr"));
    CHECK(rule_action_kind(beh.procedures.at("thermostat_behaviour").rules[0], beh) ==
          ActionKind::ProcCall);
    Program stack = parse_program(read_corpus("dependent_stack.tr"));
    CHECK(stack.procedures.at("proc1").rules[2].actions == std::vector<Term>{Term::atom("proc2")});
}

TEST_CASE("printer output re-parses to an equal AST") {
    for (const char* file :
         {"face_thing.tr", "face_light.tr", "thermostat_task.tr", "regulate_temperature.tr",
          "thermostat_behaviour.tr", "dog.tr", "proc1.tr", "proc2.tr", "proc3.tr", "proc4.tr",
          "dependent_proc1.tr", "dependent_stack.tr"}) {
        CAPTURE(file);
        Program p = parse_program(read_corpus(file));
        std::string text = format_program(p);
        CAPTURE(text);
        CHECK(parse_program(text) == p);
    }
    Program p = parse_program(R"(
age ::= (0 .. 120)
percept g : (num), w : ()
belief seen : (num)
durative a : ()
t : (num) ~>
t(L){
  g(X) & not w & (X + 1) * 2 > L - 3 while w min 5 until not w min 1.5 ~> a, remember(seen(X))
  true ~> forget(seen(3))
}
)");
    CHECK(parse_program(format_program(p)) == p);
}

TEST_CASE("parser is total on mutated input") {
    std::string base = read_corpus("proc3.tr") + read_corpus("thermostat_behaviour.tr");
    std::mt19937 rng(3);
    const std::string alphabet = "(){}[],&~>:=|.%\"-+*/<> \nabXY019_";
    int parsed = 0;
    for (int i = 0; i < 3000; ++i) {
        std::string s = base;
        int edits = 1 + static_cast<int>(rng() % 4);
        for (int e = 0; e < edits && !s.empty(); ++e) {
            std::size_t at = rng() % s.size();
            switch (rng() % 3) {
                case 0: s.erase(at, 1 + rng() % 6); break;
                case 1: s.insert(at, 1, alphabet[rng() % alphabet.size()]); break;
                default: s[at] = static_cast<char>(rng() % 256); break;
            }
        }
        try {
            parse_program(s);
            ++parsed;
        } catch (const SyntaxError&) {
        }
    }
    CHECK(parsed > 0);
}
