#include "doctest.h"
#include "helpers.hpp"
#include "rescq/resilience.hpp"

using namespace rescq;
using namespace testing;

namespace {

std::set<std::string> names(const Database& d, const std::vector<TupleId>& ts) {
    std::set<std::string> out;
    for (TupleId t : ts) out.insert(d.tuple_string(t));
    return out;
}

}  // namespace

TEST_CASE("worked example, set semantics") {
    Query sj = q(k2SJ);
    Database d = db(sj, {"R(1,1)", "R(2,3)", "R(3,4)"});
    auto r = resilience_ilp(sj, d);
    CHECK(r.value == 2);
    CHECK(destroys_query(sj, d, r.contingency));
    CHECK(names(d, r.contingency).count("R(1,1)") == 1);
    auto model = build_res_model(sj, d, compute_witnesses(sj, d));
    CHECK(model.model.vars.size() == 3);
    CHECK(model.model.cons.size() == 2);
}

TEST_CASE("worked example, bag semantics") {
    Query sj = q(k2SJ);
    Database d = db(sj, {"R(1,1)", "R(2,3)x2", "R(3,4)"}, Semantics::bag);
    auto r = resilience_ilp(sj, d);
    CHECK(r.value == 2);
    CHECK(names(d, r.contingency) == std::set<std::string>{"R(1,1)", "R(3,4)"});
    CHECK(contingency_weight(d, r.contingency) == 2);
}

TEST_CASE("query false gives zero") {
    Query q2 = q(kQ2);
    Database d = db(q2, {"R(1,2)", "S(3,4)"});
    CHECK(resilience_ilp(q2, d).value == 0);
    CHECK(resilience_lp(q2, d).value == 0);
    CHECK(brute_force_resilience(q2, d).value == 0);
}

TEST_CASE("a witness of only exogenous tuples is unavoidable") {
    Query a = q("q :- *A(x), R(x,y).");
    Database d = db(a, {"A(1)", "R(1,2)*"});
    CHECK_THROWS_AS(resilience_ilp(a, d), Error);
}

TEST_CASE("exogenous tuples are never deleted") {
    Query q2 = q(kQ2);
    Database d = db(q2, {"R(1,1)*", "S(1,1)", "S(1,2)"});
    auto r = resilience_ilp(q2, d);
    CHECK(r.value == 2);
    CHECK(names(d, r.contingency) == std::set<std::string>{"S(1,1)", "S(1,2)"});
}

TEST_CASE("superset rows are dropped by presolve without changing the value") {
    Query q2 = q(kQ2);
    Database d = db(q2, {"R(1,1)*", "S(1,1)", "R(2,1)", "S(1,3)"});
    WitnessSet ws = compute_witnesses(q2, d);
    auto full = build_res_model(q2, d, ws, false);
    auto lean = build_res_model(q2, d, ws, true);
    CHECK(lean.model.cons.size() <= full.model.cons.size());
    CHECK(solve_milp(lean.model).objective == doctest::Approx(solve_milp(full.model).objective));
}

TEST_CASE("ILP equals brute force on random instances") {
    std::mt19937_64 rng(42);
    int checked = 0;
    for (const char* text : {kQ2, kQ3, kTri, kATri, k3Star, k2SJ}) {
        Query query = q(text);
        for (Semantics s : {Semantics::set, Semantics::bag}) {
            for (int i = 0; i < 12; ++i) {
                Database d = random_db(query, rng, s, 3, 3 + i % 3);
                if (endogenous_count(query, d) > 18) continue;
                auto ilp = resilience_ilp(query, d);
                auto brute = brute_force_resilience(query, d);
                CAPTURE(text);
                CHECK(ilp.value == doctest::Approx(brute.value));
                CHECK(destroys_query(query, d, ilp.contingency));
                CHECK(contingency_weight(d, ilp.contingency) == doctest::Approx(ilp.value));
                CHECK(resilience_lp(query, d).value <= ilp.value + 1e-6);
                ++checked;
            }
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("LP equals ILP on a linear query") {
    std::mt19937_64 rng(8);
    Query query = q(kQ3);
    for (int i = 0; i < 30; ++i) {
        Database d = random_db(query, rng, i % 2 ? Semantics::bag : Semantics::set, 4, 6);
        auto lp = resilience_lp(query, d);
        CHECK(lp.value == doctest::Approx(resilience_ilp(query, d).value));
    }
}

TEST_CASE("brute force respects its cap") {
    std::mt19937_64 rng(1);
    Query q2 = q(kQ2);
    Database d = random_db(q2, rng, Semantics::set, 6, 15);
    CHECK_THROWS_AS(brute_force_resilience(q2, d, 5), Error);
}
