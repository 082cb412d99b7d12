#include "doctest.h"
#include "helpers.hpp"
#include "rescq/approx.hpp"
#include "rescq/resilience.hpp"
#include "rescq/responsibility.hpp"

using namespace rescq;
using namespace testing;

TEST_CASE("triangle example: both flow linearizations find the optimum") {
    Query tri = q(kTri);
    Database d = db(tri, {"R(1,1)", "R(2,1)", "S(1,1)", "S(1,2)", "T(1,1)", "T(2,1)", "T(2,2)"});
    REQUIRE(compute_witnesses(tri, d).size() == 3);
    auto ct = flow_ct_res(tri, d);
    auto cw = flow_cw_res(tri, d);
    CHECK(ct.value == 2);
    CHECK(cw.value == 2);
    CHECK(ct.per_linearization.size() == 3);
    CHECK(cw.per_linearization.size() == 3);
    CHECK(resilience_ilp(tri, d).value == 2);
}

TEST_CASE("approximations bound the ILP on hard queries") {
    std::mt19937_64 rng(37);
    for (const char* text : {kTri, k3Star}) {
        Query query = q(text);
        const double m = static_cast<double>(query.size());
        for (int i = 0; i < 25; ++i) {
            Database d = random_db(query, rng, i % 2 ? Semantics::bag : Semantics::set, 3, 4 + i % 5);
            if (!query_holds(query, d)) continue;
            const double ilp = resilience_ilp(query, d).value;
            auto round = lp_rounding_res(query, d);
            REQUIRE(round.lp_bound.has_value());
            CHECK(destroys_query(query, d, round.contingency));
            CHECK(round.value >= ilp - 1e-6);
            CHECK(round.value <= m * *round.lp_bound + 1e-6);
            CHECK(flow_ct_res(query, d).value >= ilp - 1e-6);
            CHECK(flow_cw_res(query, d).value >= ilp - 1e-6);
        }
    }
}

TEST_CASE("approximations are exact on a linear query") {
    std::mt19937_64 rng(41);
    Query query = q(kQ3);
    for (int i = 0; i < 20; ++i) {
        Database d = random_db(query, rng, Semantics::set, 4, 6);
        const double ilp = resilience_ilp(query, d).value;
        CHECK(lp_rounding_res(query, d).value == doctest::Approx(ilp));
        CHECK(flow_ct_res(query, d).value == doctest::Approx(ilp));
        CHECK(flow_cw_res(query, d).value == doctest::Approx(ilp));
    }
}

TEST_CASE("responsibility approximations are feasible upper bounds") {
    std::mt19937_64 rng(43);
    Query tri = q(kTri);
    int checked = 0;
    for (int i = 0; i < 20; ++i) {
        Database d = random_db(tri, rng, Semantics::set, 3, 5);
        WitnessSet ws = compute_witnesses(tri, d);
        for (TupleId t = 0; t < d.tuple_count(); ++t) {
            if (ws.containing(t).empty()) continue;
            auto ilp = responsibility_ilp(tri, d, t);
            if (!ilp.counterfactualizable) continue;
            auto round = lp_rounding_rsp(tri, d, t);
            REQUIRE(round.counterfactualizable);
            CHECK(is_counterfactual(tri, d, round.contingency, {t}));
            CHECK(round.value >= ilp.value - 1e-6);
            CHECK(flow_ct_rsp(tri, d, t).value >= ilp.value - 1e-6);
            auto cw = flow_cw_rsp(tri, d, t);
            if (cw.counterfactualizable) CHECK(cw.value >= ilp.value - 1e-6);
            ++checked;
        }
    }
    CHECK(checked > 20);
}

TEST_CASE("Flow-CT respects its atom cap") {
    Query big = q("q :- A(x), B(x), C(x), D(x), E(x), F(x), G(x), H(x).");
    Database d = db(big, {"A(1)", "B(1)", "C(1)", "D(1)", "E(1)", "F(1)", "G(1)", "H(1)"});
    CHECK_THROWS_AS(flow_ct_res(big, d), Error);
    CHECK(flow_ct_res(big, d, 8).value == 1);
}
