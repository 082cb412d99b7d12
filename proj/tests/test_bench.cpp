#include "doctest.h"
#include "helpers.hpp"
#include "rescq/bench.hpp"

#include <cmath>
#include <sstream>

using namespace rescq;
using namespace testing;

TEST_CASE("generator is deterministic and samples without replacement") {
    Query q3 = q(kQ3);
    Database a = generate_instance(q3, 10, 40, Semantics::set, 4, 99);
    Database b = generate_instance(q3, 10, 40, Semantics::set, 4, 99);
    Database c = generate_instance(q3, 10, 40, Semantics::set, 4, 100);
    CHECK(a.same_content(b));
    CHECK_FALSE(a.same_content(c));
    for (const auto& rel : q3.relations()) CHECK(a.relation_tuples(a.relation_id(rel)).size() == 40);
    CHECK(a.tuple_count() == 120);
}

TEST_CASE("bag multiplicities stay in range") {
    Database d = generate_instance(q(kQ2), 6, 30, Semantics::bag, 4, 5);
    for (TupleId t = 0; t < d.tuple_count(); ++t) {
        CHECK(d.tuple(t).mult >= 1);
        CHECK(d.tuple(t).mult <= 3);
    }
    CHECK_THROWS_AS(generate_instance(q(kQ2), 6, 30, Semantics::bag, 1, 5), Error);
    CHECK_THROWS_AS(generate_instance(q(kQ2), 3, 10, Semantics::set, 4, 5), Error);
    CHECK(generate_instance(q(kQ2), 3, 9, Semantics::set, 4, 5).tuple_count() == 18);
}

TEST_CASE("config parsing") {
    auto cfg = parse_bench_config(
        "# sweep on the chain\nquery_text = q :- R(x,y), S(y,z).\ndomain = 50\nsweep = 10, 1000, 3\n"
        "methods = ilp, lp, flow\nseed = 7\nsemantics = bag\nmax_bag = 3\n");
    CHECK(cfg.domain == 50);
    CHECK(cfg.sizes == std::vector<long>{10, 100, 1000});
    CHECK(cfg.methods.size() == 3);
    CHECK(cfg.seed == 7);
    CHECK(cfg.semantics == Semantics::bag);
    CHECK_THROWS_AS(parse_bench_config("domain = 5\nsizes = 1\n"), Error);
    CHECK_THROWS_AS(parse_bench_config("query_text = q :- R(x).\nsizes = 1\nmethods = simplex\n"), Error);
    CHECK_THROWS_AS(parse_bench_config("query_text = q :- R(x).\nsizes = a\n"), Error);
    CHECK_THROWS_AS(parse_bench_config("query_text = q :- R(x).\nsizes = 1\ncolour = red\n"), Error);
    CHECK_THROWS_AS(parse_bench_config("query_text = q :- R(x).\nsizes = 1\nproblem = rsp\ntuple_relation = Z\n"),
                    Error);
    auto file = parse_bench_config("query = queries/q2_chain.cq\nsizes = 5\n", DATA_DIR);
    CHECK(file.query.size() == 2);
}

TEST_CASE("log sweep") {
    CHECK(log_sweep(1, 1, 1) == std::vector<long>{1});
    auto s = log_sweep(100, 100000, 4);
    CHECK(s == std::vector<long>{100, 1000, 10000, 100000});
    CHECK(log_sweep(1, 3, 10) == std::vector<long>{1, 2, 3});
    CHECK_THROWS_AS(log_sweep(0, 5, 2), Error);
}

TEST_CASE("small benchmark: exact methods agree on a linear query") {
    BenchConfig cfg;
    cfg.query = q(kQ2);
    cfg.domain = 20;
    cfg.sizes = {20, 60};
    cfg.methods = {"ilp", "lp", "flow", "ilp-cutoff"};
    cfg.cutoff = 5.0;
    auto rows = run_benchmark(cfg);
    REQUIRE(rows.size() == 8);
    for (std::size_t i = 0; i < rows.size(); i += 4) {
        CHECK(rows[i].status == "ok");
        CHECK(rows[i + 1].value == doctest::Approx(rows[i].value));
        CHECK(rows[i + 2].value == doctest::Approx(rows[i].value));
        CHECK(rows[i + 3].method == "ilp(5)");
    }
    std::ostringstream csv;
    write_bench_csv(csv, rows);
    CHECK(csv.str().rfind("run,size,witnesses,method,value,build_s,solve_s,status\n", 0) == 0);

    cfg.problem = Problem::rsp;
    cfg.tuple_relation = "S";
    cfg.methods = {"ilp", "milp", "flow"};
    for (const auto& r : run_benchmark(cfg)) CHECK((r.status == "ok" || r.status == "no-target"));
}

TEST_CASE("slope and buckets") {
    std::vector<BenchRow> rows;
    for (int i = 1; i <= 6; ++i) {
        BenchRow r;
        r.method = "lp";
        r.witnesses = static_cast<std::size_t>(100 * (1 << i));
        r.solve_s = 1e-6 * std::pow(static_cast<double>(r.witnesses), 1.5);
        r.status = "ok";
        rows.push_back(r);
    }
    CHECK(loglog_slope(rows, "lp") == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(std::isnan(loglog_slope(rows, "ilp")));
    std::ostringstream os;
    write_bucket_csv(os, rows);
    CHECK(os.str().find("lp,256,511,1,") != std::string::npos);
}
