#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rescq/analysis.hpp"
#include "rescq/model.hpp"

namespace rescq {

struct BenchConfig {
    Query query;
    int domain = 100;
    std::vector<long> sizes;  // tuples per relation, one run each
    std::vector<std::string> methods{"ilp", "lp"};
    std::uint64_t seed = 1;
    double cutoff = 10.0;  // time limit for the "ilp-cutoff" method
    Semantics semantics = Semantics::set;
    int max_bag = 5;
    Problem problem = Problem::res;
    std::string tuple_relation;  // responsibility target relation
    bool parallel = false;
};

// key = value lines; '#' starts a comment. Relative query paths resolve against base_dir.
BenchConfig parse_bench_config(const std::string& text, const std::string& base_dir = ".");
BenchConfig load_bench_config(const std::string& path);

// count sizes spaced evenly in log scale from lo to hi, rounded and deduplicated
std::vector<long> log_sweep(long lo, long hi, int count);

struct BenchRow {
    int run = 0;
    long size = 0;
    std::size_t witnesses = 0;
    std::string method;
    double value = 0.0;
    double build_s = 0.0;
    double solve_s = 0.0;
    std::string status;
};

std::vector<BenchRow> run_benchmark(const BenchConfig& cfg);

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows);

// median solve time per method and power-of-two witness bucket
void write_bucket_csv(std::ostream& os, const std::vector<BenchRow>& rows);

// least-squares slope of log(solve_s) against log(witnesses) for one method; NaN with < 2 usable points
double loglog_slope(const std::vector<BenchRow>& rows, const std::string& method, double min_seconds = 1e-5);

}  // namespace rescq
