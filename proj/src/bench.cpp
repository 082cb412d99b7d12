#include "rescq/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "rescq/approx.hpp"
#include "rescq/flow.hpp"
#include "rescq/generate.hpp"
#include "rescq/resilience.hpp"
#include "rescq/responsibility.hpp"
#include "rescq/witness.hpp"

namespace rescq {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(s);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::vector<std::string> kMethods{"ilp", "ilp-cutoff", "lp", "milp", "flow", "brute", "round", "flow-ct", "flow-cw"};

}  // namespace

std::vector<long> log_sweep(long lo, long hi, int count) {
    if (lo < 1 || hi < lo || count < 1) throw Error("usage", "bad sweep range");
    std::vector<long> out;
    for (int i = 0; i < count; ++i) {
        double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        out.push_back(std::lround(std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)))));
    }
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

BenchConfig parse_bench_config(const std::string& text, const std::string& base_dir) {
    BenchConfig cfg;
    bool have_query = false;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw Error("parse", "config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        try {
            if (key == "query") {
                std::filesystem::path p(val);
                if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
                cfg.query = load_query(p.string());
                have_query = true;
            } else if (key == "query_text") {
                cfg.query = parse_query(val);
                have_query = true;
            } else if (key == "domain") {
                cfg.domain = std::stoi(val);
            } else if (key == "sizes") {
                cfg.sizes.clear();
                for (const auto& s : split_list(val)) cfg.sizes.push_back(std::stol(s));
            } else if (key == "sweep") {
                auto parts = split_list(val);
                if (parts.size() != 3) throw Error("parse", "sweep = lo, hi, count");
                cfg.sizes = log_sweep(std::stol(parts[0]), std::stol(parts[1]), std::stoi(parts[2]));
            } else if (key == "methods") {
                cfg.methods = split_list(val);
                for (const auto& m : cfg.methods)
                    if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end())
                        throw Error("parse", "unknown method " + m);
            } else if (key == "seed") {
                cfg.seed = std::stoull(val);
            } else if (key == "cutoff") {
                cfg.cutoff = std::stod(val);
            } else if (key == "semantics") {
                cfg.semantics = parse_semantics(val);
            } else if (key == "max_bag") {
                cfg.max_bag = std::stoi(val);
            } else if (key == "problem") {
                if (val == "res") cfg.problem = Problem::res;
                else if (val == "rsp") cfg.problem = Problem::rsp;
                else throw Error("parse", "problem must be res or rsp");
            } else if (key == "tuple_relation") {
                cfg.tuple_relation = val;
            } else if (key == "parallel") {
                cfg.parallel = val == "1" || val == "true" || val == "yes";
            } else {
                throw Error("parse", "unknown config key " + key);
            }
        } catch (const std::logic_error&) {
            throw Error("parse", "config line " + std::to_string(lineno) + ": bad value for " + key);
        }
    }
    if (!have_query) throw Error("parse", "config needs a query");
    if (cfg.sizes.empty()) throw Error("parse", "config needs sizes or sweep");
    if (cfg.problem == Problem::rsp && cfg.query.atom_of_relation(cfg.tuple_relation) < 0)
        throw Error("parse", "responsibility benchmark needs tuple_relation naming a query relation");
    return cfg;
}

BenchConfig load_bench_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_bench_config(ss.str(), std::filesystem::path(path).parent_path().string());
}

namespace {

struct Outcome {
    double value = 0.0;
    double solve_s = -1.0;
    std::string status = "ok";
};

Outcome run_res(const std::string& m, const Query& q, const Database& d, double cutoff) {
    ResilienceAnswer a;
    SolverOptions opt = SolverOptions::from_env();
    if (m == "ilp") a = resilience_ilp(q, d, opt);
    else if (m == "ilp-cutoff") {
        opt.time_limit_s = cutoff;
        a = resilience_ilp(q, d, opt);
    } else if (m == "lp" || m == "milp") a = resilience_lp(q, d, opt);
    else if (m == "flow") a = resilience_via_flow(q, d);
    else if (m == "brute") a = brute_force_resilience(q, d);
    else if (m == "round") a = lp_rounding_res(q, d, opt);
    else if (m == "flow-ct") a = flow_ct_res(q, d);
    else if (m == "flow-cw") a = flow_cw_res(q, d);
    Outcome o{a.value, a.solve_seconds > 0 ? a.solve_seconds : -1.0,
              a.status == SolveStatus::optimal ? "ok" : to_string(a.status)};
    if (m == "lp" && !a.integral) o.status = "fractional";
    return o;
}

Outcome run_rsp(const std::string& m, const Query& q, const Database& d, TupleId t, double cutoff) {
    ResponsibilityAnswer a;
    SolverOptions opt = SolverOptions::from_env();
    if (m == "ilp") a = responsibility_ilp(q, d, t, opt);
    else if (m == "ilp-cutoff") {
        opt.time_limit_s = cutoff;
        a = responsibility_ilp(q, d, t, opt);
    } else if (m == "lp" || m == "milp") a = responsibility_milp(q, d, t, opt);
    else if (m == "flow") a = responsibility_via_flow(q, d, t);
    else if (m == "brute") a = brute_force_responsibility(q, d, t);
    else if (m == "round") a = lp_rounding_rsp(q, d, t, opt);
    else if (m == "flow-ct") a = flow_ct_rsp(q, d, t);
    else if (m == "flow-cw") a = flow_cw_rsp(q, d, t);
    Outcome o{a.value, a.solve_seconds > 0 ? a.solve_seconds : -1.0, a.counterfactualizable ? "ok" : "not-counterfactual"};
    return o;
}

std::vector<BenchRow> run_one(const BenchConfig& cfg, int run) {
    const long n = cfg.sizes[run];
    auto t0 = std::chrono::steady_clock::now();
    Database d = generate_instance(cfg.query, cfg.domain, n, cfg.semantics, cfg.max_bag, cfg.seed + run);
    WitnessSet ws = compute_witnesses(cfg.query, d);
    const double build = seconds(t0);

    TupleId target = 0;
    bool have_target = cfg.problem == Problem::res;
    if (!have_target) {
        const auto exo = exogenous_mask(cfg.query, d);
        for (TupleId u = 0; u < d.tuple_count() && !have_target; ++u)
            if (!exo[u] && d.relation_name(d.tuple(u).rel) == cfg.tuple_relation && !ws.containing(u).empty()) {
                target = u;
                have_target = true;
            }
    }
    std::vector<BenchRow> rows;
    for (const auto& m : cfg.methods) {
        BenchRow row;
        row.run = run;
        row.size = n;
        row.witnesses = ws.size();
        row.method = m == "ilp-cutoff" ? "ilp(" + std::to_string(static_cast<long>(cfg.cutoff)) + ")" : m;
        row.build_s = build;
        if (!have_target) {
            row.status = "no-target";
            rows.push_back(row);
            continue;
        }
        auto t1 = std::chrono::steady_clock::now();
        try {
            Outcome o = cfg.problem == Problem::res ? run_res(m, cfg.query, d, cfg.cutoff)
                                                     : run_rsp(m, cfg.query, d, target, cfg.cutoff);
            row.value = o.value;
            row.solve_s = o.solve_s >= 0 ? o.solve_s : seconds(t1);
            row.status = o.status;
        } catch (const Error& e) {
            row.solve_s = seconds(t1);
            row.status = "error:" + e.kind();
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

std::vector<BenchRow> run_benchmark(const BenchConfig& cfg) {
    const int runs = static_cast<int>(cfg.sizes.size());
    std::vector<std::vector<BenchRow>> per_run(runs);
    if (cfg.parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int r = 0; r < runs; ++r) per_run[r] = run_one(cfg, r);
    } else {
        for (int r = 0; r < runs; ++r) per_run[r] = run_one(cfg, r);
    }
    std::vector<BenchRow> out;
    for (auto& rows : per_run) out.insert(out.end(), rows.begin(), rows.end());
    return out;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
    os << "run,size,witnesses,method,value,build_s,solve_s,status\n";
    for (const auto& r : rows)
        os << r.run << ',' << r.size << ',' << r.witnesses << ',' << r.method << ',' << r.value << ',' << r.build_s
           << ',' << r.solve_s << ',' << r.status << '\n';
}

void write_bucket_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
    std::map<std::pair<std::string, int>, std::vector<double>> buckets;
    for (const auto& r : rows) {
        if (r.witnesses == 0 || r.status.rfind("error", 0) == 0) continue;
        int b = static_cast<int>(std::floor(std::log2(static_cast<double>(r.witnesses))));
        buckets[{r.method, b}].push_back(r.solve_s);
    }
    os << "method,bucket_lo,bucket_hi,runs,median_solve_s\n";
    for (auto& [key, xs] : buckets) {
        std::sort(xs.begin(), xs.end());
        const std::size_t n = xs.size();
        double med = n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
        os << key.first << ',' << (1L << key.second) << ',' << (1L << (key.second + 1)) - 1 << ',' << n << ',' << med
           << '\n';
    }
}

double loglog_slope(const std::vector<BenchRow>& rows, const std::string& method, double min_seconds) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows)
        if (r.method == method && r.witnesses > 0 && r.solve_s >= min_seconds && r.status != "no-target" &&
            r.status.rfind("error", 0) != 0)
            pts.emplace_back(std::log(static_cast<double>(r.witnesses)), std::log(r.solve_s));
    if (pts.size() < 2) return std::nan("");
    double mx = 0, my = 0;
    for (auto [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= pts.size();
    my /= pts.size();
    double sxy = 0, sxx = 0;
    for (auto [x, y] : pts) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    return sxx > 0 ? sxy / sxx : std::nan("");
}

}  // namespace rescq
