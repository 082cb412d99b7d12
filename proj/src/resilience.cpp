#include "rescq/resilience.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>

namespace rescq {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// drops duplicate rows and rows that contain another row
std::vector<std::vector<TupleId>> reduce_rows(std::vector<std::vector<TupleId>> rows, std::size_t ntuples) {
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    std::vector<std::vector<int>> by_tuple(ntuples);
    std::vector<int> hits(rows.size(), 0);
    std::vector<int> touched;
    std::vector<char> keep(rows.size(), 1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        touched.clear();
        bool dominated = false;
        for (TupleId t : rows[i])
            for (int j : by_tuple[t]) {
                if (hits[j]++ == 0) touched.push_back(j);
                if (hits[j] == static_cast<int>(rows[j].size())) dominated = true;
            }
        for (int j : touched) hits[j] = 0;
        if (dominated) {
            keep[i] = 0;
            continue;
        }
        for (TupleId t : rows[i]) by_tuple[t].push_back(static_cast<int>(i));
    }
    std::vector<std::vector<TupleId>> out;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (keep[i]) out.push_back(std::move(rows[i]));
    return out;
}

}  // namespace

double contingency_weight(const Database& d, const std::vector<TupleId>& ts) {
    double w = 0;
    for (TupleId t : ts) w += static_cast<double>(d.tuple(t).mult);
    return w;
}

bool destroys_query(const Query& q, const Database& d, const std::vector<TupleId>& ts) {
    return !query_holds(q, d.without(ts));
}

ResModel build_res_model(const Query& q, const Database& d, const WitnessSet& ws, bool presolve) {
    const auto exo = exogenous_mask(q, d);
    ResModel rm;
    std::vector<std::vector<TupleId>> rows;
    rows.reserve(ws.size());
    for (const auto& w : ws.witnesses) {
        auto row = endogenous_tuples(w, exo);
        if (row.empty()) {
            std::string s;
            for (TupleId t : w.tuples) s += (s.empty() ? "" : ", ") + d.tuple_string(t);
            throw Error("unavoidable", "unavoidable witness {" + s + "}: every tuple is exogenous");
        }
        rows.push_back(std::move(row));
    }
    std::vector<int> var_of(d.tuple_count(), -1);
    for (const auto& row : rows)
        for (TupleId t : row)
            if (var_of[t] < 0) var_of[t] = 0;
    for (TupleId t = 0; t < d.tuple_count(); ++t)
        if (var_of[t] == 0) {
            var_of[t] = rm.model.add_var("X[" + d.tuple_string(t) + "]", 0, 1, true,
                                         static_cast<double>(d.tuple(t).mult));
            rm.var_tuple.push_back(t);
        }
    if (presolve) {
        rows = reduce_rows(std::move(rows), d.tuple_count());
    } else {
        std::sort(rows.begin(), rows.end());
        rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    }
    for (const auto& row : rows) {
        std::vector<std::pair<int, double>> terms;
        for (TupleId t : row) terms.emplace_back(var_of[t], 1.0);
        rm.model.add_constraint(std::move(terms), Sense::ge, 1.0);
    }
    rm.rows = std::move(rows);
    return rm;
}

namespace {

ResilienceAnswer solve_res(const Query& q, const Database& d, const SolverOptions& opt, bool integral) {
    ResilienceAnswer ans;
    ans.method = integral ? "ilp" : "lp";
    const WitnessSet ws = compute_witnesses(q, d);
    if (ws.empty()) return ans;
    ResModel rm = build_res_model(q, d, ws);
    const auto t0 = Clock::now();
    SolveResult r = integral ? solve_milp(rm.model, opt) : solve_lp(rm.model, opt);
    ans.solve_seconds = seconds_since(t0);
    ans.status = r.status;
    ans.nodes = r.nodes;
    if (!r.has_solution) {
        if (r.status == SolveStatus::infeasible) throw Error("solver", "resilience model infeasible");
        throw Error("limit", "solver stopped: " + to_string(r.status));
    }
    ans.value = r.objective;
    ans.integral = integral || rm.model.all_integral(r.x, opt.tol);
    if (!integral) ans.lp_bound = r.objective;
    if (ans.integral) {
        for (std::size_t j = 0; j < r.x.size(); ++j)
            if (r.x[j] > 0.5) ans.contingency.push_back(rm.var_tuple[j]);
        if (!destroys_query(q, d, ans.contingency))
            throw Error("verify", "contingency set does not falsify the query");
        if (integral) ans.value = contingency_weight(d, ans.contingency);
    }
    return ans;
}

}  // namespace

ResilienceAnswer resilience_ilp(const Query& q, const Database& d, const SolverOptions& opt) {
    return solve_res(q, d, opt, true);
}

ResilienceAnswer resilience_lp(const Query& q, const Database& d, const SolverOptions& opt) {
    return solve_res(q, d, opt, false);
}

ResilienceAnswer brute_force_resilience(const Query& q, const Database& d, int cap) {
    ResilienceAnswer ans;
    ans.method = "brute";
    const WitnessSet ws = compute_witnesses(q, d);
    if (ws.empty()) return ans;
    const auto exo = exogenous_mask(q, d);
    std::vector<int> bit(d.tuple_count(), -1);
    std::vector<TupleId> relevant;
    std::vector<std::uint32_t> masks;
    for (const auto& w : ws.witnesses) {
        std::uint32_t m = 0;
        for (TupleId t : endogenous_tuples(w, exo)) {
            if (bit[t] < 0) {
                if (static_cast<int>(relevant.size()) >= cap)
                    throw Error("cap", "brute force limited to " + std::to_string(cap) + " endogenous tuples");
                bit[t] = static_cast<int>(relevant.size());
                relevant.push_back(t);
            }
            m |= std::uint32_t{1} << bit[t];
        }
        if (!m) throw Error("unavoidable", "unavoidable witness: every tuple is exogenous");
        masks.push_back(m);
    }
    std::sort(masks.begin(), masks.end());
    masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
    const std::uint32_t n = static_cast<std::uint32_t>(relevant.size());
    double best = -1;
    std::uint32_t best_set = 0;
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); ++s) {
        const auto set = static_cast<std::uint32_t>(s);
        double w = 0;
        for (std::uint32_t i = 0; i < n; ++i)
            if (set >> i & 1) w += static_cast<double>(d.tuple(relevant[i]).mult);
        if (best >= 0 && w >= best) continue;
        bool hits = true;
        for (auto m : masks)
            if (!(m & set)) {
                hits = false;
                break;
            }
        if (hits) {
            best = w;
            best_set = set;
        }
    }
    ans.value = best;
    for (std::uint32_t i = 0; i < n; ++i)
        if (best_set >> i & 1) ans.contingency.push_back(relevant[i]);
    return ans;
}

}  // namespace rescq
