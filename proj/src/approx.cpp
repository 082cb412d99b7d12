#include "rescq/approx.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

#include "rescq/analysis.hpp"

namespace rescq {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr double kUnset = std::numeric_limits<double>::infinity();

std::vector<TupleId> round_up(const std::vector<TupleId>& var_tuple, const std::vector<double>& x, double threshold) {
    std::vector<TupleId> out;
    for (std::size_t j = 0; j < var_tuple.size(); ++j)
        if (x[j] >= threshold - 1e-9) out.push_back(var_tuple[j]);
    std::sort(out.begin(), out.end());
    return out;
}

struct Linearization {
    std::vector<int> ordering;
    GraphOptions options;
};

struct ResPick {
    double value = kUnset;
    std::vector<TupleId> contingency;
};

ResilienceAnswer best_res_cut(const Query& q, const Database& d, const std::vector<Linearization>& lins,
                              const std::string& method) {
    ResilienceAnswer ans;
    ans.method = method;
    const WitnessSet ws = compute_witnesses(q, d);
    if (ws.empty()) return ans;
    const auto t0 = Clock::now();
    const long n = static_cast<long>(lins.size());
    std::vector<ResPick> picks(n);
    std::vector<double> raw(n, kUnset);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        FlowNetwork g = build_linearized_graph(q, d, ws, lins[i].ordering, lins[i].options);
        CutResult c = max_flow_min_cut(g);
        if (!c.finite) continue;
        raw[i] = static_cast<double>(c.value);
        picks[i].contingency = cut_tuples(g, c);
        picks[i].value = contingency_weight(d, picks[i].contingency);
    }
    ans.solve_seconds = seconds_since(t0);
    int best = -1;
    for (long i = 0; i < n; ++i)
        if (picks[i].value < kUnset && (best < 0 || picks[i].value < picks[best].value)) best = static_cast<int>(i);
    if (best < 0) throw Error("unavoidable", "no linearization admits a finite cut");
    ans.value = picks[best].value;
    ans.contingency = picks[best].contingency;
    ans.per_linearization = raw;
    if (!destroys_query(q, d, ans.contingency)) throw Error("verify", method + " cut does not falsify the query");
    return ans;
}

ResponsibilityAnswer best_rsp_cut(const Query& q, const Database& d, TupleId t,
                                  const std::vector<Linearization>& lins, const std::string& method) {
    const WitnessSet ws = compute_witnesses(q, d);
    const auto& with_t = ws.containing(t);
    if (with_t.empty()) throw Error("usage", "tuple " + d.tuple_string(t) + " is not in any witness");
    const auto t0 = Clock::now();
    const long n = static_cast<long>(lins.size());
    const long k = static_cast<long>(with_t.size());
    struct Pick {
        double value = kUnset;
        std::vector<TupleId> contingency;
        int witness = -1;
    };
    std::vector<Pick> picks(n);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < k; ++j) {
            GraphOptions go = lins[i].options;
            go.skip_tuple.assign(d.tuple_count(), 0);
            go.skip_tuple[t] = 1;
            go.infinite_tuple.assign(d.tuple_count(), 0);
            for (TupleId u : ws.witnesses[with_t[j]].tuples) go.infinite_tuple[u] = 1;
            FlowNetwork g = build_linearized_graph(q, d, ws, lins[i].ordering, go);
            CutResult c = max_flow_min_cut(g);
            if (!c.finite) continue;
            auto set = cut_tuples(g, c);
            const double w = contingency_weight(d, set);
            if (w < picks[i].value) picks[i] = Pick{w, std::move(set), with_t[j]};
        }
    }
    ResponsibilityAnswer a;
    a.method = method;
    a.solve_seconds = seconds_since(t0);
    int best = -1;
    for (long i = 0; i < n; ++i) {
        a.per_linearization.push_back(picks[i].value);
        if (picks[i].value < kUnset && (best < 0 || picks[i].value < picks[best].value)) best = static_cast<int>(i);
    }
    if (best < 0) {
        a.counterfactualizable = false;
        return a;
    }
    a.value = picks[best].value;
    a.contingency = picks[best].contingency;
    a.preserved_witness = picks[best].witness;
    // t splits when its atom gained variables that vary across t's witnesses
    const int ta = q.atom_of_relation(d.relation_name(d.tuple(t).rel));
    const auto& added = lins[best].options.added;
    if (!added.empty() && !added[ta].empty()) {
        const auto& first = ws.witnesses[with_t.front()].valuation;
        for (int w : with_t)
            for (int v : added[ta])
                if (ws.witnesses[w].valuation[v] != first[v]) a.set_based = true;
    }
    if (!is_counterfactual(q, d, a.contingency, {t}))
        throw Error("verify", method + " cut does not make " + d.tuple_string(t) + " counterfactual");
    return a;
}

void require_sj_free(const Query& q) {
    if (!q.self_join_free()) throw Error("precondition", "flow approximations need a self-join-free query");
}

std::vector<Linearization> ct_linearizations(const Query& q, int max_atoms) {
    require_sj_free(q);
    if (static_cast<int>(q.size()) > max_atoms)
        throw Error("cap", "Flow-CT limited to " + std::to_string(max_atoms) + " atoms");
    std::vector<Linearization> out;
    for (auto& o : orderings_modulo_reversal(q.size())) {
        Linearization l;
        l.ordering = o;
        l.options.witness_keyed = false;
        out.push_back(std::move(l));
    }
    return out;
}

std::vector<Linearization> cw_linearizations(const Query& q) {
    require_sj_free(q);
    std::vector<Linearization> out;
    for (auto& dis : minimal_dissociations(q)) {
        Linearization l;
        l.ordering = dis.ordering;
        l.options.added = dis.added;
        out.push_back(std::move(l));
    }
    return out;
}

}  // namespace

ResilienceAnswer lp_rounding_res(const Query& q, const Database& d, const SolverOptions& opt) {
    ResilienceAnswer ans;
    ans.method = "round";
    const WitnessSet ws = compute_witnesses(q, d);
    if (ws.empty()) return ans;
    ResModel rm = build_res_model(q, d, ws);
    const auto t0 = Clock::now();
    SolveResult r = solve_lp(rm.model, opt);
    ans.solve_seconds = seconds_since(t0);
    if (r.status != SolveStatus::optimal) throw Error("solver", "relaxation: " + to_string(r.status));
    ans.lp_bound = r.objective;
    ans.contingency = round_up(rm.var_tuple, r.x, 1.0 / static_cast<double>(q.size()));
    ans.value = contingency_weight(d, ans.contingency);
    if (!destroys_query(q, d, ans.contingency)) throw Error("verify", "rounded set does not falsify the query");
    return ans;
}

ResponsibilityAnswer lp_rounding_rsp(const Query& q, const Database& d, TupleId t, const SolverOptions& opt) {
    const WitnessSet ws = compute_witnesses(q, d);
    RspModel rm = build_rsp_model(q, d, ws, t, RspMode::milp);
    ResponsibilityAnswer a;
    a.method = "round";
    if (rm.unavoidable) {
        a.counterfactualizable = false;
        return a;
    }
    const double threshold = 1.0 / static_cast<double>(q.size());
    const long k = static_cast<long>(rm.groups.size());
    std::vector<SolveResult> res(k);
    const auto t0 = Clock::now();
#pragma omp parallel for schedule(dynamic)
    for (long g = 0; g < k; ++g) res[g] = solve_lp(preserved_group_lp(rm, g), opt);
    a.solve_seconds = seconds_since(t0);
    double best = kUnset, bound = kUnset;
    for (long g = 0; g < k; ++g) {
        if (res[g].status != SolveStatus::optimal) continue;
        bound = std::min(bound, res[g].objective);
        auto set = round_up(rm.var_tuple, res[g].x, threshold);
        const double w = contingency_weight(d, set);
        if (w < best) {
            best = w;
            a.contingency = std::move(set);
            a.preserved_witness = rm.groups[g].front();
        }
    }
    if (best == kUnset) {
        a.counterfactualizable = false;
        return a;
    }
    a.value = best;
    a.lp_bound = bound;
    if (!is_counterfactual(q, d, a.contingency, {t}))
        throw Error("verify", "rounded set does not make " + d.tuple_string(t) + " counterfactual");
    return a;
}

ResilienceAnswer flow_ct_res(const Query& q, const Database& d, int max_atoms) {
    return best_res_cut(q, d, ct_linearizations(q, max_atoms), "flow-ct");
}

ResponsibilityAnswer flow_ct_rsp(const Query& q, const Database& d, TupleId t, int max_atoms) {
    return best_rsp_cut(q, d, t, ct_linearizations(q, max_atoms), "flow-ct");
}

ResilienceAnswer flow_cw_res(const Query& q, const Database& d) {
    return best_res_cut(q, d, cw_linearizations(q), "flow-cw");
}

ResponsibilityAnswer flow_cw_rsp(const Query& q, const Database& d, TupleId t) {
    return best_rsp_cut(q, d, t, cw_linearizations(q), "flow-cw");
}

}  // namespace rescq
