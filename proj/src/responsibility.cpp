#include "rescq/responsibility.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>

#include "rescq/resilience.hpp"

namespace rescq {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

ResponsibilityAnswer not_counterfactual(std::string method) {
    ResponsibilityAnswer a;
    a.method = std::move(method);
    a.counterfactualizable = false;
    a.value = 0;
    return a;
}

int first_preserved(const WitnessSet& ws, const std::vector<bool>& exo, TupleId t,
                    const std::vector<TupleId>& gamma) {
    for (int w : ws.containing(t)) {
        bool hit = false;
        for (TupleId u : endogenous_tuples(ws.witnesses[w], exo))
            if (std::binary_search(gamma.begin(), gamma.end(), u)) hit = true;
        if (!hit) return w;
    }
    return -1;
}

// shared tail of every exact path: read Γ, check counterfactuality
void finish_integral(ResponsibilityAnswer& a, const Query& q, const Database& d, const WitnessSet& ws,
                     TupleId t, const RspModel& rm, const std::vector<double>& x) {
    a.contingency.clear();
    for (std::size_t j = 0; j < rm.var_tuple.size(); ++j)
        if (x[j] > 0.5) a.contingency.push_back(rm.var_tuple[j]);
    std::sort(a.contingency.begin(), a.contingency.end());
    a.value = contingency_weight(d, a.contingency);
    a.preserved_witness = first_preserved(ws, exogenous_mask(q, d), t, a.contingency);
    if (!is_counterfactual(q, d, a.contingency, {t}))
        throw Error("verify", "contingency set does not make " + d.tuple_string(t) + " counterfactual");
}

}  // namespace

bool is_counterfactual(const Query& q, const Database& d, const std::vector<TupleId>& gamma,
                       const std::vector<TupleId>& removed) {
    if (!query_holds(q, d.without(gamma))) return false;
    auto all = gamma;
    all.insert(all.end(), removed.begin(), removed.end());
    return !query_holds(q, d.without(all));
}

TupleId lookup_tuple(const Database& d, const std::string& text) {
    TupleRecord r = parse_tuple(text);
    auto id = d.find(r);
    if (!id) throw Error("usage", "tuple " + to_string(r) + " is not in the database");
    return *id;
}

RspModel build_rsp_model(const Query& q, const Database& d, const WitnessSet& ws, TupleId t, RspMode mode) {
    const auto& with_t = ws.containing(t);
    if (with_t.empty()) throw Error("usage", "tuple " + d.tuple_string(t) + " is not in any witness");
    const auto exo = exogenous_mask(q, d);
    RspModel rm;
    std::vector<std::vector<TupleId>> rows;
    for (std::size_t w = 0; w < ws.size(); ++w) {
        if (ws.witnesses[w].contains(t)) continue;
        auto row = endogenous_tuples(ws.witnesses[w], exo);
        if (row.empty()) rm.unavoidable = true;
        else rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());

    rm.tuple_var.assign(d.tuple_count(), -1);
    std::vector<char> used(d.tuple_count(), 0);
    for (const auto& row : rows)
        for (TupleId u : row) used[u] = 1;
    for (TupleId u = 0; u < d.tuple_count(); ++u)
        if (used[u]) {
            rm.tuple_var[u] = rm.model.add_var("X[" + d.tuple_string(u) + "]", 0, 1, mode == RspMode::ilp,
                                               static_cast<double>(d.tuple(u).mult));
            rm.var_tuple.push_back(u);
        }

    std::map<std::vector<TupleId>, int> group_of;
    for (int w : with_t) {
        std::vector<TupleId> tr;
        for (TupleId u : ws.witnesses[w].tuples)
            if (rm.tuple_var[u] >= 0) tr.push_back(u);
        auto [it, fresh] = group_of.emplace(tr, static_cast<int>(rm.groups.size()));
        if (fresh) {
            rm.groups.emplace_back();
            rm.tracked.push_back(tr);
        }
        rm.groups[it->second].push_back(w);
    }
    for (std::size_t g = 0; g < rm.groups.size(); ++g)
        rm.group_var.push_back(
            rm.model.add_var("X[w" + std::to_string(rm.groups[g].front() + 1) + "]", 0, 1, true, 0.0));

    for (const auto& row : rows) {
        std::vector<std::pair<int, double>> terms;
        for (TupleId u : row) terms.emplace_back(rm.tuple_var[u], 1.0);
        rm.model.add_constraint(std::move(terms), Sense::ge, 1.0);
    }
    for (std::size_t g = 0; g < rm.groups.size(); ++g)
        for (TupleId u : rm.tracked[g])
            rm.model.add_constraint({{rm.group_var[g], 1.0}, {rm.tuple_var[u], -1.0}}, Sense::ge, 0.0);
    std::vector<std::pair<int, double>> cf;
    for (int v : rm.group_var) cf.emplace_back(v, 1.0);
    rm.model.add_constraint(std::move(cf), Sense::le, static_cast<double>(rm.groups.size()) - 1.0,
                            "counterfactual");
    return rm;
}

LinearModel preserved_group_lp(const RspModel& rm, std::size_t g) {
    LinearModel lp;
    const std::size_t nt = rm.var_tuple.size();
    for (std::size_t j = 0; j < nt; ++j) {
        LpVar v = rm.model.vars[j];
        lp.add_var(v.name, v.lb, v.ub, false, v.obj);
    }
    for (TupleId u : rm.tracked[g]) lp.vars[rm.tuple_var[u]].ub = 0.0;
    for (const auto& c : rm.model.cons) {
        bool tuple_only = std::all_of(c.terms.begin(), c.terms.end(),
                                      [&](const auto& term) { return term.first < static_cast<int>(nt); });
        if (tuple_only && !c.terms.empty()) lp.cons.push_back(c);
    }
    return lp;
}

ResponsibilityAnswer responsibility_ilp(const Query& q, const Database& d, TupleId t, const SolverOptions& opt) {
    const WitnessSet ws = compute_witnesses(q, d);
    RspModel rm = build_rsp_model(q, d, ws, t, RspMode::ilp);
    if (rm.unavoidable) return not_counterfactual("ilp");
    const auto t0 = Clock::now();
    SolveResult r = solve_milp(rm.model, opt);
    ResponsibilityAnswer a;
    a.method = "ilp";
    a.solve_seconds = seconds_since(t0);
    a.nodes = r.nodes;
    if (r.status == SolveStatus::infeasible) return not_counterfactual("ilp");
    if (!r.has_solution) throw Error("limit", "solver stopped: " + to_string(r.status));
    finish_integral(a, q, d, ws, t, rm, r.x);
    return a;
}

namespace {

ResponsibilityAnswer enumerate_groups(const Query& q, const Database& d, TupleId t, const SolverOptions& opt,
                                      bool parallel) {
    const WitnessSet ws = compute_witnesses(q, d);
    RspModel rm = build_rsp_model(q, d, ws, t, RspMode::milp);
    if (rm.unavoidable) return not_counterfactual("milp");
    const long k = static_cast<long>(rm.groups.size());
    std::vector<SolveResult> res(k);
    const auto t0 = Clock::now();
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long g = 0; g < k; ++g) res[g] = solve_lp(preserved_group_lp(rm, g), opt);
    ResponsibilityAnswer a;
    a.method = "milp";
    a.solve_seconds = seconds_since(t0);
    int best = -1;
    for (long g = 0; g < k; ++g) {
        if (res[g].status == SolveStatus::iteration_limit) throw Error("limit", "LP pivot cap reached");
        if (res[g].status != SolveStatus::optimal) continue;
        if (best < 0 || res[g].objective < res[best].objective - opt.tol) best = static_cast<int>(g);
    }
    if (best < 0) return not_counterfactual("milp");
    a.nodes = k;
    const auto& x = res[best].x;
    a.integral = std::all_of(x.begin(), x.end(), [&](double v) { return std::abs(v - std::round(v)) <= opt.tol; });
    if (a.integral) {
        finish_integral(a, q, d, ws, t, rm, x);
    } else {
        a.value = res[best].objective;
        a.preserved_witness = rm.groups[best].front();
    }
    return a;
}

}  // namespace

ResponsibilityAnswer responsibility_milp(const Query& q, const Database& d, TupleId t, const SolverOptions& opt) {
    return enumerate_groups(q, d, t, opt, true);
}

ResponsibilityAnswer responsibility_milp_serial(const Query& q, const Database& d, TupleId t,
                                                const SolverOptions& opt) {
    return enumerate_groups(q, d, t, opt, false);
}

ResponsibilityAnswer responsibility_milp_bnb(const Query& q, const Database& d, TupleId t,
                                             const SolverOptions& opt) {
    const WitnessSet ws = compute_witnesses(q, d);
    RspModel rm = build_rsp_model(q, d, ws, t, RspMode::milp);
    if (rm.unavoidable) return not_counterfactual("milp-bnb");
    const auto t0 = Clock::now();
    SolveResult r = solve_milp(rm.model, opt);
    ResponsibilityAnswer a;
    a.method = "milp-bnb";
    a.solve_seconds = seconds_since(t0);
    a.nodes = r.nodes;
    if (r.status == SolveStatus::infeasible) return not_counterfactual("milp-bnb");
    if (!r.has_solution) throw Error("limit", "solver stopped: " + to_string(r.status));
    const std::size_t nt = rm.var_tuple.size();
    a.integral = std::all_of(r.x.begin(), r.x.begin() + static_cast<long>(nt),
                             [&](double v) { return std::abs(v - std::round(v)) <= opt.tol; });
    if (a.integral) {
        finish_integral(a, q, d, ws, t, rm, r.x);
    } else {
        a.value = r.objective;
        for (std::size_t g = 0; g < rm.groups.size(); ++g)
            if (r.x[rm.group_var[g]] < 0.5) {
                a.preserved_witness = rm.groups[g].front();
                break;
            }
    }
    return a;
}

ResponsibilityAnswer brute_force_responsibility(const Query& q, const Database& d, TupleId t, int cap) {
    const WitnessSet ws = compute_witnesses(q, d);
    if (ws.containing(t).empty())
        throw Error("usage", "tuple " + d.tuple_string(t) + " is not in any witness");
    const auto exo = exogenous_mask(q, d);
    std::vector<int> bit(d.tuple_count(), -1);
    std::vector<TupleId> relevant;
    std::vector<std::uint32_t> kill, keep;
    for (const auto& w : ws.witnesses) {
        std::uint32_t m = 0;
        for (TupleId u : endogenous_tuples(w, exo)) {
            if (u == t) continue;
            if (bit[u] < 0) {
                if (static_cast<int>(relevant.size()) >= cap)
                    throw Error("cap", "brute force limited to " + std::to_string(cap) + " endogenous tuples");
                bit[u] = static_cast<int>(relevant.size());
                relevant.push_back(u);
            }
            m |= std::uint32_t{1} << bit[u];
        }
        if (w.contains(t)) {
            keep.push_back(m);
        } else {
            if (!m) return not_counterfactual("brute");
            kill.push_back(m);
        }
    }
    const std::uint32_t n = static_cast<std::uint32_t>(relevant.size());
    double best = -1;
    std::uint32_t best_set = 0;
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); ++s) {
        const auto set = static_cast<std::uint32_t>(s);
        double w = 0;
        for (std::uint32_t i = 0; i < n; ++i)
            if (set >> i & 1) w += static_cast<double>(d.tuple(relevant[i]).mult);
        if (best >= 0 && w >= best) continue;
        bool ok = std::all_of(kill.begin(), kill.end(), [&](std::uint32_t m) { return (m & set) != 0; }) &&
                  std::any_of(keep.begin(), keep.end(), [&](std::uint32_t m) { return (m & set) == 0; });
        if (ok) {
            best = w;
            best_set = set;
        }
    }
    if (best < 0) return not_counterfactual("brute");
    ResponsibilityAnswer a;
    a.method = "brute";
    a.value = best;
    for (std::uint32_t i = 0; i < n; ++i)
        if (best_set >> i & 1) a.contingency.push_back(relevant[i]);
    std::sort(a.contingency.begin(), a.contingency.end());
    a.preserved_witness = first_preserved(ws, exo, t, a.contingency);
    return a;
}

}  // namespace rescq
