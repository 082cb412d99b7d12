#include "rescq/flow.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <sstream>

#include "rescq/analysis.hpp"

namespace rescq {

int FlowNetwork::add_node(std::string label) {
    labels.push_back(std::move(label));
    return static_cast<int>(labels.size()) - 1;
}

std::uint64_t FlowNetwork::count_paths() const {
    const std::size_t n = labels.size();
    std::vector<std::vector<int>> out(n);
    std::vector<int> indeg(n, 0);
    for (const auto& e : edges) {
        out[e.from].push_back(e.to);
        ++indeg[e.to];
    }
    std::vector<std::uint64_t> ways(n, 0);
    ways[source] = 1;
    std::deque<int> queue;
    for (std::size_t v = 0; v < n; ++v)
        if (!indeg[v]) queue.push_back(static_cast<int>(v));
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v : out[u]) {
            const std::uint64_t w = ways[v] + ways[u];
            ways[v] = w < ways[v] ? std::numeric_limits<std::uint64_t>::max() : w;
            if (--indeg[v] == 0) queue.push_back(v);
        }
    }
    return ways[sink];
}

std::string FlowNetwork::dump(const Database& d) const {
    std::ostringstream os;
    os << "# nodes " << labels.size() << " source " << source << " sink " << sink << '\n';
    for (std::size_t i = 0; i < labels.size(); ++i) os << "# " << i << ' ' << labels[i] << '\n';
    for (const auto& e : edges) {
        os << e.from << ' ' << e.to << ' ';
        if (e.infinite) os << "inf";
        else os << e.cap;
        if (e.tuple >= 0) os << ' ' << d.tuple_string(static_cast<TupleId>(e.tuple));
        os << '\n';
    }
    return os.str();
}

namespace {

// separator variables between ordering positions i and i+1
std::vector<std::vector<int>> separators(const Query& q, const std::vector<int>& ordering,
                                         const std::vector<std::vector<int>>& added) {
    auto vars_of = [&](int a) {
        std::uint64_t m = q.atom_mask(a);
        if (!added.empty())
            for (int v : added[a]) m |= std::uint64_t{1} << v;
        return m;
    };
    std::vector<std::vector<int>> sep;
    for (std::size_t i = 0; i + 1 < ordering.size(); ++i) {
        const std::uint64_t s = vars_of(ordering[i]) & vars_of(ordering[i + 1]);
        std::vector<int> vs;
        for (int v = 0; v < 64; ++v)
            if (s >> v & 1) vs.push_back(v);
        sep.push_back(std::move(vs));
    }
    return sep;
}

std::string node_label(const Query& q, const Database& d, std::size_t pos, const std::vector<int>& vars,
                       const std::vector<ConstId>& vals) {
    std::string s = "p" + std::to_string(pos) + ":";
    for (std::size_t i = 0; i < vars.size(); ++i)
        s += (i ? "," : "") + q.variables()[vars[i]] + "=" + d.constant_name(vals[i]);
    return s;
}

struct Builder {
    const Query& q;
    const Database& d;
    FlowNetwork g;
    std::map<std::pair<std::size_t, std::vector<ConstId>>, int> nodes;

    int node(std::size_t pos, const std::vector<int>& vars, std::vector<ConstId> vals) {
        auto key = std::make_pair(pos, vals);
        auto it = nodes.find(key);
        if (it != nodes.end()) return it->second;
        int id = g.add_node(node_label(q, d, pos, vars, vals));
        nodes.emplace(std::move(key), id);
        return id;
    }
};

}  // namespace

FlowNetwork build_linearized_graph(const Query& q, const Database& d, const WitnessSet& ws,
                                   const std::vector<int>& ordering, const GraphOptions& opt) {
    const std::size_t m = ordering.size();
    const auto sep = separators(q, ordering, opt.witness_keyed ? opt.added : std::vector<std::vector<int>>{});
    const auto exo = exogenous_mask(q, d);
    Builder b{q, d, {}, {}};
    auto flag = [](const std::vector<char>& v, std::size_t i) { return i < v.size() && v[i]; };

    std::map<std::tuple<int, TupleId, std::vector<ConstId>>, int> seen;
    auto add_edge = [&](int atom, TupleId u, std::vector<ConstId> extra, int from, int to) {
        auto key = std::make_tuple(atom, u, std::move(extra));
        if (seen.count(key)) return;
        seen.emplace(std::move(key), static_cast<int>(b.g.edges.size()));
        FlowEdge e;
        e.from = from;
        e.to = to;
        e.atom = atom;
        e.tuple = static_cast<int>(u);
        e.infinite = exo[u] || flag(opt.infinite_atom, atom) || flag(opt.infinite_tuple, u);
        e.cap = e.infinite ? 0 : d.tuple(u).mult;
        b.g.edges.push_back(e);
    };
    auto endpoints = [&](std::size_t i, auto&& value_of) {
        int from = b.g.source, to = b.g.sink;
        if (i > 0) {
            std::vector<ConstId> vals;
            for (int v : sep[i - 1]) vals.push_back(value_of(v));
            from = b.node(i - 1, sep[i - 1], std::move(vals));
        }
        if (i + 1 < m) {
            std::vector<ConstId> vals;
            for (int v : sep[i]) vals.push_back(value_of(v));
            to = b.node(i, sep[i], std::move(vals));
        }
        return std::make_pair(from, to);
    };

    if (opt.witness_keyed) {
        for (const auto& w : ws.witnesses)
            for (std::size_t i = 0; i < m; ++i) {
                const int a = ordering[i];
                const TupleId u = w.atom_tuples[a];
                if (flag(opt.skip_tuple, u)) continue;
                std::vector<ConstId> extra;
                if (!opt.added.empty())
                    for (int v : opt.added[a]) extra.push_back(w.valuation[v]);
                auto [from, to] = endpoints(i, [&](int v) { return w.valuation[v]; });
                add_edge(a, u, std::move(extra), from, to);
            }
    } else {
        std::vector<std::vector<char>> used(q.size(), std::vector<char>(d.tuple_count(), 0));
        for (const auto& w : ws.witnesses)
            for (std::size_t a = 0; a < q.size(); ++a) used[a][w.atom_tuples[a]] = 1;
        for (std::size_t i = 0; i < m; ++i) {
            const int a = ordering[i];
            const auto& ids = q.atom_var_ids(a);
            for (TupleId u = 0; u < d.tuple_count(); ++u) {
                if (!used[a][u] || flag(opt.skip_tuple, u)) continue;
                const auto& args = d.tuple(u).args;
                auto value_of = [&](int v) {
                    for (std::size_t p = 0; p < ids.size(); ++p)
                        if (ids[p] == v) return args[p];
                    throw Error("internal", "separator variable missing from atom");
                };
                auto [from, to] = endpoints(i, value_of);
                add_edge(a, u, {}, from, to);
            }
        }
    }
    return b.g;
}

FlowNetwork build_flow_graph(const Query& q, const Database& d, const WitnessSet& ws,
                             const std::vector<int>& ordering) {
    return build_linearized_graph(q, d, ws, ordering, GraphOptions{});
}

namespace {

class Dinic {
public:
    explicit Dinic(int n) : adj_(n), level_(n), it_(n) {}

    int add(int u, int v, std::int64_t cap) {
        adj_[u].push_back(static_cast<int>(arcs_.size()));
        arcs_.push_back({v, cap});
        adj_[v].push_back(static_cast<int>(arcs_.size()));
        arcs_.push_back({u, 0});
        return static_cast<int>(arcs_.size()) - 2;
    }

    std::int64_t run(int s, int t) {
        std::int64_t total = 0;
        while (bfs(s, t)) {
            std::fill(it_.begin(), it_.end(), 0);
            while (std::int64_t f = dfs(s, t, std::numeric_limits<std::int64_t>::max())) total += f;
        }
        return total;
    }

    // nodes reachable from s in the residual graph
    std::vector<char> reachable(int s) const {
        std::vector<char> seen(adj_.size(), 0);
        std::deque<int> queue{s};
        seen[s] = 1;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int a : adj_[u])
                if (arcs_[a].cap > 0 && !seen[arcs_[a].to]) {
                    seen[arcs_[a].to] = 1;
                    queue.push_back(arcs_[a].to);
                }
        }
        return seen;
    }

private:
    struct Arc {
        int to;
        std::int64_t cap;
    };
    std::vector<std::vector<int>> adj_;
    std::vector<Arc> arcs_;
    std::vector<int> level_;
    std::vector<std::size_t> it_;

    bool bfs(int s, int t) {
        std::fill(level_.begin(), level_.end(), -1);
        std::deque<int> queue{s};
        level_[s] = 0;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int a : adj_[u])
                if (arcs_[a].cap > 0 && level_[arcs_[a].to] < 0) {
                    level_[arcs_[a].to] = level_[u] + 1;
                    queue.push_back(arcs_[a].to);
                }
        }
        return level_[t] >= 0;
    }

    std::int64_t dfs(int u, int t, std::int64_t pushed) {
        if (u == t) return pushed;
        for (; it_[u] < adj_[u].size(); ++it_[u]) {
            const int a = adj_[u][it_[u]];
            const int v = arcs_[a].to;
            if (arcs_[a].cap <= 0 || level_[v] != level_[u] + 1) continue;
            if (std::int64_t f = dfs(v, t, std::min(pushed, arcs_[a].cap))) {
                arcs_[a].cap -= f;
                arcs_[a ^ 1].cap += f;
                return f;
            }
        }
        return 0;
    }
};

}  // namespace

CutResult max_flow_min_cut(const FlowNetwork& g) {
    std::int64_t finite_sum = 0;
    for (const auto& e : g.edges)
        if (!e.infinite) finite_sum += e.cap;
    const std::int64_t inf = finite_sum + 1;
    Dinic dn(static_cast<int>(g.node_count()));
    for (const auto& e : g.edges) dn.add(e.from, e.to, e.infinite ? inf : e.cap);
    CutResult r;
    r.flow = dn.run(g.source, g.sink);
    if (r.flow >= inf) {
        r.finite = false;
        r.value = r.flow;
        return r;
    }
    const auto side = dn.reachable(g.source);
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const auto& e = g.edges[i];
        if (side[e.from] && !side[e.to]) {
            r.cut_edges.push_back(static_cast<int>(i));
            r.value += e.cap;
        }
    }
    if (r.value != r.flow) throw Error("internal", "max-flow and min-cut disagree");
    return r;
}

std::vector<TupleId> cut_tuples(const FlowNetwork& g, const CutResult& c) {
    std::vector<TupleId> out;
    for (int i : c.cut_edges) out.push_back(static_cast<TupleId>(g.edges[i].tuple));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::optional<FlowPlan> plan_linearization(const Query& q, const std::vector<char>& allowed) {
    std::optional<FlowPlan> best;
    for (auto& o : orderings_modulo_reversal(q.size())) {
        auto add = interval_closure(q, o);
        FlowPlan p;
        bool ok = true;
        for (std::size_t a = 0; a < q.size() && ok; ++a) {
            if (add[a].empty()) continue;
            if (!allowed[a]) ok = false;
            else if (!q.atom(a).exogenous) p.exogenized.push_back(static_cast<int>(a));
        }
        if (!ok) continue;
        if (!best || p.exogenized.size() < best->exogenized.size()) {
            p.ordering = o;
            p.added = std::move(add);
            best = std::move(p);
        }
    }
    return best;
}

namespace {

void require_sj_free(const Query& q) {
    if (!q.self_join_free()) throw Error("precondition", "flow encoding needs a self-join-free query");
}

std::vector<char> infinite_atoms(const Query& q, const FlowPlan& p) {
    std::vector<char> inf(q.size(), 0);
    for (int a : p.exogenized) inf[a] = 1;
    return inf;
}

bool has_exogenous_tuple(const Query& q, const Database& d, int atom) {
    const int rel = d.relation_id(q.atom(atom).relation);
    if (rel < 0) return false;
    for (TupleId u : d.relation_tuples(rel))
        if (d.tuple(u).exo) return true;
    return false;
}

}  // namespace

ResilienceAnswer resilience_via_flow(const Query& q, const Database& d) {
    require_sj_free(q);
    ResilienceAnswer ans;
    ans.method = "flow";
    std::vector<char> allowed(q.size(), 0);
    for (std::size_t a = 0; a < q.size(); ++a) {
        if (q.atom(a).exogenous) {
            allowed[a] = 1;
            continue;
        }
        if (d.semantics() != Semantics::set) continue;
        for (std::size_t b = 0; b < q.size(); ++b) {
            const int bi = static_cast<int>(b);
            if (dominates(q, bi, static_cast<int>(a)) && !is_dominated(q, bi) && !has_exogenous_tuple(q, d, bi))
                allowed[a] = 1;
        }
    }
    auto plan = plan_linearization(q, allowed);
    if (!plan) throw Error("precondition", "query has no linearization reachable by exogenous dissociation");
    const WitnessSet ws = compute_witnesses(q, d);
    if (ws.empty()) return ans;
    GraphOptions go;
    go.added = plan->added;
    go.infinite_atom = infinite_atoms(q, *plan);
    FlowNetwork g = build_linearized_graph(q, d, ws, plan->ordering, go);
    CutResult c = max_flow_min_cut(g);
    if (!c.finite) throw Error("unavoidable", "unavoidable witness: every tuple is exogenous");
    ans.contingency = cut_tuples(g, c);
    ans.value = contingency_weight(d, ans.contingency);
    ans.per_linearization.push_back(static_cast<double>(c.value));
    if (!destroys_query(q, d, ans.contingency)) throw Error("verify", "flow cut does not falsify the query");
    return ans;
}

ResponsibilityAnswer responsibility_via_flow(const Query& q, const Database& d, TupleId t) {
    require_sj_free(q);
    const WitnessSet ws = compute_witnesses(q, d);
    const auto& with_t = ws.containing(t);
    if (with_t.empty()) throw Error("usage", "tuple " + d.tuple_string(t) + " is not in any witness");
    const int ta = q.atom_of_relation(d.relation_name(d.tuple(t).rel));
    std::vector<char> allowed(q.size(), 0);
    for (std::size_t a = 0; a < q.size(); ++a) {
        const int ai = static_cast<int>(a);
        allowed[a] = q.atom(a).exogenous ||
                     (d.semantics() == Semantics::set &&
                      ((is_dominated(q, ai) && fully_dominated(q, ai)) || dominates(q, ta, ai)));
    }
    auto plan = plan_linearization(q, allowed);
    if (!plan) throw Error("precondition", "query has no linearization reachable by exogenous dissociation");
    GraphOptions base;
    base.added = plan->added;
    base.infinite_atom = infinite_atoms(q, *plan);
    base.skip_tuple.assign(d.tuple_count(), 0);
    base.skip_tuple[t] = 1;

    const long k = static_cast<long>(with_t.size());
    std::vector<CutResult> cuts(k);
    std::vector<std::vector<TupleId>> sets(k);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < k; ++i) {
        GraphOptions go = base;
        go.infinite_tuple.assign(d.tuple_count(), 0);
        for (TupleId u : ws.witnesses[with_t[i]].tuples) go.infinite_tuple[u] = 1;
        FlowNetwork g = build_linearized_graph(q, d, ws, plan->ordering, go);
        cuts[i] = max_flow_min_cut(g);
        if (cuts[i].finite) sets[i] = cut_tuples(g, cuts[i]);
    }
    ResponsibilityAnswer a;
    a.method = "flow";
    int best = -1;
    for (long i = 0; i < k; ++i) {
        if (!cuts[i].finite) continue;
        if (best < 0 || contingency_weight(d, sets[i]) < contingency_weight(d, sets[best])) best = static_cast<int>(i);
    }
    if (best < 0) {
        a.counterfactualizable = false;
        return a;
    }
    a.contingency = sets[best];
    a.value = contingency_weight(d, a.contingency);
    a.preserved_witness = with_t[best];
    if (!is_counterfactual(q, d, a.contingency, {t}))
        throw Error("verify", "flow cut does not make " + d.tuple_string(t) + " counterfactual");
    return a;
}

}  // namespace rescq
