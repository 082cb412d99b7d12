#include "rescq/witness.hpp"

#include <algorithm>
#include <atomic>
#include <ostream>
#include <unordered_map>

#include <omp.h>

namespace rescq {

bool Witness::contains(TupleId t) const { return std::binary_search(tuples.begin(), tuples.end(), t); }

const std::vector<int>& WitnessSet::containing(TupleId t) const {
    static const std::vector<int> none;
    return t < tuple_index.size() ? tuple_index[t] : none;
}

namespace {

struct KeyHash {
    std::size_t operator()(const std::vector<ConstId>& v) const {
        std::size_t h = 1469598103934665603ull;
        for (auto c : v) h = (h ^ c) * 1099511628211ull;
        return h;
    }
};

using Index = std::unordered_map<std::vector<ConstId>, std::vector<TupleId>, KeyHash>;

struct Step {
    int atom = 0;
    std::vector<int> key_pos;               // argument positions bound earlier
    std::vector<int> key_var;
    std::vector<std::pair<int, int>> bind;  // (argument position, var id) first bound here
    Index index;
};

struct Plan {
    std::vector<Step> steps;
    bool empty = false;
};

Plan make_plan(const Query& q, const Database& d) {
    Plan plan;
    const std::size_t m = q.size();
    std::vector<int> rel(m);
    for (std::size_t i = 0; i < m; ++i) {
        rel[i] = d.relation_id(q.atom(i).relation);
        if (rel[i] < 0 || d.arity(rel[i]) != static_cast<int>(q.atom(i).vars.size())) {
            if (rel[i] >= 0) throw Error("arity", "arity mismatch for relation " + q.atom(i).relation);
            plan.empty = true;
            return plan;
        }
    }
    auto count = [&](std::size_t i) { return d.relation_tuples(rel[i]).size(); };
    std::vector<char> used(m, 0);
    std::uint64_t bound = 0;
    for (std::size_t step = 0; step < m; ++step) {
        int best = -1;
        for (std::size_t i = 0; i < m; ++i) {
            if (used[i]) continue;
            if (step > 0 && (q.atom_mask(i) & bound) == 0) continue;
            if (best < 0 || count(i) < count(best)) best = static_cast<int>(i);
        }
        used[best] = 1;
        Step s;
        s.atom = best;
        const auto& ids = q.atom_var_ids(best);
        std::uint64_t local = 0;
        for (std::size_t p = 0; p < ids.size(); ++p) {
            std::uint64_t bit = std::uint64_t{1} << ids[p];
            if (bound & bit) {
                s.key_pos.push_back(static_cast<int>(p));
                s.key_var.push_back(ids[p]);
            } else if (!(local & bit)) {
                s.bind.emplace_back(static_cast<int>(p), ids[p]);
                local |= bit;
            }
        }
        // repeated variables inside the atom must agree
        for (TupleId t : d.relation_tuples(rel[best])) {
            const auto& args = d.tuple(t).args;
            bool ok = true;
            for (std::size_t p = 0; p < ids.size() && ok; ++p)
                for (std::size_t r = p + 1; r < ids.size() && ok; ++r)
                    if (ids[p] == ids[r] && args[p] != args[r]) ok = false;
            if (!ok) continue;
            std::vector<ConstId> key;
            key.reserve(s.key_pos.size());
            for (int p : s.key_pos) key.push_back(args[p]);
            s.index[key].push_back(t);
        }
        bound |= local;
        plan.steps.push_back(std::move(s));
    }
    return plan;
}

struct Runner {
    const Query& q;
    const Database& d;
    const Plan& plan;
    std::vector<ConstId> val;
    std::vector<TupleId> chosen;
    std::vector<Witness>* out = nullptr;
    const std::atomic<bool>* stop = nullptr;
    bool found = false;
    std::vector<ConstId> key;

    Runner(const Query& q_, const Database& d_, const Plan& p_)
        : q(q_), d(d_), plan(p_), val(q_.variables().size()), chosen(q_.size()) {}

    void emit() {
        found = true;
        if (!out) return;
        Witness w;
        w.valuation = val;
        w.atom_tuples = chosen;
        w.tuples = chosen;
        std::sort(w.tuples.begin(), w.tuples.end());
        w.tuples.erase(std::unique(w.tuples.begin(), w.tuples.end()), w.tuples.end());
        out->push_back(std::move(w));
    }

    void extend(std::size_t depth) {
        if (depth == plan.steps.size()) {
            emit();
            return;
        }
        if (stop && stop->load(std::memory_order_relaxed)) return;
        if (!out && found) return;
        const Step& s = plan.steps[depth];
        std::vector<ConstId> k;
        k.reserve(s.key_var.size());
        for (int v : s.key_var) k.push_back(val[v]);
        auto it = s.index.find(k);
        if (it == s.index.end()) return;
        for (TupleId t : it->second) {
            const auto& args = d.tuple(t).args;
            for (auto [p, v] : s.bind) val[v] = args[p];
            chosen[s.atom] = t;
            extend(depth + 1);
            if (!out && found) return;
        }
    }

    void run_first(const std::vector<TupleId>& firsts, std::size_t b, std::size_t e) {
        const Step& s = plan.steps[0];
        for (std::size_t i = b; i < e; ++i) {
            TupleId t = firsts[i];
            const auto& args = d.tuple(t).args;
            for (auto [p, v] : s.bind) val[v] = args[p];
            chosen[s.atom] = t;
            extend(1);
            if (!out && found) return;
        }
    }
};

const std::vector<TupleId>& first_tuples(const Plan& plan) {
    static const std::vector<TupleId> none;
    auto it = plan.steps[0].index.find({});
    return it == plan.steps[0].index.end() ? none : it->second;
}

WitnessSet finish(const Database& d, std::vector<Witness> ws) {
    std::sort(ws.begin(), ws.end(),
              [](const Witness& a, const Witness& b) { return a.valuation < b.valuation; });
    WitnessSet out;
    out.witnesses = std::move(ws);
    out.tuple_index.assign(d.tuple_count(), {});
    for (std::size_t i = 0; i < out.witnesses.size(); ++i)
        for (TupleId t : out.witnesses[i].tuples) out.tuple_index[t].push_back(static_cast<int>(i));
    return out;
}

}  // namespace

WitnessSet compute_witnesses_serial(const Query& q, const Database& d) {
    Plan plan = make_plan(q, d);
    std::vector<Witness> ws;
    if (!plan.empty) {
        const auto& firsts = first_tuples(plan);
        Runner r(q, d, plan);
        r.out = &ws;
        r.run_first(firsts, 0, firsts.size());
    }
    return finish(d, std::move(ws));
}

WitnessSet compute_witnesses(const Query& q, const Database& d) {
    Plan plan = make_plan(q, d);
    std::vector<Witness> ws;
    if (!plan.empty) {
        const auto& firsts = first_tuples(plan);
        const std::size_t n = firsts.size();
        const std::size_t chunk = 64;
        const std::size_t chunks = (n + chunk - 1) / chunk;
        std::vector<std::vector<Witness>> parts(chunks);
#pragma omp parallel for schedule(dynamic)
        for (std::size_t c = 0; c < chunks; ++c) {
            Runner r(q, d, plan);
            r.out = &parts[c];
            r.run_first(firsts, c * chunk, std::min(n, (c + 1) * chunk));
        }
        for (auto& p : parts)
            for (auto& w : p) ws.push_back(std::move(w));
    }
    return finish(d, std::move(ws));
}

bool query_holds(const Query& q, const Database& d) {
    Plan plan = make_plan(q, d);
    if (plan.empty) return false;
    const auto& firsts = first_tuples(plan);
    Runner r(q, d, plan);
    r.run_first(firsts, 0, firsts.size());
    return r.found;
}

std::vector<TupleId> endogenous_tuples(const Witness& w, const std::vector<bool>& exo) {
    std::vector<TupleId> out;
    for (TupleId t : w.tuples)
        if (!exo[t]) out.push_back(t);
    return out;
}

namespace {

bool p4_at(const WitnessSet& ws, const std::vector<bool>& exo, std::size_t w2) {
    auto e2 = endogenous_tuples(ws.witnesses[w2], exo);
    for (TupleId t1 : e2)
        for (TupleId t2 : e2) {
            if (t1 == t2) continue;
            bool left = false;
            for (int w1 : ws.tuple_index[t1])
                if (!ws.witnesses[w1].contains(t2)) {
                    left = true;
                    break;
                }
            if (!left) continue;
            for (int w3 : ws.tuple_index[t2])
                if (!ws.witnesses[w3].contains(t1)) return true;
        }
    return false;
}

}  // namespace

bool has_p4_pattern_serial(const WitnessSet& ws, const std::vector<bool>& exo) {
    for (std::size_t w = 0; w < ws.size(); ++w)
        if (p4_at(ws, exo, w)) return true;
    return false;
}

bool has_p4_pattern(const WitnessSet& ws, const std::vector<bool>& exo) {
    std::atomic<bool> hit{false};
    const long n = static_cast<long>(ws.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long w = 0; w < n; ++w) {
        if (hit.load(std::memory_order_relaxed)) continue;
        if (p4_at(ws, exo, static_cast<std::size_t>(w))) hit.store(true);
    }
    return hit.load();
}

void write_witness_csv(std::ostream& os, const Query& q, const Database& d, const WitnessSet& ws) {
    for (const auto& v : q.variables()) os << v << ',';
    os << "tuples\n";
    for (const auto& w : ws.witnesses) {
        for (auto c : w.valuation) os << d.constant_name(c) << ',';
        for (std::size_t i = 0; i < w.tuples.size(); ++i) os << (i ? ";" : "") << d.tuple_string(w.tuples[i]);
        os << '\n';
    }
}

}  // namespace rescq
