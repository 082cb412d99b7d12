#include "rescq/analysis.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <map>
#include <numeric>

namespace rescq {

std::string to_string(TriadStatus s) {
    switch (s) {
        case TriadStatus::active: return "active";
        case TriadStatus::deactivated: return "deactivated";
        case TriadStatus::fully_deactivated: return "fully_deactivated";
    }
    return "?";
}

std::string to_string(Problem p) { return p == Problem::res ? "RES" : "RSP"; }

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::ptime: return "ptime";
        case Verdict::npc: return "npc";
        case Verdict::unknown: return "unknown";
    }
    return "?";
}

bool dominates(const Query& q, int a, int b) {
    if (a == b || q.atom(a).exogenous || q.atom(b).exogenous) return false;
    auto ma = q.atom_mask(a), mb = q.atom_mask(b);
    return (ma & mb) == ma && ma != mb;
}

bool is_dominated(const Query& q, int a) {
    for (std::size_t b = 0; b < q.size(); ++b)
        if (dominates(q, static_cast<int>(b), a)) return true;
    return false;
}

std::vector<std::string> solitary_variables(const Query& q, int a) {
    std::vector<std::string> out;
    const std::uint64_t own = q.atom_mask(a);
    for (int v : q.atom_var_set(a)) {
        const std::uint64_t banned = own & ~(std::uint64_t{1} << v);
        // BFS over variables; an atom is usable when it contains a reached variable
        std::uint64_t reached = std::uint64_t{1} << v;
        bool reaches = false;
        bool grew = true;
        while (grew && !reaches) {
            grew = false;
            for (std::size_t b = 0; b < q.size(); ++b) {
                if (!(q.atom_mask(b) & reached)) continue;
                if (static_cast<int>(b) != a && !q.atom(b).exogenous) {
                    reaches = true;
                    break;
                }
                std::uint64_t next = q.atom_mask(b) & ~banned;
                if ((next | reached) != reached) {
                    reached |= next;
                    grew = true;
                }
            }
        }
        if (!reaches) out.push_back(q.variables()[v]);
    }
    return out;
}

bool fully_dominated(const Query& q, int a) {
    auto sol = solitary_variables(q, a);
    for (int v : q.atom_var_set(a)) {
        if (std::find(sol.begin(), sol.end(), q.variables()[v]) != sol.end()) continue;
        bool covered = false;
        for (std::size_t b = 0; b < q.size() && !covered; ++b)
            if (dominates(q, static_cast<int>(b), a) && (q.atom_mask(b) >> v & 1)) covered = true;
        if (!covered) return false;
    }
    return true;
}

std::vector<int> avoiding_path(const Query& q, int a, int b, std::uint64_t banned) {
    const int m = static_cast<int>(q.size());
    std::vector<int> prev(m, -2);
    std::deque<int> queue{a};
    prev[a] = -1;
    while (!queue.empty()) {
        int x = queue.front();
        queue.pop_front();
        if (x == b) break;
        for (int y = 0; y < m; ++y) {
            if (prev[y] != -2) continue;
            if ((q.atom_mask(x) & q.atom_mask(y)) & ~banned) {
                prev[y] = x;
                queue.push_back(y);
            }
        }
    }
    if (prev[b] == -2) return {};
    std::vector<int> path;
    for (int x = b; x != -1; x = prev[x]) path.push_back(x);
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<TriadReport> enumerate_triads(const Query& q) {
    if (!q.self_join_free()) throw Error("self-join", "classifier undefined for self-join queries, use IJP search");
    std::vector<int> endo;
    for (std::size_t i = 0; i < q.size(); ++i)
        if (!q.atom(i).exogenous) endo.push_back(static_cast<int>(i));
    std::vector<TriadReport> out;
    for (std::size_t i = 0; i < endo.size(); ++i)
        for (std::size_t j = i + 1; j < endo.size(); ++j)
            for (std::size_t k = j + 1; k < endo.size(); ++k) {
                int a = endo[i], b = endo[j], c = endo[k];
                TriadReport t;
                t.atoms = {a, b, c};
                t.paths[0] = avoiding_path(q, a, b, q.atom_mask(c));
                if (t.paths[0].empty()) continue;
                t.paths[1] = avoiding_path(q, b, c, q.atom_mask(a));
                if (t.paths[1].empty()) continue;
                t.paths[2] = avoiding_path(q, a, c, q.atom_mask(b));
                if (t.paths[2].empty()) continue;
                bool dom = false, full = false;
                for (int x : t.atoms)
                    if (is_dominated(q, x)) {
                        dom = true;
                        if (fully_dominated(q, x)) full = true;
                    }
                t.status = !dom ? TriadStatus::active
                                : (full ? TriadStatus::fully_deactivated : TriadStatus::deactivated);
                out.push_back(std::move(t));
            }
    return out;
}

namespace {

std::string atom_names(const Query& q, const TriadReport& t) {
    return q.atom(t.atoms[0]).relation + "," + q.atom(t.atoms[1]).relation + "," +
           q.atom(t.atoms[2]).relation;
}

}  // namespace

ComplexityVerdict classify_res(const Query& q, Semantics s) {
    ComplexityVerdict v;
    v.problem = Problem::res;
    v.semantics = s;
    if (!q.self_join_free()) {
        v.verdict = Verdict::unknown;
        v.reason = "self-join query: dichotomy undefined, use IJP search";
        return v;
    }
    v.triads = enumerate_triads(q);
    for (std::size_t i = 0; i < v.triads.size(); ++i) {
        const auto& t = v.triads[i];
        if (s == Semantics::bag || t.status == TriadStatus::active) {
            v.verdict = Verdict::npc;
            v.witness_triad = static_cast<int>(i);
            v.reason = (s == Semantics::bag ? "triad {" : "active triad {") + atom_names(q, t) + "}";
            return v;
        }
    }
    v.verdict = Verdict::ptime;
    v.reason = v.triads.empty() ? "linear: no triad" : "every triad is deactivated";
    return v;
}

ComplexityVerdict classify_rsp(const Query& q, Semantics s, const std::string& t_relation) {
    ComplexityVerdict v;
    v.problem = Problem::rsp;
    v.semantics = s;
    if (!q.self_join_free()) {
        v.verdict = Verdict::unknown;
        v.reason = "self-join query: dichotomy undefined, use IJP search";
        return v;
    }
    const int ta = q.atom_of_relation(t_relation);
    if (ta < 0) throw Error("usage", "relation " + t_relation + " is not in the query");
    v.triads = enumerate_triads(q);
    if (s == Semantics::bag) {
        if (!v.triads.empty()) {
            v.verdict = Verdict::npc;
            v.witness_triad = 0;
            v.reason = "triad {" + atom_names(q, v.triads[0]) + "}";
        } else {
            v.verdict = Verdict::ptime;
            v.reason = "linear: no triad";
        }
        return v;
    }
    for (std::size_t i = 0; i < v.triads.size(); ++i)
        if (v.triads[i].status == TriadStatus::active) {
            v.verdict = Verdict::npc;
            v.witness_triad = static_cast<int>(i);
            v.reason = "active triad {" + atom_names(q, v.triads[i]) + "}";
            return v;
        }
    bool used_t = false;
    for (std::size_t i = 0; i < v.triads.size(); ++i) {
        const auto& t = v.triads[i];
        if (t.status == TriadStatus::fully_deactivated) continue;
        bool by_t = false;
        for (int x : t.atoms) by_t = by_t || dominates(q, ta, x);
        if (by_t) {
            used_t = true;
            continue;
        }
        v.verdict = Verdict::npc;
        v.witness_triad = static_cast<int>(i);
        v.reason = "triad {" + atom_names(q, t) + "} is not fully deactivated and " + t_relation +
                   " dominates none of its atoms";
        return v;
    }
    v.verdict = Verdict::ptime;
    if (used_t) v.dominating_atom = ta;
    if (v.triads.empty()) v.reason = "linear: no triad";
    else if (used_t) v.reason = "every triad is fully deactivated or dominated by " + t_relation;
    else v.reason = "every triad is fully deactivated";
    return v;
}

std::vector<std::vector<int>> orderings_modulo_reversal(std::size_t m) {
    std::vector<int> p(m);
    std::iota(p.begin(), p.end(), 0);
    std::vector<std::vector<int>> out;
    do {
        if (m < 2 || p.front() < p.back()) out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

bool running_intersection(const Query& q, const std::vector<int>& ordering) {
    for (std::size_t v = 0; v < q.variables().size(); ++v) {
        int first = -1, last = -1, hits = 0;
        for (std::size_t i = 0; i < ordering.size(); ++i)
            if (q.atom_mask(ordering[i]) >> v & 1) {
                if (first < 0) first = static_cast<int>(i);
                last = static_cast<int>(i);
                ++hits;
            }
        if (hits && last - first + 1 != hits) return false;
    }
    return true;
}

std::vector<std::vector<int>> linear_orderings(const Query& q) {
    std::vector<std::vector<int>> out;
    for (auto& o : orderings_modulo_reversal(q.size()))
        if (running_intersection(q, o)) out.push_back(o);
    return out;
}

std::size_t Dissociation::added_count() const {
    std::size_t n = 0;
    for (const auto& a : added) n += a.size();
    return n;
}

std::vector<std::vector<int>> interval_closure(const Query& q, const std::vector<int>& ordering) {
    std::vector<std::vector<int>> added(q.size());
    for (std::size_t v = 0; v < q.variables().size(); ++v) {
        int first = -1, last = -1;
        for (std::size_t i = 0; i < ordering.size(); ++i)
            if (q.atom_mask(ordering[i]) >> v & 1) {
                if (first < 0) first = static_cast<int>(i);
                last = static_cast<int>(i);
            }
        for (int i = first + 1; i < last; ++i)
            if (!(q.atom_mask(ordering[i]) >> v & 1)) added[ordering[i]].push_back(static_cast<int>(v));
    }
    return added;
}

std::vector<Dissociation> minimal_dissociations(const Query& q) {
    std::map<std::vector<std::vector<int>>, std::vector<int>> seen;
    for (auto& o : orderings_modulo_reversal(q.size())) seen.emplace(interval_closure(q, o), o);
    auto subset = [](const std::vector<std::vector<int>>& a, const std::vector<std::vector<int>>& b) {
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!std::includes(b[i].begin(), b[i].end(), a[i].begin(), a[i].end())) return false;
        return true;
    };
    std::vector<Dissociation> out;
    for (const auto& [add, ord] : seen) {
        bool minimal = true;
        for (const auto& [other, o2] : seen)
            if (other != add && subset(other, add)) {
                minimal = false;
                break;
            }
        if (minimal) out.push_back(Dissociation{ord, add});
    }
    std::sort(out.begin(), out.end(), [](const Dissociation& a, const Dissociation& b) {
        return std::make_pair(a.added_count(), a.ordering) < std::make_pair(b.added_count(), b.ordering);
    });
    return out;
}

Query apply_dissociation(const Query& q, const Dissociation& dis) {
    auto atoms = q.atoms();
    for (std::size_t i = 0; i < atoms.size(); ++i)
        for (int v : dis.added[i]) atoms[i].vars.push_back(q.variables()[v]);
    return Query(q.name(), atoms);
}

}  // namespace rescq
