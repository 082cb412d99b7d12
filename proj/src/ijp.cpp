#include "rescq/ijp.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <unordered_set>

#include "json.hpp"
#include "rescq/analysis.hpp"
#include "rescq/resilience.hpp"

namespace rescq {

namespace {

std::vector<TupleRecord> sorted_unique(std::vector<TupleRecord> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::vector<TupleId> ids_of(const Database& d, const std::vector<TupleRecord>& ts) {
    std::vector<TupleId> out;
    for (const auto& r : ts)
        if (auto id = d.find(r)) out.push_back(*id);
    return out;
}

std::set<std::string> db_constants(const Database& d) {
    std::set<std::string> out;
    for (TupleId t = 0; t < d.tuple_count(); ++t)
        for (ConstId c : d.tuple(t).args) out.insert(d.constant_name(c));
    return out;
}

// hands out integer constants not used so far
struct Fresh {
    long next = 1;
    explicit Fresh(const std::set<std::string>& used) {
        for (const auto& c : used) {
            try {
                std::size_t pos = 0;
                long v = std::stol(c, &pos);
                if (pos == c.size()) next = std::max(next, v + 1);
            } catch (const std::exception&) {
            }
        }
    }
    std::string operator()() { return std::to_string(next++); }
};

std::vector<TupleRecord> rename(const std::vector<TupleRecord>& ts, const ConstMap& m) {
    std::vector<TupleRecord> out;
    for (auto r : ts) {
        for (auto& c : r.constants) c = m.at(c);
        out.push_back(std::move(r));
    }
    return out;
}

// adds records; an existing tuple keeps the larger multiplicity
void merge_into(Database& d, const std::vector<TupleRecord>& recs) {
    for (const auto& r : recs) {
        if (auto id = d.find(r)) {
            if (r.multiplicity > d.tuple(*id).mult) d.set_multiplicity(*id, r.multiplicity);
            if (r.exogenous) d.set_exogenous(*id, true);
        } else {
            d.add(r);
        }
    }
}

Database fresh_db(const Query& q, Semantics s) {
    Database d(s);
    declare_relations(q, d);
    return d;
}

// constants all taken from one endpoint
bool inside_endpoint(const TupleRecord& r, const std::set<std::string>& sc, const std::set<std::string>& tc) {
    auto within = [&](const std::set<std::string>& cs) {
        return std::all_of(r.constants.begin(), r.constants.end(), [&](const std::string& k) { return cs.count(k) > 0; });
    };
    return within(sc) || within(tc);
}

int resilience_value(const Query& q, const Database& d) {
    return static_cast<int>(std::lround(resilience_ilp(q, d).value));
}

}  // namespace

JoinPathChecks check_join_path(const JoinPathCandidate& c) {
    JoinPathChecks r;
    const Query& q = c.query;
    const Database& d = c.db;
    const WitnessSet ws = compute_witnesses(q, d);
    const auto exo = exogenous_mask(q, d);

    r.reduced = true;
    for (TupleId t = 0; t < d.tuple_count() && r.reduced; ++t)
        if (ws.containing(t).empty()) {
            r.reduced = false;
            r.detail = "tuple " + d.tuple_string(t) + " is in no witness";
        }

    // witnesses linked through shared constants
    std::vector<int> parent(ws.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    std::map<ConstId, int> owner;
    for (std::size_t w = 0; w < ws.size(); ++w)
        for (ConstId k : ws.witnesses[w].valuation) {
            auto [it, fresh] = owner.emplace(k, static_cast<int>(w));
            if (!fresh) parent[find(static_cast<int>(w))] = find(it->second);
        }
    r.connected = !ws.empty();
    for (std::size_t w = 1; w < ws.size(); ++w)
        if (find(static_cast<int>(w)) != find(0)) r.connected = false;
    if (!r.connected && r.detail.empty()) r.detail = ws.empty() ? "no witness" : "witness hypergraph is disconnected";

    const auto s = sorted_unique(c.start), t = sorted_unique(c.terminal);
    r.endpoints_isomorphic = !s.empty() && s != t && tuple_sets_isomorphic(s, t).has_value();
    for (const auto& rec : s)
        if (!d.find(rec) || std::binary_search(t.begin(), t.end(), rec)) r.endpoints_isomorphic = false;
    for (const auto& rec : t)
        if (!d.find(rec)) r.endpoints_isomorphic = false;
    if (!r.endpoints_isomorphic && r.detail.empty())
        r.detail = "endpoints are not isomorphic, disjoint and present";

    auto ends = s;
    ends.insert(ends.end(), t.begin(), t.end());
    const auto sc = constants_of(s), tc = constants_of(t);
    r.endpoint_constants = true;
    for (TupleId u = 0; u < d.tuple_count(); ++u) {
        if (exo[u]) continue;
        TupleRecord rec = d.record(u);
        if (std::find(ends.begin(), ends.end(), rec) != ends.end()) continue;
        if (inside_endpoint(rec, sc, tc)) {
            r.endpoint_constants = false;
            if (r.detail.empty()) r.detail = "endogenous tuple " + to_string(rec) + " uses only one endpoint's constants";
            break;
        }
    }
    return r;
}

OrPropertyResult check_or_property(const JoinPathCandidate& c) {
    OrPropertyResult r;
    const auto s = ids_of(c.db, c.start), t = ids_of(c.db, c.terminal);
    auto both = s;
    both.insert(both.end(), t.begin(), t.end());
    r.c = resilience_value(c.query, c.db);
    r.removed[0] = resilience_value(c.query, c.db.without(s));
    r.removed[1] = resilience_value(c.query, c.db.without(t));
    r.removed[2] = resilience_value(c.query, c.db.without(both));
    r.passes = r.c >= 1 && r.removed[0] == r.c - 1 && r.removed[1] == r.c - 1 && r.removed[2] == r.c - 1;
    return r;
}

Database glue(const JoinPathCandidate& a, const JoinPathCandidate& b) {
    const auto ca = db_constants(a.db), cb = db_constants(b.db);
    std::set<std::string> shared;
    std::set_intersection(ca.begin(), ca.end(), cb.begin(), cb.end(), std::inserter(shared, shared.end()));
    bool ok = false;
    for (const auto* ea : {&a.start, &a.terminal})
        for (const auto* eb : {&b.start, &b.terminal})
            if (sorted_unique(*ea) == sorted_unique(*eb) && constants_of(*ea) == shared) ok = true;
    if (!ok) throw Error("composition", "join paths must share exactly one identical endpoint and no other constant");
    Database d = fresh_db(a.query, a.db.semantics());
    merge_into(d, a.db.records());
    merge_into(d, b.db.records());
    return d;
}

Database compose(const JoinPathCandidate& a, const JoinPathCandidate& b, Gluing g) {
    const auto& ea = (g == Gluing::start_start) ? a.start : a.terminal;
    const auto& eb = (g == Gluing::terminal_terminal) ? b.terminal : b.start;
    auto iso = tuple_sets_isomorphic(eb, ea);
    if (!iso) throw Error("composition", "glued endpoints are not isomorphic");
    Fresh fresh(db_constants(a.db));
    ConstMap m = *iso;
    for (const auto& k : db_constants(b.db))
        if (!m.count(k)) m[k] = fresh();
    JoinPathCandidate rb;
    rb.query = b.query;
    rb.db = fresh_db(b.query, b.db.semantics());
    merge_into(rb.db, rename(b.db.records(), m));
    rb.start = rename(b.start, m);
    rb.terminal = rename(b.terminal, m);
    return glue(a, rb);
}

Database triangle_database(const JoinPathCandidate& c) {
    auto f = tuple_sets_isomorphic(c.start, c.terminal);
    if (!f) throw Error("composition", "endpoints are not isomorphic");
    const auto all = db_constants(c.db);
    const auto sc = constants_of(c.start), tc = constants_of(c.terminal);
    Fresh fresh(all);
    ConstMap s1, s2, s3;
    for (const auto& k : all) s1[k] = k;
    for (const auto& k : all) s2[k] = sc.count(k) ? f->at(k) : fresh();
    for (const auto& k : all) {
        if (sc.count(k)) s3[k] = k;
        else if (tc.count(k)) s3[k] = s2[k];
        else s3[k] = fresh();
    }
    Database d = fresh_db(c.query, c.db.semantics());
    const auto recs = c.db.records();
    for (const auto* m : {&s1, &s2, &s3}) merge_into(d, rename(recs, *m));
    return d;
}

TriangleResult check_triangle_nonleaking(const JoinPathCandidate& c) {
    TriangleResult r;
    r.expected = 3 * compute_witnesses(c.query, c.db).size();
    r.witnesses = compute_witnesses(c.query, triangle_database(c)).size();
    r.nonleaking = r.witnesses == r.expected;
    return r;
}

IJPCertificate verify_ijp(const JoinPathCandidate& c) {
    IJPCertificate cert;
    cert.candidate = c;
    cert.witnesses = compute_witnesses(c.query, c.db).size();
    auto jp = check_join_path(c);
    cert.checks.reduced = jp.reduced;
    cert.checks.connected = jp.connected;
    cert.checks.endpoints_valid = jp.endpoints_isomorphic && jp.endpoint_constants;
    auto fail = [&](const std::string& msg) {
        if (cert.failure.empty()) cert.failure = msg;
    };
    if (!jp.reduced) fail("reduced: " + jp.detail);
    else if (!jp.connected) fail("connected: " + jp.detail);
    else if (!cert.checks.endpoints_valid) fail("endpoints: " + jp.detail);
    try {
        auto orp = check_or_property(c);
        cert.resilience_c = orp.c;
        cert.removed_resilience = orp.removed;
        cert.checks.or_property = orp.passes;
        if (!orp.passes)
            fail("or-property: c=" + std::to_string(orp.c) + ", removals give " + std::to_string(orp.removed[0]) +
                 "," + std::to_string(orp.removed[1]) + "," + std::to_string(orp.removed[2]));
    } catch (const Error& e) {
        fail(std::string("or-property: ") + e.what());
    }
    if (cert.checks.endpoints_valid) {
        auto tri = check_triangle_nonleaking(c);
        cert.triangle_witnesses = tri.witnesses;
        cert.checks.nonleaking = tri.nonleaking;
        if (!tri.nonleaking)
            fail("nonleaking: triangle has " + std::to_string(tri.witnesses) + " witnesses, expected " +
                 std::to_string(tri.expected));
    } else {
        fail("nonleaking: needs valid endpoints");
    }
    return cert;
}

namespace {

nlohmann::json records_json(const std::vector<TupleRecord>& ts) {
    auto a = nlohmann::json::array();
    for (const auto& r : ts) a.push_back(to_string(r));
    return a;
}

}  // namespace

std::string certificate_json(const IJPCertificate& cert) {
    const auto& c = cert.candidate;
    nlohmann::json j;
    j["query"] = render(c.query);
    j["semantics"] = to_string(c.db.semantics());
    auto tuples = nlohmann::json::array();
    for (const auto& r : c.db.records())
        tuples.push_back({{"tuple", to_string(r)}, {"mult", r.multiplicity}, {"exo", r.exogenous}});
    j["database"] = tuples;
    j["start"] = records_json(c.start);
    j["terminal"] = records_json(c.terminal);
    j["c"] = cert.resilience_c;
    j["removed_resilience"] = cert.removed_resilience;
    j["witnesses"] = cert.witnesses;
    j["triangle_witnesses"] = cert.triangle_witnesses;
    j["checks"] = {{"reduced", cert.checks.reduced},
                   {"connected", cert.checks.connected},
                   {"endpoints_valid", cert.checks.endpoints_valid},
                   {"or_property", cert.checks.or_property},
                   {"nonleaking", cert.checks.nonleaking}};
    j["valid"] = cert.valid();
    if (!cert.failure.empty()) j["failure"] = cert.failure;
    return j.dump(2);
}

JoinPathCandidate candidate_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error("parse", std::string("certificate: ") + e.what());
    }
    try {
        JoinPathCandidate c;
        c.query = parse_query(j.at("query").get<std::string>());
        c.db = fresh_db(c.query, parse_semantics(j.value("semantics", std::string("set"))));
        for (const auto& t : j.at("database")) {
            TupleRecord r = parse_tuple(t.at("tuple").get<std::string>());
            r.multiplicity = t.value("mult", 1);
            r.exogenous = t.value("exo", false);
            c.db.add(r);
        }
        for (const auto& s : j.at("start")) c.start.push_back(parse_tuple(s.get<std::string>()));
        for (const auto& s : j.at("terminal")) c.terminal.push_back(parse_tuple(s.get<std::string>()));
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error("parse", std::string("certificate: ") + e.what());
    }
}

int brute_force_vertex_cover(const Graph& g) {
    if (g.nodes > 24) throw Error("cap", "vertex cover brute force limited to 24 nodes");
    int best = g.nodes;
    for (std::uint32_t s = 0; s < (1u << g.nodes); ++s) {
        const int size = std::popcount(s);
        if (size >= best) continue;
        bool covers = std::all_of(g.edges.begin(), g.edges.end(),
                                  [&](const auto& e) { return (s >> e.first & 1) || (s >> e.second & 1); });
        if (covers) best = size;
    }
    return best;
}

VcReduction vertex_cover_reduction(const IJPCertificate& cert, const Graph& g) {
    if (!cert.valid()) throw Error("precondition", "vertex-cover reduction needs a valid certificate");
    const auto& c = cert.candidate;
    const auto sc = constants_of(c.start), tc = constants_of(c.terminal);
    for (const auto& k : sc)
        if (tc.count(k)) throw Error("precondition", "endpoints share constants; the edge gadget needs disjoint endpoints");
    auto f = tuple_sets_isomorphic(c.start, c.terminal);  // start -> terminal
    ConstMap finv;
    for (const auto& [k, v] : *f) finv[v] = k;

    VcReduction out;
    out.c = cert.resilience_c;
    out.edge_count = g.edges.size();
    out.db = fresh_db(c.query, c.db.semantics());
    long next = 1;
    auto fresh = [&] { return std::to_string(next++); };
    // node u is a copy of the start endpoint on its own constants
    std::vector<ConstMap> node(g.nodes);
    for (int u = 0; u < g.nodes; ++u)
        for (const auto& k : sc) node[u][k] = fresh();
    const auto recs = c.db.records();
    const auto all = db_constants(c.db);
    for (auto [u, v] : g.edges) {
        if (u == v) throw Error("usage", "graph has a self loop");
        if (u > v) std::swap(u, v);
        ConstMap m;
        for (const auto& k : all) {
            if (sc.count(k)) m[k] = node[u].at(k);
            else if (tc.count(k)) m[k] = node[v].at(finv.at(k));
            else m[k] = fresh();
        }
        merge_into(out.db, rename(recs, m));
    }
    return out;
}

std::string to_string(SearchStatus s) {
    switch (s) {
        case SearchStatus::found: return "found";
        case SearchStatus::exhausted: return "exhausted";
        case SearchStatus::budget: return "budget";
    }
    return "?";
}

namespace {

std::vector<Query> exogenous_variants(const Query& q, ExogenousMode mode) {
    std::vector<Query> out{q};
    if (mode == ExogenousMode::atoms) return out;
    std::vector<int> pool;
    for (std::size_t a = 0; a < q.size(); ++a) {
        if (q.atom(a).exogenous) continue;
        bool dominating = false;
        for (std::size_t b = 0; b < q.size(); ++b)
            if (dominates(q, static_cast<int>(a), static_cast<int>(b))) dominating = true;
        if (mode == ExogenousMode::unrestricted || dominating) pool.push_back(static_cast<int>(a));
    }
    if (pool.size() > 12) throw Error("cap", "too many candidate exogenous atoms");
    for (std::uint32_t s = 1; s < (1u << pool.size()); ++s) {
        std::vector<bool> exo(q.size());
        for (std::size_t a = 0; a < q.size(); ++a) exo[a] = q.atom(a).exogenous;
        for (std::size_t i = 0; i < pool.size(); ++i)
            if (s >> i & 1) exo[pool[i]] = true;
        if (std::all_of(exo.begin(), exo.end(), [](bool b) { return b; })) continue;
        out.push_back(q.with_exogenous(exo));
    }
    return out;
}

// Depth-first growth of databases as unions of valuations over {1..d}.
class Searcher {
public:
    Searcher(const Query& q, const std::vector<TupleRecord>& start, const std::vector<TupleRecord>& terminal,
             const SearchOptions& opt, long* budget_left)
        : q_(q), start_(sorted_unique(start)), terminal_(sorted_unique(terminal)), opt_(opt), budget_(budget_left) {
        build();
    }

    // nullopt while nothing found at this level
    std::optional<IJPCertificate> run(int max_witnesses, SearchResult& stats) {
        stats_ = &stats;
        limit_ = max_witnesses;
        visited_.clear();
        in_state_.assign(tuples_.size(), 0);
        is_witness_.assign(vals_.size(), 0);
        state_.clear();
        witness_count_ = 0;
        found_.reset();
        out_of_budget_ = false;
        std::vector<int> roots;
        for (int s : start_ids_)
            for (int v : by_tuple_[s]) roots.push_back(v);
        std::sort(roots.begin(), roots.end());
        roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
        for (int v : roots) {
            if (found_ || out_of_budget_) break;
            step(v);
        }
        return found_;
    }

    bool out_of_budget() const { return out_of_budget_; }

private:
    Query q_;
    std::vector<TupleRecord> start_, terminal_;
    SearchOptions opt_;
    long* budget_;
    SearchResult* stats_ = nullptr;
    int limit_ = 0;

    std::vector<TupleRecord> tuples_;
    std::vector<char> tuple_exo_;
    std::vector<std::vector<int>> vals_;     // valuation -> sorted tuple ids
    std::vector<std::vector<int>> by_tuple_;  // tuple -> allowed valuations
    std::vector<int> start_ids_, end_ids_;

    std::vector<char> in_state_, is_witness_;
    std::vector<int> state_;
    int witness_count_ = 0;
    std::unordered_set<std::string> visited_;
    std::optional<IJPCertificate> found_;
    bool out_of_budget_ = false;

    void build() {
        const int nv = static_cast<int>(q_.variables().size());
        const int d = opt_.domain;
        std::map<TupleRecord, int> index;
        auto tuple_id = [&](TupleRecord r) {
            auto [it, fresh] = index.emplace(r, static_cast<int>(tuples_.size()));
            if (fresh) {
                tuples_.push_back(r);
                tuple_exo_.push_back(q_.relation_exogenous(r.relation));
            }
            return it->second;
        };
        auto ends = start_;
        ends.insert(ends.end(), terminal_.begin(), terminal_.end());
        for (const auto& r : ends) {
            if (q_.atom_of_relation(r.relation) < 0) throw Error("usage", "endpoint relation not in query");
            for (const auto& k : r.constants) {
                int v = std::stoi(k);
                if (v < 1 || v > d) throw Error("usage", "endpoint constant outside the domain");
            }
        }
        for (const auto& r : start_) start_ids_.push_back(tuple_id(r));
        for (const auto& r : ends) end_ids_.push_back(tuple_id(r));
        const auto sc = constants_of(start_), tc = constants_of(terminal_);

        long total = 1;
        for (int i = 0; i < nv; ++i) {
            total *= d;
            if (total > 5000000) throw Error("cap", "valuation space too large for native search");
        }
        std::vector<int> val(nv);
        for (long code = 0; code < total; ++code) {
            long x = code;
            for (int i = nv - 1; i >= 0; --i) {
                val[i] = static_cast<int>(x % d) + 1;
                x /= d;
            }
            std::vector<int> ts;
            bool banned = false;
            for (std::size_t a = 0; a < q_.size() && !banned; ++a) {
                TupleRecord r;
                r.relation = q_.atom(a).relation;
                for (int v : q_.atom_var_ids(a)) r.constants.push_back(std::to_string(val[v]));
                const int id = tuple_id(r);
                ts.push_back(id);
                // endogenous tuples other than the endpoints may not live on one endpoint's constants
                if (!tuple_exo_[id] && std::find(end_ids_.begin(), end_ids_.end(), id) == end_ids_.end() &&
                    inside_endpoint(r, sc, tc))
                    banned = true;
            }
            if (banned) continue;
            std::sort(ts.begin(), ts.end());
            ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
            vals_.push_back(std::move(ts));
        }
        by_tuple_.assign(tuples_.size(), {});
        for (std::size_t v = 0; v < vals_.size(); ++v)
            for (int t : vals_[v]) by_tuple_[t].push_back(static_cast<int>(v));
    }

    std::string key() const {
        auto s = state_;
        std::sort(s.begin(), s.end());
        std::string k;
        for (int t : s) k += std::to_string(t) + ',';
        return k;
    }

    bool covers_endpoints() const {
        return std::all_of(end_ids_.begin(), end_ids_.end(), [&](int t) { return in_state_[t] != 0; });
    }

    void step(int v) {
        std::vector<int> added_tuples, added_witnesses;
        for (int t : vals_[v])
            if (!in_state_[t]) {
                in_state_[t] = 1;
                state_.push_back(t);
                added_tuples.push_back(t);
            }
        for (int t : added_tuples)
            for (int w : by_tuple_[t]) {
                if (is_witness_[w]) continue;
                if (std::all_of(vals_[w].begin(), vals_[w].end(), [&](int u) { return in_state_[u] != 0; })) {
                    is_witness_[w] = 1;
                    added_witnesses.push_back(w);
                }
            }
        witness_count_ += static_cast<int>(added_witnesses.size());
        if (witness_count_ <= limit_) expand();
        witness_count_ -= static_cast<int>(added_witnesses.size());
        for (int w : added_witnesses) is_witness_[w] = 0;
        for (int t : added_tuples) in_state_[t] = 0;
        state_.resize(state_.size() - added_tuples.size());
    }

    void expand() {
        if (found_ || out_of_budget_) return;
        if (!visited_.insert(key()).second) return;
        if (--*budget_ < 0) {
            out_of_budget_ = true;
            return;
        }
        ++stats_->explored;
        if (covers_endpoints()) {
            ++stats_->verified;
            JoinPathCandidate c;
            c.query = q_;
            c.db = fresh_db(q_, opt_.semantics);
            auto s = state_;
            std::sort(s.begin(), s.end());
            for (int t : s) c.db.add(tuples_[t]);
            c.start = start_;
            c.terminal = terminal_;
            IJPCertificate cert = verify_ijp(c);
            if (cert.valid()) {
                found_ = std::move(cert);
                return;
            }
        }
        if (witness_count_ == limit_) return;  // any extension adds a witness
        std::vector<int> next;
        for (int t : state_)
            for (int w : by_tuple_[t])
                if (!is_witness_[w]) next.push_back(w);
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        for (int w : next) {
            if (found_ || out_of_budget_) return;
            step(w);
        }
    }
};

}  // namespace

SearchResult search_ijp(const Query& q, const std::vector<TupleRecord>& start,
                        const std::vector<TupleRecord>& terminal, const SearchOptions& opt) {
    SearchResult res;
    long budget = opt.budget;
    std::vector<Searcher> searchers;
    for (const auto& variant : exogenous_variants(q, opt.exogenous))
        searchers.emplace_back(variant, start, terminal, opt, &budget);
    bool truncated = false;
    for (int k = 1; k <= opt.max_witnesses; ++k)
        for (auto& s : searchers) {
            auto cert = s.run(k, res);
            if (cert) {
                res.status = SearchStatus::found;
                res.certificate = std::move(cert);
                return res;
            }
            if (s.out_of_budget()) {
                truncated = true;
                res.status = SearchStatus::budget;
                return res;
            }
        }
    res.status = truncated ? SearchStatus::budget : SearchStatus::exhausted;
    return res;
}

std::vector<EndpointPattern> enumerate_endpoints(const Query& q) {
    const int nv = static_cast<int>(q.variables().size());
    Database canon = canonical_database(q, 1);
    const auto exo = exogenous_mask(q, canon);
    std::vector<TupleRecord> endo;
    for (TupleId t = 0; t < canon.tuple_count(); ++t)
        if (!exo[t]) endo.push_back(canon.record(t));
    if (endo.size() > 16) throw Error("cap", "too many endogenous atoms for endpoint enumeration");
    std::vector<EndpointPattern> out;
    for (std::uint32_t s = 1; s + 1 < (1u << endo.size()); ++s) {
        std::vector<TupleRecord> part;
        for (std::size_t i = 0; i < endo.size(); ++i)
            if (s >> i & 1) part.push_back(endo[i]);
        const auto shared = constants_of(part);
        // second canonical copy that keeps only the shared constants
        Database two = canon;
        for (std::size_t a = 0; a < q.size(); ++a) {
            std::vector<std::string> consts;
            for (int v : q.atom_var_ids(a)) {
                std::string k = std::to_string(v + 1);
                consts.push_back(shared.count(k) ? k : std::to_string(nv + v + 1));
            }
            two.add(q.atom(a).relation, consts);
        }
        if (compute_witnesses(q, two).size() != 2) continue;
        // relabel onto 1..n for the start and n+1..2n for the terminal
        ConstMap to_start, to_terminal;
        int n = 0;
        for (const auto& r : part)
            for (const auto& k : r.constants)
                if (!to_start.count(k)) {
                    ++n;
                    to_start[k] = std::to_string(n);
                }
        for (const auto& [k, v] : to_start) to_terminal[k] = std::to_string(std::stoi(v) + n);
        EndpointPattern p{sorted_unique(rename(part, to_start)), sorted_unique(rename(part, to_terminal))};
        bool dup = std::any_of(out.begin(), out.end(), [&](const EndpointPattern& o) {
            return tuple_sets_isomorphic(o.start, p.start).has_value();
        });
        if (!dup) out.push_back(std::move(p));
    }
    return out;
}

SearchResult search_ijp_all(const Query& q, const SearchOptions& opt) {
    auto patterns = enumerate_endpoints(q);
    const long n = static_cast<long>(patterns.size());
    std::vector<SearchResult> results(n);
    std::vector<char> skipped(n, 0);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        if (static_cast<int>(constants_of(patterns[i].terminal).size() * 2) > opt.domain) {
            skipped[i] = 1;
            continue;
        }
        results[i] = search_ijp(q, patterns[i].start, patterns[i].terminal, opt);
    }
    SearchResult out;
    bool truncated = false;
    for (long i = 0; i < n; ++i) {
        if (skipped[i]) continue;
        out.explored += results[i].explored;
        out.verified += results[i].verified;
        if (results[i].status == SearchStatus::budget) truncated = true;
        if (!out.certificate && results[i].certificate) out.certificate = results[i].certificate;
    }
    out.status = out.certificate ? SearchStatus::found : (truncated ? SearchStatus::budget : SearchStatus::exhausted);
    return out;
}

}  // namespace rescq
