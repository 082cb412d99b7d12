#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "rescq/generate.hpp"
#include "rescq/model.hpp"
#include "rescq/witness.hpp"

namespace testing {

using namespace rescq;

#ifndef DATA_DIR
#define DATA_DIR "data"
#endif

inline Query q(const std::string& text) { return parse_query(text); }

inline const char* kQ2 = "q2 :- R(x,y), S(y,z).";
inline const char* kQ3 = "q3 :- R(x,y), S(y,z), T(z,u).";
inline const char* kQ4 = "q4 :- P(u,x), R(x,y), S(y,z), T(z,v).";
inline const char* kQ5 = "q5 :- L(a,u), P(u,x), R(x,y), S(y,z), T(z,v).";
inline const char* kQ2WE = "q2we :- A(x), R(x,y), S(y,z), B(z).";
inline const char* kTri = "qtri :- R(x,y), S(y,z), T(z,x).";
inline const char* kATri = "qatri :- A(x), R(x,y), S(y,z), T(z,x).";
inline const char* kABTri = "qabtri :- A(x), R(x,y), S(y,z), T(z,x), B(z).";
inline const char* k3Star = "q3star :- R(x), S(y), T(z), W(x,y,z).";
inline const char* k2SJ = "q2sj :- R(x,y), R(y,z).";

// database from "R(1,2)" style strings; "R(1,2)x3" sets multiplicity, a trailing '*' marks exogenous
inline Database db(const Query& query, std::initializer_list<std::string> tuples, Semantics s = Semantics::set) {
    Database d(s);
    declare_relations(query, d);
    for (std::string t : tuples) {
        bool exo = false;
        std::int64_t mult = 1;
        if (!t.empty() && t.back() == '*') {
            exo = true;
            t.pop_back();
        }
        if (auto x = t.rfind(")x"); x != std::string::npos) {
            mult = std::stoll(t.substr(x + 2));
            t.resize(x + 1);
        }
        TupleRecord r = parse_tuple(t);
        r.multiplicity = mult;
        r.exogenous = exo;
        d.add(r);
    }
    return d;
}

// random instance with n tuples per relation over a small domain; relations too small for n are filled up
inline Database random_db(const Query& query, std::mt19937_64& rng, Semantics s, int domain, int n, int max_bag = 4) {
    Database d(s);
    declare_relations(query, d);
    for (const auto& rel : query.relations()) {
        const Atom& atom = query.atom(query.atom_of_relation(rel));
        long space = 1;
        for (std::size_t i = 0; i < atom.vars.size(); ++i) space *= domain;
        Database part = generate_instance(Query("g", {atom}), domain, std::min<long>(n, space), s, max_bag, rng());
        for (const auto& r : part.records()) d.add(r);
    }
    return d;
}

inline std::size_t endogenous_count(const Query& query, const Database& d) {
    auto exo = exogenous_mask(query, d);
    return static_cast<std::size_t>(std::count(exo.begin(), exo.end(), false));
}

// valuations found by trying every assignment of active-domain constants; independent of the join planner
inline std::set<std::vector<std::string>> naive_valuations(const Query& query, const Database& d) {
    std::set<std::string> dom;
    for (TupleId t = 0; t < d.tuple_count(); ++t)
        for (ConstId c : d.tuple(t).args) dom.insert(d.constant_name(c));
    std::vector<std::string> consts(dom.begin(), dom.end());
    const std::size_t nv = query.variables().size();
    std::set<std::vector<std::string>> out;
    if (consts.empty()) return out;
    std::vector<std::size_t> idx(nv, 0);
    while (true) {
        bool ok = true;
        for (std::size_t a = 0; a < query.size() && ok; ++a) {
            std::vector<std::string> args;
            for (int v : query.atom_var_ids(a)) args.push_back(consts[idx[v]]);
            ok = d.find(query.atom(a).relation, args).has_value();
        }
        if (ok) {
            std::vector<std::string> val;
            for (auto i : idx) val.push_back(consts[i]);
            out.insert(val);
        }
        std::size_t k = 0;
        while (k < nv && ++idx[k] == consts.size()) idx[k++] = 0;
        if (k == nv) break;
    }
    return out;
}

}  // namespace testing
