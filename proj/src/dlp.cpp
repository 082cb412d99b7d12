#include "rescq/dlp.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <sstream>

namespace rescq {

namespace {

std::string asp_name(const std::string& rel) {
    std::string s;
    for (char ch : rel) s += std::isalnum(static_cast<unsigned char>(ch)) ? static_cast<char>(std::tolower(ch)) : '_';
    if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) s = "r_" + s;
    return s;
}

std::vector<std::string> asp_vars(const Query& q) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < q.variables().size(); ++i) {
        std::string v = q.variables()[i];
        bool ok = !v.empty() && std::isalpha(static_cast<unsigned char>(v[0]));
        for (char ch : v) ok = ok && (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_');
        if (ok) v[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(v[0])));
        if (!ok || v[0] == 'T' || std::find(out.begin(), out.end(), v) != out.end()) v = "V" + std::to_string(i);
        out.push_back(v);
    }
    return out;
}

std::string join(const std::vector<std::string>& xs, const std::string& sep = ",") {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? sep : "") + xs[i];
    return out;
}

struct Layout {
    std::vector<std::string> rels;           // query relations in first-appearance order
    std::map<std::string, int> arity;
    std::map<std::string, bool> exogenous;
    std::vector<std::string> vars;           // head variables
    std::vector<std::string> tids;           // T1..Tm
    std::vector<std::string> atom_args;      // per atom, argument list
};

Layout layout(const Query& q) {
    Layout l;
    for (std::size_t a = 0; a < q.size(); ++a) {
        const auto& rel = q.atom(a).relation;
        if (!l.arity.count(rel)) {
            l.rels.push_back(rel);
            l.arity[rel] = static_cast<int>(q.atom(a).vars.size());
            l.exogenous[rel] = q.relation_exogenous(rel);
        }
    }
    l.vars = asp_vars(q);
    for (std::size_t a = 0; a < q.size(); ++a) {
        l.tids.push_back("T" + std::to_string(a + 1));
        std::vector<std::string> args;
        for (int v : q.atom_var_ids(a)) args.push_back(l.vars[v]);
        l.atom_args.push_back(join(args));
    }
    return l;
}

std::string wildcards(int arity) {
    std::string s = "Tid";
    for (int i = 0; i < arity; ++i) s += ",_";
    return s;
}

// 1-based TID of a constant vector in lexicographic enumeration over {1..d}
long tid_of(const std::vector<std::string>& consts, int d) {
    long id = 0;
    for (const auto& c : consts) id = id * d + (std::stol(c) - 1);
    return id + 1;
}

}  // namespace

std::string emit_dlp(const Query& q, int d, const std::vector<TupleRecord>& start,
                     const std::vector<TupleRecord>& terminal, bool min_witnesses) {
    if (d < 1) throw Error("usage", "domain must be positive");
    const Layout l = layout(q);
    for (const auto* ends : {&start, &terminal})
        for (const auto& r : *ends) {
            if (!l.arity.count(r.relation)) throw Error("usage", "endpoint relation not in query: " + r.relation);
            for (const auto& c : r.constants)
                if (std::stol(c) < 1 || std::stol(c) > d) throw Error("usage", "endpoint constant outside the domain");
        }
    std::ostringstream os;
    const std::string head = join(l.vars) + "," + join(l.tids);
    const std::string witness = "witness(" + head + ")";

    // domain facts
    for (const auto& rel : l.rels) {
        const int k = l.arity.at(rel);
        long total = 1;
        for (int i = 0; i < k; ++i) total *= d;
        std::vector<int> digits(k, 1);
        for (long id = 1; id <= total; ++id) {
            os << asp_name(rel) << '(' << id;
            for (int x : digits) os << ',' << x;
            os << ").\n";
            for (int i = k - 1; i >= 0; --i) {
                if (++digits[i] <= d) break;
                digits[i] = 1;
            }
        }
    }
    os << '\n';
    for (const auto& rel : l.rels)
        os << "indb(" << asp_name(rel) << ",Tid,1) | indb(" << asp_name(rel) << ",Tid,0) :- " << asp_name(rel) << '('
           << wildcards(l.arity.at(rel)) << ").\n";
    os << witness << " :- ";
    std::vector<std::string> body;
    for (std::size_t a = 0; a < q.size(); ++a)
        body.push_back(asp_name(q.atom(a).relation) + "(" + l.tids[a] + "," + l.atom_args[a] + ")");
    for (std::size_t a = 0; a < q.size(); ++a) body.push_back("indb(" + asp_name(q.atom(a).relation) + "," + l.tids[a] + ",1)");
    os << join(body) << ".\n";
    os << "number_of_witnesses(K) :- #count{" << head << " : " << witness << " } = K.\n\n";
    os << "range_triangle(1..3).ijp_domain(1.." << d << ").\n\n";

    // endpoint conditions
    const auto c1 = constants_of(start), c2 = constants_of(terminal);
    for (const auto& c : c1) os << "end1const(" << c << ").\n";
    for (const auto& c : c2) os << "end2const(" << c << ").\n";
    os << '\n';
    for (int e = 1; e <= 2; ++e) {
        const std::string tag = "end" + std::to_string(e);
        const std::size_t n = (e == 1 ? start : terminal).size();
        for (std::size_t a = 0; a < q.size(); ++a) {
            const auto& rel = q.atom(a).relation;
            if (l.exogenous.at(rel)) continue;
            std::vector<std::string> conds;
            for (int v : q.atom_var_set(a)) conds.push_back(tag + "const(" + l.vars[v] + ")");
            os << tag << "witness(" << join(l.tids) << "):-" << witness << ",indb(" << asp_name(rel) << ','
               << l.tids[a] << ",1)," << asp_name(rel) << '(' << l.tids[a] << ',' << l.atom_args[a] << "),"
               << join(conds) << ".\n";
        }
        os << ":-not#count{" << join(l.tids) << ':' << tag << "witness(" << join(l.tids) << ")}"
           << (n == 1 ? "=1" : ">=1") << ".\n";
    }
    os << "\n\n";
    for (int e = 1; e <= 2; ++e) {
        std::vector<std::string> conds;
        for (const auto& v : l.vars) conds.push_back("end" + std::to_string(e) + "const(" + v + ")");
        os << ":- " << witness << "," << join(conds) << ".\n";
    }
    // no endogenous tuple other than the endpoints may live on one endpoint's constants
    for (const auto* ends : {&start, &terminal})
        for (const auto& r : *ends)
            os << "endpoint(" << asp_name(r.relation) << ',' << tid_of(r.constants, d) << ").\n";
    for (int e = 1; e <= 2; ++e)
        for (const auto& rel : l.rels) {
            if (l.exogenous.at(rel)) continue;
            std::vector<std::string> args, conds;
            for (int i = 0; i < l.arity.at(rel); ++i) {
                args.push_back("C" + std::to_string(i));
                conds.push_back("end" + std::to_string(e) + "const(C" + std::to_string(i) + ")");
            }
            os << ":- indb(" << asp_name(rel) << ",Tid,1)," << asp_name(rel) << "(Tid," << join(args) << "),"
               << join(conds) << ",not endpoint(" << asp_name(rel) << ",Tid).\n";
        }
    os << "\n\n";

    // resilience of D, D-S, D-T, D-S-T checked by saturation
    auto pre = [&](int db, const std::vector<TupleRecord>& ts) {
        for (const auto& r : ts) {
            const std::string fact = "(" + asp_name(r.relation) + "," + std::to_string(tid_of(r.constants, d)) + ",1).\n";
            os << "valid_res" << db << fact << "invalid_res" << db << fact;
        }
    };
    pre(2, start);
    pre(3, terminal);
    pre(4, start);
    pre(4, terminal);
    os << '\n';
    for (const char* kind : {"invalid_res", "valid_res"})
        for (int db = 1; db <= 4; ++db)
            for (const auto& rel : l.rels) {
                if (l.exogenous.at(rel)) continue;
                const auto n = asp_name(rel);
                os << kind << db << '(' << n << ",Tid,1) | " << kind << db << '(' << n << ",Tid,0) :- " << n << '('
                   << wildcards(l.arity.at(rel)) << ").\n";
            }
    os << "\n\n";
    auto survives = [&](const std::string& kind, int db) {
        std::string s = witness;
        for (std::size_t a = 0; a < q.size(); ++a)
            if (!l.exogenous.at(q.atom(a).relation))
                s += "," + kind + std::to_string(db) + "(" + asp_name(q.atom(a).relation) + "," + l.tids[a] + ",0)";
        return s;
    };
    for (int db = 1; db <= 4; ++db) {
        os << "invalid_resilience" << db << " :- " << survives("invalid_res", db) << ".\n";
        os << "invalid_resilience" << db << " :- #count{Table,Tid: invalid_res" << db << "(Table,Tid,1)} >= K"
           << (db == 4 ? "+1" : "") << ",res(K).\n";
    }
    os << '\n';
    for (int db = 1; db <= 4; ++db) {
        for (const auto& rel : l.rels) {
            if (l.exogenous.at(rel)) continue;
            const auto n = asp_name(rel);
            for (int b = 0; b <= 1; ++b)
                os << "invalid_res" << db << '(' << n << ",Tid," << b << ") :- invalid_resilience" << db << ',' << n
                   << '(' << wildcards(l.arity.at(rel)) << ").\n";
        }
        os << '\n';
    }
    for (int db = 1; db <= 4; ++db) os << ":- not invalid_resilience" << db << ".\n";
    os << "\n\n";
    for (int db = 1; db <= 4; ++db) {
        os << ":- " << survives("valid_res", db) << ".\n";
        if (db == 1) os << "res(K) :- #count{Table,Tid: valid_res1(Table,Tid,1)} = K.\n";
        else
            os << ":- not #count{Table,Tid: valid_res" << db << "(Table,Tid,1)} = K" << (db == 4 ? "+1" : "")
               << ",res(K).\n";
    }
    os << "\n\n";

    // three isomorphic copies glued into a triangle
    std::map<std::string, std::string> f;
    if (auto iso = tuple_sets_isomorphic(start, terminal)) f = *iso;
    const long fresh_base = 4L * (d + 1);
    for (const auto& c : c1) {
        os << "iso_map(" << c << ",1," << c << ").\n";
        os << "iso_map(" << c << ",2," << (f.count(c) ? f.at(c) : c) << ").\n";
        os << "iso_map(" << c << ",3," << c << ").\n";
    }
    for (const auto& c : c2) {
        if (c1.count(c)) continue;
        const long fresh = std::stol(c) + fresh_base;
        os << "iso_map(" << c << ",1," << c << ").\n";
        os << "iso_map(" << c << ",2," << fresh << ").\n";
        os << "iso_map(" << c << ",3," << fresh << ").\n";
    }
    os << "iso_map(C,I,X) :- range_triangle(I),ijp_domain(C),X = C+(" << d << "+1)*I,not end1const(C),not end2const(C).\n\n";
    for (const auto& rel : l.rels) {
        const auto n = asp_name(rel);
        const int k = l.arity.at(rel);
        std::vector<std::string> vi, v;
        for (int i = 0; i < k; ++i) {
            vi.push_back("VI" + std::to_string(i));
            v.push_back("V" + std::to_string(i));
        }
        for (int copy = 1; copy <= 3; ++copy) {
            std::vector<std::string> maps;
            for (int i = 0; i < k; ++i) maps.push_back("iso_map(" + v[i] + "," + std::to_string(copy) + "," + vi[i] + ")");
            os << "ijp_iso_" << copy << '_' << n << "(TID," << join(vi) << "):-indb(" << n << ",TID,1)," << n << "(TID,"
               << join(v) << ")," << join(maps) << ".\n";
        }
        os << '\n';
        for (int copy = 1; copy <= 3; ++copy)
            os << "ijp_iso_triangle_" << n << "(TID," << join(v) << ") :- ijp_iso_" << copy << '_' << n << "(TID,"
               << join(v) << ").\n";
    }
    std::vector<std::string> tri;
    for (std::size_t a = 0; a < q.size(); ++a)
        tri.push_back("ijp_iso_triangle_" + asp_name(q.atom(a).relation) + "(" + l.tids[a] + "," + l.atom_args[a] + ")");
    os << "ijp_triangle_witness(" << join(l.vars) << ") :- " << join(tri) << ".\n";
    os << ":- number_of_witnesses(K),not  #count{" << join(l.vars) << " : ijp_triangle_witness(" << join(l.vars)
       << ") }= 3*K.\n\n";

    if (min_witnesses) os << ":~ " << witness << ". [1@1," << join(l.vars) << "]\n";
    os << "\n\n#show.\n";
    os << "#show number_of_witnesses(K) : number_of_witnesses(K).\n";
    os << "#show witness(" << join(l.vars) << ") : " << witness << ".\n";
    os << "#show res(K) : res(K).\n";
    return os.str();
}

AspModel parse_asp_model(const std::string& text, const Query& q, const std::set<std::string>& start_constants,
                         const std::set<std::string>& terminal_constants, Semantics s) {
    std::istringstream in(text);
    std::string line, model, first;
    bool after_answer = false, have_answer = false;
    while (std::getline(in, line)) {
        if (line.rfind("Answer:", 0) == 0) {
            after_answer = true;
            continue;
        }
        if (after_answer) {
            model = line;
            have_answer = true;
            after_answer = false;
        }
        if (first.empty() && line.find_first_not_of(" \t\r") != std::string::npos) first = line;
    }
    if (!have_answer) model = first;

    AspModel out;
    out.candidate.query = q;
    out.candidate.db = Database(s);
    declare_relations(q, out.candidate.db);
    const std::regex atom_re(R"(^([a-z_][A-Za-z0-9_]*)\(([^()]*)\)$)");
    std::istringstream words(model);
    std::string w;
    std::size_t witnesses = 0;
    while (words >> w) {
        std::smatch m;
        if (!std::regex_match(w, m, atom_re)) throw Error("parse", "malformed model atom: " + w);
        std::vector<std::string> args;
        std::stringstream ss(m[2].str());
        std::string a;
        while (std::getline(ss, a, ',')) {
            if (a.empty() || a.find_first_not_of("-0123456789") != std::string::npos)
                throw Error("parse", "non-integer argument in " + w);
            args.push_back(a);
        }
        const std::string name = m[1].str();
        if (name == "witness") {
            if (args.size() != q.variables().size()) throw Error("parse", "witness arity mismatch: " + w);
            for (std::size_t i = 0; i < q.size(); ++i) {
                std::vector<std::string> consts;
                for (int v : q.atom_var_ids(i)) consts.push_back(args[v]);
                if (!out.candidate.db.find(q.atom(i).relation, consts))
                    out.candidate.db.add(q.atom(i).relation, consts, 1, false);
            }
            ++witnesses;
        } else if (name == "res" && args.size() == 1) {
            out.claimed_res = std::stoi(args[0]);
        } else if (name == "number_of_witnesses" && args.size() == 1) {
            out.claimed_witnesses = std::stoi(args[0]);
        } else {
            throw Error("parse", "unexpected model atom: " + w);
        }
    }
    if (witnesses == 0) throw Error("parse", "model has no witness atoms");
    const auto exo = exogenous_mask(q, out.candidate.db);
    for (TupleId t = 0; t < out.candidate.db.tuple_count(); ++t) {
        if (exo[t]) continue;
        const auto r = out.candidate.db.record(t);
        auto inside = [&](const std::set<std::string>& cs) {
            return std::all_of(r.constants.begin(), r.constants.end(), [&](const std::string& c) { return cs.count(c) > 0; });
        };
        if (inside(start_constants)) out.candidate.start.push_back(r);
        else if (inside(terminal_constants)) out.candidate.terminal.push_back(r);
    }
    return out;
}

}  // namespace rescq
