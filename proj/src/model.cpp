#include "rescq/model.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

namespace rescq {

namespace fs = std::filesystem;

std::string to_string(Semantics s) { return s == Semantics::set ? "set" : "bag"; }

Semantics parse_semantics(const std::string& s) {
    if (s == "set") return Semantics::set;
    if (s == "bag") return Semantics::bag;
    throw Error("usage", "unknown semantics '" + s + "'");
}

Query::Query(std::string name, std::vector<Atom> atoms)
    : name_(std::move(name)), atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw Error("query", "empty query body");
    std::unordered_map<std::string, int> idx;
    for (const auto& a : atoms_) {
        if (a.relation.empty()) throw Error("query", "atom without relation name");
        if (a.vars.empty()) throw Error("query", "atom " + a.relation + " has no variables");
        std::vector<int> ids;
        for (const auto& v : a.vars) {
            auto it = idx.find(v);
            if (it == idx.end()) {
                it = idx.emplace(v, static_cast<int>(vars_.size())).first;
                vars_.push_back(v);
            }
            ids.push_back(it->second);
        }
        atom_ids_.push_back(ids);
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        atom_sets_.push_back(ids);
    }
    if (vars_.size() > 64) throw Error("query", "more than 64 variables");
    for (const auto& s : atom_sets_) {
        std::uint64_t m = 0;
        for (int v : s) m |= std::uint64_t{1} << v;
        masks_.push_back(m);
    }
    // connectivity over variables
    std::vector<int> parent(vars_.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> root = [&](int x) {
        return parent[x] == x ? x : parent[x] = root(parent[x]);
    };
    for (const auto& s : atom_sets_)
        for (std::size_t i = 1; i < s.size(); ++i) parent[root(s[i])] = root(s[0]);
    for (std::size_t v = 1; v < vars_.size(); ++v)
        if (root(static_cast<int>(v)) != root(0)) throw Error("query", "query not connected");
}

int Query::var_index(const std::string& v) const {
    auto it = std::find(vars_.begin(), vars_.end(), v);
    return it == vars_.end() ? -1 : static_cast<int>(it - vars_.begin());
}

bool Query::self_join_free() const {
    std::set<std::string> seen;
    for (const auto& a : atoms_)
        if (!seen.insert(a.relation).second) return false;
    return true;
}

std::vector<std::string> Query::relations() const {
    std::vector<std::string> out;
    for (const auto& a : atoms_)
        if (std::find(out.begin(), out.end(), a.relation) == out.end()) out.push_back(a.relation);
    return out;
}

bool Query::relation_exogenous(const std::string& rel) const {
    for (const auto& a : atoms_)
        if (a.relation == rel && a.exogenous) return true;
    return false;
}

int Query::atom_of_relation(const std::string& rel) const {
    for (std::size_t i = 0; i < atoms_.size(); ++i)
        if (atoms_[i].relation == rel) return static_cast<int>(i);
    return -1;
}

Query Query::with_exogenous(const std::vector<bool>& exo) const {
    auto atoms = atoms_;
    for (std::size_t i = 0; i < atoms.size() && i < exo.size(); ++i)
        atoms[i].exogenous = atoms[i].exogenous || exo[i];
    return Query(name_, atoms);
}

bool Query::operator==(const Query& o) const {
    if (name_ != o.name_ || atoms_.size() != o.atoms_.size()) return false;
    for (std::size_t i = 0; i < atoms_.size(); ++i)
        if (atoms_[i].relation != o.atoms_[i].relation || atoms_[i].vars != o.atoms_[i].vars ||
            atoms_[i].exogenous != o.atoms_[i].exogenous)
            return false;
    return true;
}

namespace {

struct Lexer {
    const std::string& s;
    std::size_t pos = 0;

    void skip() {
        while (pos < s.size()) {
            if (std::isspace(static_cast<unsigned char>(s[pos]))) {
                ++pos;
            } else if (s[pos] == '%' || s[pos] == '#') {
                while (pos < s.size() && s[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw Error("syntax", "syntax error at position " + std::to_string(pos) + ": " + what);
    }
    bool peek(char c) {
        skip();
        return pos < s.size() && s[pos] == c;
    }
    void expect(char c) {
        if (!peek(c)) fail(std::string("expected '") + c + "'");
        ++pos;
    }
    void expect(const char* tok) {
        skip();
        std::string t(tok);
        if (s.compare(pos, t.size(), t) != 0) fail("expected '" + t + "'");
        pos += t.size();
    }
    static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    }
    std::string ident() {
        skip();
        if (pos >= s.size() || !ident_start(s[pos])) fail("expected identifier");
        std::size_t b = pos;
        while (pos < s.size() && ident_char(s[pos])) ++pos;
        return s.substr(b, pos - b);
    }
    std::string term() {
        skip();
        if (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '"' ||
                               s[pos] == '\'' || s[pos] == '-'))
            throw Error("query", "constants not supported (position " + std::to_string(pos) + ")");
        return ident();
    }
};

}  // namespace

Query parse_query(const std::string& text) {
    Lexer lx{text};
    std::string name = lx.ident();
    lx.expect(":-");
    std::vector<Atom> atoms;
    while (true) {
        Atom a;
        if (lx.peek('*')) {
            ++lx.pos;
            a.exogenous = true;
        }
        a.relation = lx.ident();
        lx.expect('(');
        a.vars.push_back(lx.term());
        while (lx.peek(',')) {
            ++lx.pos;
            a.vars.push_back(lx.term());
        }
        lx.expect(')');
        atoms.push_back(std::move(a));
        if (lx.peek(',')) {
            ++lx.pos;
            continue;
        }
        break;
    }
    lx.expect('.');
    lx.skip();
    if (lx.pos != text.size()) lx.fail("trailing input");
    return Query(name, atoms);
}

std::string render(const Query& q) {
    std::ostringstream os;
    os << q.name() << " :- ";
    for (std::size_t i = 0; i < q.size(); ++i) {
        const auto& a = q.atom(i);
        if (i) os << ", ";
        if (a.exogenous) os << '*';
        os << a.relation << '(';
        for (std::size_t j = 0; j < a.vars.size(); ++j) os << (j ? "," : "") << a.vars[j];
        os << ')';
    }
    os << '.';
    return os.str();
}

Query load_query(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot open query file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_query(ss.str());
}

std::string to_string(const TupleRecord& r) {
    std::string s = r.relation + "(";
    for (std::size_t i = 0; i < r.constants.size(); ++i) s += (i ? "," : "") + r.constants[i];
    return s + ")";
}

TupleRecord parse_tuple(const std::string& text) {
    TupleRecord r;
    auto lp = text.find('(');
    auto rp = text.rfind(')');
    if (lp == std::string::npos || rp == std::string::npos || rp < lp)
        throw Error("syntax", "malformed tuple '" + text + "'");
    auto trim = [](std::string x) {
        auto b = x.find_first_not_of(" \t");
        auto e = x.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : x.substr(b, e - b + 1);
    };
    r.relation = trim(text.substr(0, lp));
    std::stringstream ss(text.substr(lp + 1, rp - lp - 1));
    std::string item;
    while (std::getline(ss, item, ',')) r.constants.push_back(trim(item));
    if (r.relation.empty() || r.constants.empty()) throw Error("syntax", "malformed tuple '" + text + "'");
    return r;
}

int Database::declare_relation(const std::string& name, int arity) {
    auto it = rel_index_.find(name);
    if (it != rel_index_.end()) {
        if (rel_arity_[it->second] != arity)
            throw Error("arity", "arity mismatch for relation " + name);
        return it->second;
    }
    int id = static_cast<int>(rel_names_.size());
    rel_names_.push_back(name);
    rel_arity_.push_back(arity);
    rel_tuples_.emplace_back();
    rel_index_.emplace(name, id);
    return id;
}

int Database::relation_id(const std::string& name) const {
    auto it = rel_index_.find(name);
    return it == rel_index_.end() ? -1 : it->second;
}

ConstId Database::intern(const std::string& c) {
    auto it = const_index_.find(c);
    if (it != const_index_.end()) return it->second;
    ConstId id = static_cast<ConstId>(const_names_.size());
    const_names_.push_back(c);
    const_index_.emplace(c, id);
    return id;
}

std::optional<ConstId> Database::constant_id(const std::string& c) const {
    auto it = const_index_.find(c);
    if (it == const_index_.end()) return std::nullopt;
    return it->second;
}

std::string Database::key(int rel, const std::vector<ConstId>& args) {
    std::string k(reinterpret_cast<const char*>(&rel), sizeof rel);
    k.append(reinterpret_cast<const char*>(args.data()), args.size() * sizeof(ConstId));
    return k;
}

TupleId Database::add_ids(int rel, const std::vector<ConstId>& args, std::int64_t mult, bool exo) {
    if (static_cast<int>(args.size()) != rel_arity_[rel])
        throw Error("arity", "arity mismatch for relation " + rel_names_[rel]);
    if (mult < 1) throw Error("multiplicity", "non-positive multiplicity");
    if (semantics_ == Semantics::set && mult > 1)
        throw Error("multiplicity", "multiplicity > 1 under set semantics");
    auto k = key(rel, args);
    auto it = tuple_index_.find(k);
    if (it != tuple_index_.end()) {
        auto& t = tuples_[it->second];
        if (semantics_ == Semantics::bag) t.mult += mult;
        t.exo = t.exo || exo;
        return it->second;
    }
    TupleId id = static_cast<TupleId>(tuples_.size());
    tuples_.push_back(StoredTuple{rel, args, mult, exo});
    rel_tuples_[rel].push_back(id);
    tuple_index_.emplace(std::move(k), id);
    return id;
}

TupleId Database::add(const std::string& rel, const std::vector<std::string>& consts,
                      std::int64_t mult, bool exo) {
    int r = declare_relation(rel, static_cast<int>(consts.size()));
    std::vector<ConstId> args;
    args.reserve(consts.size());
    for (const auto& c : consts) args.push_back(intern(c));
    return add_ids(r, args, mult, exo);
}

std::optional<TupleId> Database::find_ids(int rel, const std::vector<ConstId>& args) const {
    auto it = tuple_index_.find(key(rel, args));
    if (it == tuple_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<TupleId> Database::find(const std::string& rel,
                                      const std::vector<std::string>& consts) const {
    int r = relation_id(rel);
    if (r < 0) return std::nullopt;
    std::vector<ConstId> args;
    for (const auto& c : consts) {
        auto id = constant_id(c);
        if (!id) return std::nullopt;
        args.push_back(*id);
    }
    return find_ids(r, args);
}

TupleRecord Database::record(TupleId t) const {
    const auto& st = tuples_[t];
    TupleRecord r;
    r.relation = rel_names_[st.rel];
    for (auto c : st.args) r.constants.push_back(const_names_[c]);
    r.multiplicity = st.mult;
    r.exogenous = st.exo;
    return r;
}

std::string Database::tuple_string(TupleId t) const { return to_string(record(t)); }

std::vector<TupleRecord> Database::records() const {
    std::vector<TupleRecord> out;
    out.reserve(tuples_.size());
    for (TupleId t = 0; t < tuples_.size(); ++t) out.push_back(record(t));
    return out;
}

void Database::set_multiplicity(TupleId t, std::int64_t m) {
    if (m < 1) throw Error("multiplicity", "non-positive multiplicity");
    if (semantics_ == Semantics::set && m > 1)
        throw Error("multiplicity", "multiplicity > 1 under set semantics");
    tuples_[t].mult = m;
}

Database Database::without(const std::vector<TupleId>& removed) const {
    std::vector<char> drop(tuples_.size(), 0);
    for (auto t : removed) drop.at(t) = 1;
    Database out(semantics_);
    out.rel_names_ = rel_names_;
    out.rel_arity_ = rel_arity_;
    out.rel_index_ = rel_index_;
    out.rel_tuples_.assign(rel_names_.size(), {});
    out.const_names_ = const_names_;
    out.const_index_ = const_index_;
    for (TupleId t = 0; t < tuples_.size(); ++t)
        if (!drop[t]) out.add_ids(tuples_[t].rel, tuples_[t].args, tuples_[t].mult, tuples_[t].exo);
    return out;
}

bool Database::same_content(const Database& o) const {
    if (semantics_ != o.semantics_) return false;
    auto a = records();
    auto b = o.records();
    auto full = [](const TupleRecord& x, const TupleRecord& y) {
        return std::tie(x.relation, x.constants, x.multiplicity, x.exogenous) <
               std::tie(y.relation, y.constants, y.multiplicity, y.exogenous);
    };
    std::sort(a.begin(), a.end(), full);
    std::sort(b.begin(), b.end(), full);
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] == b[i]) || a[i].multiplicity != b[i].multiplicity || a[i].exogenous != b[i].exogenous)
            return false;
    return true;
}

std::vector<bool> exogenous_mask(const Query& q, const Database& d) {
    std::vector<bool> rel_exo(d.relation_count(), false);
    for (const auto& a : q.atoms())
        if (a.exogenous) {
            int r = d.relation_id(a.relation);
            if (r >= 0) rel_exo[r] = true;
        }
    std::vector<bool> out(d.tuple_count());
    for (TupleId t = 0; t < d.tuple_count(); ++t) out[t] = d.tuple(t).exo || rel_exo[d.tuple(t).rel];
    return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        auto b = s.find_first_not_of(" \t\r");
        auto e = s.find_last_not_of(" \t\r");
        s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    }
    return out;
}

}  // namespace

Database load_database(const std::string& dir, Semantics s) {
    if (!fs::is_directory(dir)) throw Error("io", "not a directory: " + dir);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    Database d(s);
    for (const auto& p : files) {
        std::ifstream in(p);
        std::string rel = p.stem().string();
        std::string line;
        std::vector<std::string> header;
        std::size_t lineno = 0;
        int mult_col = -1, exo_col = -1, arity = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            auto cells = split_csv(line);
            std::string where = p.filename().string() + ":" + std::to_string(lineno);
            if (header.empty()) {
                header = cells;
                for (std::size_t i = 0; i < header.size(); ++i) {
                    if (header[i] == "mult") mult_col = static_cast<int>(i);
                    else if (header[i] == "exo") exo_col = static_cast<int>(i);
                }
                arity = static_cast<int>(header.size()) - (mult_col >= 0) - (exo_col >= 0);
                if (arity < 1) throw Error("arity", where + ": relation without columns");
                if ((mult_col >= 0 && mult_col < arity) || (exo_col >= 0 && exo_col < arity))
                    throw Error("syntax", where + ": mult/exo must follow the constant columns");
                if (mult_col >= 0 && s == Semantics::set)
                    throw Error("multiplicity", where + ": mult column under set semantics");
                d.declare_relation(rel, arity);
                continue;
            }
            if (cells.size() != header.size())
                throw Error("arity", where + ": arity mismatch (" + std::to_string(cells.size()) +
                                         " cells, expected " + std::to_string(header.size()) + ")");
            std::vector<std::string> consts(cells.begin(), cells.begin() + arity);
            std::int64_t mult = 1;
            bool exo = false;
            if (mult_col >= 0) {
                try {
                    mult = std::stoll(cells[mult_col]);
                } catch (...) {
                    throw Error("multiplicity", where + ": bad multiplicity");
                }
                if (mult < 1) throw Error("multiplicity", where + ": non-positive multiplicity");
            }
            if (exo_col >= 0) {
                if (cells[exo_col] != "0" && cells[exo_col] != "1")
                    throw Error("syntax", where + ": exo must be 0 or 1");
                exo = cells[exo_col] == "1";
            }
            d.add(rel, consts, mult, exo);
        }
        if (header.empty()) throw Error("syntax", p.filename().string() + ": missing header");
    }
    return d;
}

void write_database(const Database& d, const std::string& dir) {
    fs::create_directories(dir);
    for (std::size_t r = 0; r < d.relation_count(); ++r) {
        std::ofstream out(fs::path(dir) / (d.relation_name(static_cast<int>(r)) + ".csv"));
        bool any_exo = false;
        for (auto t : d.relation_tuples(static_cast<int>(r))) any_exo = any_exo || d.tuple(t).exo;
        bool bag = d.semantics() == Semantics::bag;
        for (int i = 0; i < d.arity(static_cast<int>(r)); ++i) out << (i ? "," : "") << 'c' << (i + 1);
        if (bag) out << ",mult";
        if (any_exo) out << ",exo";
        out << '\n';
        for (auto t : d.relation_tuples(static_cast<int>(r))) {
            const auto& st = d.tuple(t);
            for (std::size_t i = 0; i < st.args.size(); ++i) out << (i ? "," : "") << d.constant_name(st.args[i]);
            if (bag) out << ',' << st.mult;
            if (any_exo) out << ',' << (st.exo ? 1 : 0);
            out << '\n';
        }
    }
}

void declare_relations(const Query& q, Database& d) {
    for (const auto& a : q.atoms()) d.declare_relation(a.relation, static_cast<int>(a.vars.size()));
}

Database canonical_database(const Query& q, int copies, Semantics s) {
    if (copies < 1) throw Error("usage", "copies must be positive");
    Database d(s);
    declare_relations(q, d);
    const int nv = static_cast<int>(q.variables().size());
    for (int k = 0; k < copies; ++k)
        for (std::size_t i = 0; i < q.size(); ++i) {
            std::vector<std::string> consts;
            for (int v : q.atom_var_ids(i)) consts.push_back(std::to_string(k * nv + v + 1));
            d.add(q.atom(i).relation, consts);
        }
    return d;
}

std::set<std::string> constants_of(const std::vector<TupleRecord>& ts) {
    std::set<std::string> out;
    for (const auto& t : ts) out.insert(t.constants.begin(), t.constants.end());
    return out;
}

namespace {

std::optional<ConstMap> iso_search(std::vector<TupleRecord> a, std::vector<TupleRecord> b) {
    if (a.size() != b.size()) return std::nullopt;
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    if (a.size() != b.size()) return std::nullopt;
    ConstMap fwd, back;
    std::vector<char> used(b.size(), 0);
    std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
        if (i == a.size()) return true;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (used[j] || b[j].relation != a[i].relation || b[j].constants.size() != a[i].constants.size())
                continue;
            std::vector<std::string> added;
            bool ok = true;
            for (std::size_t p = 0; p < a[i].constants.size() && ok; ++p) {
                const auto& x = a[i].constants[p];
                const auto& y = b[j].constants[p];
                auto f = fwd.find(x);
                auto g = back.find(y);
                if (f == fwd.end() && g == back.end()) {
                    fwd[x] = y;
                    back[y] = x;
                    added.push_back(x);
                } else if (f == fwd.end() || g == back.end() || f->second != y) {
                    ok = false;
                }
            }
            if (ok) {
                used[j] = 1;
                if (go(i + 1)) return true;
                used[j] = 0;
            }
            for (const auto& x : added) {
                back.erase(fwd[x]);
                fwd.erase(x);
            }
        }
        return false;
    };
    if (!go(0)) return std::nullopt;
    return fwd;
}

}  // namespace

std::optional<ConstMap> tuple_sets_isomorphic(const std::vector<TupleRecord>& a,
                                              const std::vector<TupleRecord>& b) {
    // search from the canonically smaller side so that (a,b) and (b,a) give inverse maps
    auto sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sb < sa) {
        auto m = iso_search(b, a);
        if (!m) return std::nullopt;
        ConstMap inv;
        for (const auto& [k, v] : *m) inv[v] = k;
        return inv;
    }
    return iso_search(a, b);
}

}  // namespace rescq
