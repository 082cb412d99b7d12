#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace rescq {

using ConstId = std::uint32_t;
using TupleId = std::uint32_t;

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(msg), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

enum class Semantics { set, bag };
std::string to_string(Semantics s);
Semantics parse_semantics(const std::string& s);

struct Atom {
    std::string relation;
    std::vector<std::string> vars;
    bool exogenous = false;
};

// Boolean conjunctive query. Variables are numbered by first appearance.
class Query {
public:
    Query() = default;
    Query(std::string name, std::vector<Atom> atoms);

    const std::string& name() const { return name_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    const Atom& atom(std::size_t i) const { return atoms_[i]; }

    const std::vector<std::string>& variables() const { return vars_; }
    int var_index(const std::string& v) const;
    // variable ids of atom i in argument order (repeats kept)
    const std::vector<int>& atom_var_ids(std::size_t i) const { return atom_ids_[i]; }
    // sorted distinct variable ids of atom i
    const std::vector<int>& atom_var_set(std::size_t i) const { return atom_sets_[i]; }
    std::uint64_t atom_mask(std::size_t i) const { return masks_[i]; }

    bool self_join_free() const;
    std::vector<std::string> relations() const;
    bool relation_exogenous(const std::string& rel) const;
    int atom_of_relation(const std::string& rel) const;  // first atom, -1 if absent

    Query with_exogenous(const std::vector<bool>& exo) const;

    bool operator==(const Query& o) const;

private:
    std::string name_;
    std::vector<Atom> atoms_;
    std::vector<std::string> vars_;
    std::vector<std::vector<int>> atom_ids_;
    std::vector<std::vector<int>> atom_sets_;
    std::vector<std::uint64_t> masks_;
};

Query parse_query(const std::string& text);
std::string render(const Query& q);
Query load_query(const std::string& path);

struct TupleRecord {
    std::string relation;
    std::vector<std::string> constants;
    std::int64_t multiplicity = 1;
    bool exogenous = false;

    bool operator<(const TupleRecord& o) const {
        return std::tie(relation, constants) < std::tie(o.relation, o.constants);
    }
    bool operator==(const TupleRecord& o) const {
        return relation == o.relation && constants == o.constants;
    }
};

std::string to_string(const TupleRecord& r);
TupleRecord parse_tuple(const std::string& text);

struct StoredTuple {
    int rel = 0;
    std::vector<ConstId> args;
    std::int64_t mult = 1;
    bool exo = false;
};

class Database {
public:
    explicit Database(Semantics s = Semantics::set) : semantics_(s) {}

    Semantics semantics() const { return semantics_; }

    int declare_relation(const std::string& name, int arity);
    int relation_id(const std::string& name) const;  // -1 if absent
    const std::string& relation_name(int rel) const { return rel_names_[rel]; }
    int arity(int rel) const { return rel_arity_[rel]; }
    std::size_t relation_count() const { return rel_names_.size(); }
    const std::vector<TupleId>& relation_tuples(int rel) const { return rel_tuples_[rel]; }

    ConstId intern(const std::string& c);
    std::optional<ConstId> constant_id(const std::string& c) const;
    const std::string& constant_name(ConstId c) const { return const_names_[c]; }
    std::size_t constant_count() const { return const_names_.size(); }

    // merges duplicates by summing multiplicity; exogenous flags are OR-ed
    TupleId add(const std::string& rel, const std::vector<std::string>& consts,
                std::int64_t mult = 1, bool exo = false);
    TupleId add(const TupleRecord& r) {
        return add(r.relation, r.constants, r.multiplicity, r.exogenous);
    }
    TupleId add_ids(int rel, const std::vector<ConstId>& args, std::int64_t mult = 1,
                    bool exo = false);

    std::optional<TupleId> find(const std::string& rel,
                                const std::vector<std::string>& consts) const;
    std::optional<TupleId> find(const TupleRecord& r) const {
        return find(r.relation, r.constants);
    }
    std::optional<TupleId> find_ids(int rel, const std::vector<ConstId>& args) const;

    std::size_t tuple_count() const { return tuples_.size(); }
    const StoredTuple& tuple(TupleId t) const { return tuples_[t]; }
    TupleRecord record(TupleId t) const;
    std::string tuple_string(TupleId t) const;
    std::vector<TupleRecord> records() const;

    void set_multiplicity(TupleId t, std::int64_t m);
    void set_exogenous(TupleId t, bool e) { tuples_[t].exo = e; }

    // copy without the listed tuples (relations and constants keep their ids)
    Database without(const std::vector<TupleId>& removed) const;

    bool same_content(const Database& o) const;

private:
    Semantics semantics_;
    std::vector<std::string> rel_names_;
    std::vector<int> rel_arity_;
    std::vector<std::vector<TupleId>> rel_tuples_;
    std::unordered_map<std::string, int> rel_index_;
    std::vector<std::string> const_names_;
    std::unordered_map<std::string, ConstId> const_index_;
    std::vector<StoredTuple> tuples_;
    std::unordered_map<std::string, TupleId> tuple_index_;

    static std::string key(int rel, const std::vector<ConstId>& args);
};

// Effective exogenous flag per tuple: tuple flag OR an exogenous atom over its relation.
std::vector<bool> exogenous_mask(const Query& q, const Database& d);

Database load_database(const std::string& dir, Semantics s);
void write_database(const Database& d, const std::string& dir);

// Declares every relation of q in d (empty if new).
void declare_relations(const Query& q, Database& d);

Database canonical_database(const Query& q, int copies, Semantics s = Semantics::set);

using ConstMap = std::map<std::string, std::string>;

std::optional<ConstMap> tuple_sets_isomorphic(const std::vector<TupleRecord>& a,
                                              const std::vector<TupleRecord>& b);

std::set<std::string> constants_of(const std::vector<TupleRecord>& ts);

}  // namespace rescq
