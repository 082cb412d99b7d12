#pragma once

#include <iosfwd>
#include <vector>

#include "rescq/model.hpp"

namespace rescq {

struct Witness {
    std::vector<ConstId> valuation;    // indexed by query variable id
    std::vector<TupleId> atom_tuples;  // tuple used by each atom
    std::vector<TupleId> tuples;       // sorted distinct tuples
    bool contains(TupleId t) const;
};

struct WitnessSet {
    std::vector<Witness> witnesses;
    std::vector<std::vector<int>> tuple_index;  // tuple id -> witnesses using it

    std::size_t size() const { return witnesses.size(); }
    bool empty() const { return witnesses.empty(); }
    const std::vector<int>& containing(TupleId t) const;
};

WitnessSet compute_witnesses(const Query& q, const Database& d);
// single-threaded reference of the same join
WitnessSet compute_witnesses_serial(const Query& q, const Database& d);

bool query_holds(const Query& q, const Database& d);

// sorted endogenous tuples of w
std::vector<TupleId> endogenous_tuples(const Witness& w, const std::vector<bool>& exo);

bool has_p4_pattern(const WitnessSet& ws, const std::vector<bool>& exo);
bool has_p4_pattern_serial(const WitnessSet& ws, const std::vector<bool>& exo);

// one column per variable plus a `tuples` column
void write_witness_csv(std::ostream& os, const Query& q, const Database& d, const WitnessSet& ws);

}  // namespace rescq
