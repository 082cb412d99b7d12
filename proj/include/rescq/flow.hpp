#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rescq/resilience.hpp"
#include "rescq/responsibility.hpp"

namespace rescq {

struct FlowEdge {
    int from = 0;
    int to = 0;
    std::int64_t cap = 0;
    bool infinite = false;
    int atom = -1;
    int tuple = -1;  // original tuple id
};

// Layered s-t network. Interior nodes are (cut position, separator projection).
struct FlowNetwork {
    int source = 0;
    int sink = 1;
    std::vector<std::string> labels{"source", "sink"};
    std::vector<FlowEdge> edges;

    int add_node(std::string label);
    std::size_t node_count() const { return labels.size(); }
    // number of source-to-sink paths, saturating at UINT64_MAX
    std::uint64_t count_paths() const;
    // `u v cap [tuple]` per line, cap written as inf for uncuttable edges
    std::string dump(const Database& d) const;
};

struct GraphOptions {
    std::vector<std::vector<int>> added;  // per atom, variables added by a dissociation
    std::vector<char> infinite_atom;      // per atom
    std::vector<char> infinite_tuple;     // per tuple
    std::vector<char> skip_tuple;         // per tuple: edges dropped entirely
    // true: one edge per dissociated tuple seen in a witness; false: one edge per original tuple
    bool witness_keyed = true;
};

// Separators are the shared variables of neighbouring atoms, after any dissociation.
FlowNetwork build_linearized_graph(const Query& q, const Database& d, const WitnessSet& ws,
                                   const std::vector<int>& ordering, const GraphOptions& opt);

// exact graph along a linear ordering
FlowNetwork build_flow_graph(const Query& q, const Database& d, const WitnessSet& ws,
                             const std::vector<int>& ordering);

struct CutResult {
    std::int64_t value = 0;
    bool finite = true;  // false when every cut must use an uncuttable edge
    std::vector<int> cut_edges;
    std::int64_t flow = 0;
};

CutResult max_flow_min_cut(const FlowNetwork& g);

// sorted distinct tuples of the cut edges
std::vector<TupleId> cut_tuples(const FlowNetwork& g, const CutResult& c);

struct FlowPlan {
    std::vector<int> ordering;
    std::vector<std::vector<int>> added;
    std::vector<int> exogenized;  // atoms treated as uncuttable beyond those already exogenous
};

// ordering whose dissociation only touches atoms in `allowed`, fewest new exogenous atoms first
std::optional<FlowPlan> plan_linearization(const Query& q, const std::vector<char>& allowed);

ResilienceAnswer resilience_via_flow(const Query& q, const Database& d);
ResponsibilityAnswer responsibility_via_flow(const Query& q, const Database& d, TupleId t);

}  // namespace rescq
