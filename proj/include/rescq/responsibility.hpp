#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rescq/lp.hpp"
#include "rescq/witness.hpp"

namespace rescq {

struct ResponsibilityAnswer {
    bool counterfactualizable = true;
    double value = 0.0;
    std::vector<TupleId> contingency;
    int preserved_witness = -1;  // index into the witness set
    std::string method;
    bool integral = true;
    // t split into several dissociated tuples; value is for the whole set
    bool set_based = false;
    long nodes = 0;
    std::optional<double> lp_bound;
    std::vector<double> per_linearization;
    double solve_seconds = 0.0;

    double rho() const { return counterfactualizable ? 1.0 / (1.0 + value) : 0.0; }
};

enum class RspMode { ilp, milp };

struct RspModel {
    LinearModel model;
    std::vector<TupleId> var_tuple;  // tuple variables come first
    std::vector<int> tuple_var;      // tuple -> variable or -1
    // witnesses containing t, grouped by identical tracked tuple sets
    std::vector<std::vector<int>> groups;
    std::vector<std::vector<TupleId>> tracked;
    std::vector<int> group_var;
    // some witness without t has no endogenous tuple
    bool unavoidable = false;
};

RspModel build_rsp_model(const Query& q, const Database& d, const WitnessSet& ws, TupleId t, RspMode mode);

ResponsibilityAnswer responsibility_ilp(const Query& q, const Database& d, TupleId t,
                                        const SolverOptions& opt = SolverOptions::from_env());
// one LP per preserved witness group, minimum taken
ResponsibilityAnswer responsibility_milp(const Query& q, const Database& d, TupleId t,
                                         const SolverOptions& opt = SolverOptions::from_env());
ResponsibilityAnswer responsibility_milp_serial(const Query& q, const Database& d, TupleId t,
                                                const SolverOptions& opt = SolverOptions::from_env());
// branch and bound directly on the mixed model
ResponsibilityAnswer responsibility_milp_bnb(const Query& q, const Database& d, TupleId t,
                                             const SolverOptions& opt = SolverOptions::from_env());
ResponsibilityAnswer brute_force_responsibility(const Query& q, const Database& d, TupleId t, int cap = 18);

// D - gamma satisfies q and D - gamma - removed does not
bool is_counterfactual(const Query& q, const Database& d, const std::vector<TupleId>& gamma,
                       const std::vector<TupleId>& removed);

// LP for preserving group g: tracked tuples of g fixed to 0, witness variables dropped
LinearModel preserved_group_lp(const RspModel& rm, std::size_t g);

// resolves "R(1,2)" against d; throws when absent
TupleId lookup_tuple(const Database& d, const std::string& text);

}  // namespace rescq
