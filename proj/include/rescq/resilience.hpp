#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rescq/lp.hpp"
#include "rescq/witness.hpp"

namespace rescq {

struct ResilienceAnswer {
    double value = 0.0;
    std::vector<TupleId> contingency;
    std::string method;
    std::optional<double> lp_bound;
    bool integral = true;
    SolveStatus status = SolveStatus::optimal;
    long nodes = 0;
    // approximations: value of each linearization / ordering tried
    std::vector<double> per_linearization;
    double solve_seconds = 0.0;
};

// ILP[RES*] plus the bookkeeping needed to read answers back
struct ResModel {
    LinearModel model;
    std::vector<TupleId> var_tuple;            // variable -> tuple
    std::vector<std::vector<TupleId>> rows;    // endogenous tuples of each kept witness constraint
};

ResModel build_res_model(const Query& q, const Database& d, const WitnessSet& ws, bool presolve = true);

ResilienceAnswer resilience_ilp(const Query& q, const Database& d,
                                const SolverOptions& opt = SolverOptions::from_env());
ResilienceAnswer resilience_lp(const Query& q, const Database& d,
                               const SolverOptions& opt = SolverOptions::from_env());
ResilienceAnswer brute_force_resilience(const Query& q, const Database& d, int cap = 20);

double contingency_weight(const Database& d, const std::vector<TupleId>& ts);
// query false after deleting ts
bool destroys_query(const Query& q, const Database& d, const std::vector<TupleId>& ts);

}  // namespace rescq
