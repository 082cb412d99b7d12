#pragma once

#include "rescq/flow.hpp"

namespace rescq {

// Relaxation rounded at threshold 1/m (m = atom count).
ResilienceAnswer lp_rounding_res(const Query& q, const Database& d,
                                 const SolverOptions& opt = SolverOptions::from_env());
// Rounds each preserved-witness LP and keeps the cheapest; lp_bound is the MILP value.
ResponsibilityAnswer lp_rounding_rsp(const Query& q, const Database& d, TupleId t,
                                     const SolverOptions& opt = SolverOptions::from_env());

// Flow over the original tuples for every ordering modulo reversal. Spurious paths allowed.
ResilienceAnswer flow_ct_res(const Query& q, const Database& d, int max_atoms = 7);
ResponsibilityAnswer flow_ct_rsp(const Query& q, const Database& d, TupleId t, int max_atoms = 7);

// Flow over the original witnesses for every minimal dissociation.
ResilienceAnswer flow_cw_res(const Query& q, const Database& d);
ResponsibilityAnswer flow_cw_rsp(const Query& q, const Database& d, TupleId t);

}  // namespace rescq
