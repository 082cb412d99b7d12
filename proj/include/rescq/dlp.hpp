#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rescq/ijp.hpp"

namespace rescq {

// Answer-set program whose models are IJPs over constants {1..d} with the given endpoints.
std::string emit_dlp(const Query& q, int domain, const std::vector<TupleRecord>& start,
                     const std::vector<TupleRecord>& terminal, bool min_witnesses);

struct AspModel {
    JoinPathCandidate candidate;
    std::optional<int> claimed_res;
    std::optional<int> claimed_witnesses;
};

// Reads the last answer of solver output. Witness arguments follow the query's variable order;
// endpoints are the endogenous tuples living on the given endpoint constants.
AspModel parse_asp_model(const std::string& text, const Query& q, const std::set<std::string>& start_constants,
                         const std::set<std::string>& terminal_constants, Semantics s = Semantics::set);

}  // namespace rescq
