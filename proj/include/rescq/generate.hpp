#pragma once

#include <cstdint>

#include "rescq/model.hpp"

namespace rescq {

// n distinct tuples per relation drawn uniformly from {1..d}^arity; bag multiplicities uniform in [1, max_bag)
Database generate_instance(const Query& q, int domain, long n, Semantics s, int max_bag, std::uint64_t seed);

}  // namespace rescq
