#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rescq/lp.hpp"
#include "rescq/witness.hpp"

namespace rescq {

struct JoinPathCandidate {
    Query query;
    Database db;
    std::vector<TupleRecord> start;
    std::vector<TupleRecord> terminal;
};

struct JoinPathChecks {
    bool reduced = false;
    bool connected = false;
    bool endpoints_isomorphic = false;  // isomorphic, non-identical, disjoint, present in the database
    bool endpoint_constants = false;    // no other endogenous tuple lives on one endpoint's constants
    std::string detail;

    bool ok() const { return reduced && connected && endpoints_isomorphic && endpoint_constants; }
};

JoinPathChecks check_join_path(const JoinPathCandidate& c);

struct OrPropertyResult {
    bool passes = false;
    int c = 0;
    // resilience without start, without terminal, without both
    std::array<int, 3> removed{};
};

OrPropertyResult check_or_property(const JoinPathCandidate& c);

enum class Gluing { start_start, terminal_terminal, terminal_start };

// Union of two join paths sharing exactly one identical endpoint and no other constant.
Database glue(const JoinPathCandidate& a, const JoinPathCandidate& b);
// Renames b apart from a except for the glued endpoint, then glues.
Database compose(const JoinPathCandidate& a, const JoinPathCandidate& b, Gluing g);

// three copies: S1-T1 = S2-T2, S3 = S1, T3 = T2
Database triangle_database(const JoinPathCandidate& c);

struct TriangleResult {
    bool nonleaking = false;
    std::size_t witnesses = 0;
    std::size_t expected = 0;
};

TriangleResult check_triangle_nonleaking(const JoinPathCandidate& c);

struct IjpChecks {
    bool reduced = false;
    bool connected = false;
    bool endpoints_valid = false;
    bool or_property = false;
    bool nonleaking = false;
};

struct IJPCertificate {
    JoinPathCandidate candidate;
    int resilience_c = 0;
    std::array<int, 3> removed_resilience{};
    std::size_t witnesses = 0;
    std::size_t triangle_witnesses = 0;
    IjpChecks checks;
    std::string failure;  // first failing check, empty when valid

    bool valid() const {
        return checks.reduced && checks.connected && checks.endpoints_valid && checks.or_property &&
               checks.nonleaking;
    }
};

IJPCertificate verify_ijp(const JoinPathCandidate& c);

std::string certificate_json(const IJPCertificate& cert);
JoinPathCandidate candidate_from_json(const std::string& text);

struct Graph {
    int nodes = 0;
    std::vector<std::pair<int, int>> edges;
};

int brute_force_vertex_cover(const Graph& g);

struct VcReduction {
    Database db;
    int c = 0;
    std::size_t edge_count = 0;
    // resilience predicted for a vertex cover of size k
    long predicted(long k) const { return k + static_cast<long>(edge_count) * (c - 1); }
};

VcReduction vertex_cover_reduction(const IJPCertificate& cert, const Graph& g);

enum class ExogenousMode { atoms, dominating, unrestricted };
enum class SearchStatus { found, exhausted, budget };
std::string to_string(SearchStatus s);

struct SearchOptions {
    int domain = 5;
    int max_witnesses = 8;
    long budget = 2000000;  // database states expanded
    ExogenousMode exogenous = ExogenousMode::atoms;
    Semantics semantics = Semantics::set;
};

struct SearchResult {
    SearchStatus status = SearchStatus::exhausted;
    std::optional<IJPCertificate> certificate;
    long explored = 0;
    long verified = 0;
};

SearchResult search_ijp(const Query& q, const std::vector<TupleRecord>& start,
                        const std::vector<TupleRecord>& terminal, const SearchOptions& opt);

struct EndpointPattern {
    std::vector<TupleRecord> start;
    std::vector<TupleRecord> terminal;  // start shifted onto fresh constants
};

std::vector<EndpointPattern> enumerate_endpoints(const Query& q);

// tries every endpoint pattern; patterns are searched in parallel, the first in pattern order wins
SearchResult search_ijp_all(const Query& q, const SearchOptions& opt);

}  // namespace rescq
