#pragma once

#include <array>
#include <string>
#include <vector>

#include "rescq/model.hpp"

namespace rescq {

enum class TriadStatus { active, deactivated, fully_deactivated };
enum class Problem { res, rsp };
enum class Verdict { ptime, npc, unknown };

std::string to_string(TriadStatus s);
std::string to_string(Problem p);
std::string to_string(Verdict v);

struct TriadReport {
    std::array<int, 3> atoms{};
    TriadStatus status = TriadStatus::active;
    // atom-index paths for the pairs (0,1), (1,2), (0,2), each avoiding the third atom's variables
    std::array<std::vector<int>, 3> paths;
};

struct ComplexityVerdict {
    Problem problem = Problem::res;
    Semantics semantics = Semantics::set;
    Verdict verdict = Verdict::unknown;
    std::string reason;
    std::vector<TriadReport> triads;
    int witness_triad = -1;    // index into triads explaining an npc verdict
    int dominating_atom = -1;  // t's atom when it dominates every deactivated triad
};

bool dominates(const Query& q, int a, int b);
std::vector<std::string> solitary_variables(const Query& q, int a);
bool fully_dominated(const Query& q, int a);
bool is_dominated(const Query& q, int a);

// atom path from a to b whose connecting variables avoid `banned`; empty if none
std::vector<int> avoiding_path(const Query& q, int a, int b, std::uint64_t banned);

std::vector<TriadReport> enumerate_triads(const Query& q);

ComplexityVerdict classify_res(const Query& q, Semantics s);
ComplexityVerdict classify_rsp(const Query& q, Semantics s, const std::string& t_relation);

// permutations of 0..m-1 with first < last (one representative per reversal pair)
std::vector<std::vector<int>> orderings_modulo_reversal(std::size_t m);
bool running_intersection(const Query& q, const std::vector<int>& ordering);
std::vector<std::vector<int>> linear_orderings(const Query& q);

struct Dissociation {
    std::vector<int> ordering;
    std::vector<std::vector<int>> added;  // per atom index, added variable ids
    std::size_t added_count() const;
};

// smallest additions that give `ordering` the running intersection property
std::vector<std::vector<int>> interval_closure(const Query& q, const std::vector<int>& ordering);
std::vector<Dissociation> minimal_dissociations(const Query& q);
Query apply_dissociation(const Query& q, const Dissociation& dis);

}  // namespace rescq
