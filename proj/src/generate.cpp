#include "rescq/generate.hpp"

#include <algorithm>
#include <random>
#include <unordered_set>

namespace rescq {

Database generate_instance(const Query& q, int d, long n, Semantics s, int max_bag, std::uint64_t seed) {
    if (d < 1 || n < 0) throw Error("usage", "domain must be positive and tuple count non-negative");
    if (s == Semantics::bag && max_bag < 2) throw Error("usage", "max bag size must be at least 2");
    std::mt19937_64 rng(seed);
    Database db(s);
    declare_relations(q, db);
    for (const auto& rel : q.relations()) {
        const int a = q.atom(q.atom_of_relation(rel)).vars.size();
        double space = 1;
        for (int i = 0; i < a; ++i) space *= d;
        if (static_cast<double>(n) > space)
            throw Error("usage", "relation " + rel + " has only " + std::to_string(static_cast<long>(space)) +
                                     " possible tuples");
        const auto total = static_cast<std::uint64_t>(space);
        // Floyd's algorithm for sampling without replacement
        std::vector<std::uint64_t> codes;
        std::unordered_set<std::uint64_t> chosen;
        for (std::uint64_t j = total - n; j < total; ++j) {
            std::uint64_t r = std::uniform_int_distribution<std::uint64_t>(0, j)(rng);
            if (!chosen.insert(r).second) {
                chosen.insert(j);
                codes.push_back(j);
            } else {
                codes.push_back(r);
            }
        }
        std::sort(codes.begin(), codes.end());
        std::uniform_int_distribution<int> mult(1, std::max(1, max_bag - 1));
        for (auto code : codes) {
            std::vector<std::string> consts(a);
            for (int i = a - 1; i >= 0; --i) {
                consts[i] = std::to_string(code % d + 1);
                code /= d;
            }
            db.add(rel, consts, s == Semantics::bag ? mult(rng) : 1, false);
        }
    }
    return db;
}

}  // namespace rescq
