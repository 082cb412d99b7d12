#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace rescq {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { ge, le, eq };

struct LpVar {
    std::string name;
    double lb = 0.0;
    double ub = kInf;
    bool integral = false;
    double obj = 0.0;
};

struct LpConstraint {
    std::vector<std::pair<int, double>> terms;
    Sense sense = Sense::ge;
    double rhs = 0.0;
    std::string name;
};

struct LinearModel {
    std::vector<LpVar> vars;
    std::vector<LpConstraint> cons;

    int add_var(std::string name, double lb, double ub, bool integral, double obj);
    void add_constraint(std::vector<std::pair<int, double>> terms, Sense sense, double rhs,
                        std::string name = {});

    double objective(const std::vector<double>& x) const;
    // index of the first violated constraint or bound, -1 if none
    int first_violation(const std::vector<double>& x, double tol) const;
    bool all_integral(const std::vector<double>& x, double tol) const;
    LinearModel relaxed() const;

    // LP-format-like text for cross-checks with external solvers
    std::string dump() const;
};

enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit, time_limit };
std::string to_string(SolveStatus s);

struct SolveResult {
    SolveStatus status = SolveStatus::infeasible;
    double objective = 0.0;
    std::vector<double> x;
    bool is_integral = false;
    bool has_solution = false;
    long pivots = 0;
    long nodes = 0;  // branch-and-bound LPs beyond the root
    double bound = -kInf;
};

struct SolverOptions {
    long pivot_cap = 1000000;
    long node_cap = 1000000;
    double time_limit_s = 0.0;  // 0 means none
    double tol = 1e-6;
    // reads RESCQ_PIVOT_CAP / RESCQ_NODE_CAP when set
    static SolverOptions from_env();
};

SolveResult solve_lp(const LinearModel& m, const SolverOptions& opt = SolverOptions::from_env());
SolveResult solve_milp(const LinearModel& m, const SolverOptions& opt = SolverOptions::from_env());

struct GapResult {
    SolveResult lp;
    SolveResult ilp;
};
GapResult integrality_gap(const LinearModel& m, const SolverOptions& opt = SolverOptions::from_env());

}  // namespace rescq
