#include "rescq/lp.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <queue>
#include <sstream>
#include <tuple>

#include "rescq/model.hpp"

namespace rescq {

int LinearModel::add_var(std::string name, double lb, double ub, bool integral, double obj) {
    vars.push_back(LpVar{std::move(name), lb, ub, integral, obj});
    return static_cast<int>(vars.size()) - 1;
}

void LinearModel::add_constraint(std::vector<std::pair<int, double>> terms, Sense sense, double rhs,
                                 std::string name) {
    for (auto& [v, c] : terms)
        if (v < 0 || v >= static_cast<int>(vars.size()))
            throw Error("model", "constraint references undeclared variable");
    cons.push_back(LpConstraint{std::move(terms), sense, rhs, std::move(name)});
}

double LinearModel::objective(const std::vector<double>& x) const {
    double s = 0;
    for (std::size_t j = 0; j < vars.size(); ++j) s += vars[j].obj * x[j];
    return s;
}

int LinearModel::first_violation(const std::vector<double>& x, double tol) const {
    for (std::size_t i = 0; i < cons.size(); ++i) {
        double lhs = 0;
        for (auto [v, c] : cons[i].terms) lhs += c * x[v];
        const double r = cons[i].rhs;
        bool bad = (cons[i].sense == Sense::ge && lhs < r - tol) ||
                   (cons[i].sense == Sense::le && lhs > r + tol) ||
                   (cons[i].sense == Sense::eq && std::abs(lhs - r) > tol);
        if (bad) return static_cast<int>(i);
    }
    for (std::size_t j = 0; j < vars.size(); ++j)
        if (x[j] < vars[j].lb - tol || x[j] > vars[j].ub + tol) return static_cast<int>(cons.size() + j);
    return -1;
}

bool LinearModel::all_integral(const std::vector<double>& x, double tol) const {
    for (std::size_t j = 0; j < vars.size(); ++j)
        if (vars[j].integral && std::abs(x[j] - std::round(x[j])) > tol) return false;
    return true;
}

LinearModel LinearModel::relaxed() const {
    LinearModel r = *this;
    for (auto& v : r.vars) v.integral = false;
    return r;
}

namespace {

std::string lp_name(const std::string& s, std::size_t j) {
    std::string out = "x" + std::to_string(j) + "_";
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out;
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

std::string LinearModel::dump() const {
    std::ostringstream os;
    os << "\\ variables: " << vars.size() << ", constraints: " << cons.size() << '\n';
    for (std::size_t j = 0; j < vars.size(); ++j) os << "\\ " << lp_name(vars[j].name, j) << " = " << vars[j].name << '\n';
    os << "Minimize\n obj:";
    bool any = false;
    for (std::size_t j = 0; j < vars.size(); ++j)
        if (vars[j].obj != 0) {
            os << " + " << num(vars[j].obj) << ' ' << lp_name(vars[j].name, j);
            any = true;
        }
    if (!any) os << " 0";
    os << "\nSubject To\n";
    for (std::size_t i = 0; i < cons.size(); ++i) {
        os << " c" << i << ':';
        for (auto [v, c] : cons[i].terms)
            os << ' ' << (c < 0 ? "- " : "+ ") << num(std::abs(c)) << ' ' << lp_name(vars[v].name, v);
        if (cons[i].terms.empty()) os << " 0 " << lp_name(vars[0].name, 0);
        os << (cons[i].sense == Sense::ge ? " >= " : cons[i].sense == Sense::le ? " <= " : " = ")
           << num(cons[i].rhs) << '\n';
    }
    os << "Bounds\n";
    for (std::size_t j = 0; j < vars.size(); ++j) {
        os << ' ' << num(vars[j].lb) << " <= " << lp_name(vars[j].name, j);
        if (std::isfinite(vars[j].ub)) os << " <= " << num(vars[j].ub);
        os << '\n';
    }
    bool header = false;
    for (std::size_t j = 0; j < vars.size(); ++j)
        if (vars[j].integral) {
            if (!header) os << "General\n";
            header = true;
            os << ' ' << lp_name(vars[j].name, j) << '\n';
        }
    os << "End\n";
    return os.str();
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::iteration_limit: return "iteration_limit";
        case SolveStatus::time_limit: return "time_limit";
    }
    return "?";
}

SolverOptions SolverOptions::from_env() {
    SolverOptions o;
    if (const char* p = std::getenv("RESCQ_PIVOT_CAP")) o.pivot_cap = std::atol(p);
    if (const char* n = std::getenv("RESCQ_NODE_CAP")) o.node_cap = std::atol(n);
    return o;
}

namespace {

constexpr double kBox = 1e9;     // stand-in for missing bounds on the dual-feasible side
constexpr double kPivTol = 1e-9;
constexpr double kFeasTol = 1e-9;

// Bounded dual simplex on a dense tableau. Every row gets a slack whose bounds encode the
// sense, so the all-slack basis is always available and, with nonbasic variables placed at
// the bound their cost prefers, dual feasible from the start.
class DualSimplex {
public:
    DualSimplex(const LinearModel& m, const std::vector<double>& lb, const std::vector<double>& ub,
                const SolverOptions& opt)
        : n_(m.vars.size()), m_(m.cons.size()), N_(n_ + m_), opt_(opt) {
        T_.assign(m_ * N_, 0.0);
        beta_.assign(m_, 0.0);
        d_.assign(N_, 0.0);
        lo_.assign(N_, 0.0);
        hi_.assign(N_, 0.0);
        x_.assign(N_, 0.0);
        basic_row_.assign(N_, -1);
        at_upper_.assign(N_, 0);
        basis_.resize(m_);
        boxed_.assign(N_, 0);
        for (std::size_t j = 0; j < n_; ++j) {
            lo_[j] = lb[j];
            hi_[j] = ub[j];
            d_[j] = m.vars[j].obj;
        }
        for (std::size_t i = 0; i < m_; ++i) {
            for (auto [v, c] : m.cons[i].terms) T_[i * N_ + v] += c;
            T_[i * N_ + n_ + i] = 1.0;
            beta_[i] = m.cons[i].rhs;
            const std::size_t s = n_ + i;
            switch (m.cons[i].sense) {
                case Sense::le: lo_[s] = 0; hi_[s] = kInf; break;
                case Sense::ge: lo_[s] = -kInf; hi_[s] = 0; break;
                case Sense::eq: lo_[s] = 0; hi_[s] = 0; break;
            }
            basis_[i] = s;
            basic_row_[s] = static_cast<int>(i);
        }
        for (std::size_t j = 0; j < n_; ++j) {
            bool up = d_[j] < 0;
            if (up && !std::isfinite(hi_[j])) {
                hi_[j] = kBox;
                boxed_[j] = 1;
            }
            if (!up && !std::isfinite(lo_[j])) {
                lo_[j] = -kBox;
                boxed_[j] = 1;
            }
            at_upper_[j] = up;
            x_[j] = up ? hi_[j] : lo_[j];
        }
        recompute_basics();
    }

    SolveResult run() {
        SolveResult res;
        long degenerate = 0;
        bool bland = false;
        for (long it = 0;; ++it) {
            if (it >= opt_.pivot_cap) {
                res.status = SolveStatus::iteration_limit;
                res.pivots = it;
                return res;
            }
            if (it % 50 == 49) recompute_basics();
            int r = leaving_row(bland);
            if (r < 0) {
                recompute_basics();
                r = leaving_row(bland);
                if (r < 0) {
                    res.pivots = it;
                    return finish(res);
                }
            }
            const std::size_t L = basis_[r];
            const bool below = x_[L] < lo_[L];
            const double bound = below ? lo_[L] : hi_[L];
            const double* row = &T_[r * N_];
            int q = -1;
            double best = kInf, best_abs = 0;
            for (std::size_t j = 0; j < N_; ++j) {
                if (basic_row_[j] >= 0 || hi_[j] - lo_[j] < 1e-12) continue;
                const double a = row[j];
                if (std::abs(a) < kPivTol) continue;
                const bool up = at_upper_[j];
                const bool eligible = below ? ((!up && a < 0) || (up && a > 0)) : ((!up && a > 0) || (up && a < 0));
                if (!eligible) continue;
                const double ratio = std::max(0.0, up ? -d_[j] : d_[j]) / std::abs(a);
                if (ratio < best - 1e-12) {
                    best = ratio;
                    best_abs = std::abs(a);
                    q = static_cast<int>(j);
                } else if (ratio <= best + 1e-12 && !bland && std::abs(a) > best_abs * (1 + 1e-9)) {
                    best_abs = std::abs(a);
                    q = static_cast<int>(j);
                }
            }
            if (q < 0) {
                res.status = SolveStatus::infeasible;
                res.pivots = it;
                return res;
            }
            if (best < 1e-12) {
                if (++degenerate > 1000) bland = true;
            } else {
                degenerate = 0;
            }
            pivot(static_cast<std::size_t>(r), static_cast<std::size_t>(q), bound);
        }
    }

private:
    std::size_t n_, m_, N_;
    SolverOptions opt_;
    std::vector<double> T_, beta_, d_, lo_, hi_, x_;
    std::vector<int> basic_row_;
    std::vector<char> at_upper_, boxed_;
    std::vector<std::size_t> basis_;
    std::vector<std::size_t> nz_;  // pivot row support

    void recompute_basics() {
        for (std::size_t i = 0; i < m_; ++i) {
            double v = beta_[i];
            const double* row = &T_[i * N_];
            for (std::size_t j = 0; j < N_; ++j)
                if (basic_row_[j] < 0 && x_[j] != 0.0 && row[j] != 0.0) v -= row[j] * x_[j];
            x_[basis_[i]] = v;
        }
    }

    int leaving_row(bool bland) const {
        int r = -1;
        double worst = kFeasTol;
        std::size_t best_var = N_;
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t b = basis_[i];
            const double viol = std::max(lo_[b] - x_[b], x_[b] - hi_[b]);
            if (viol <= kFeasTol) continue;
            if (bland) {
                if (b < best_var) {
                    best_var = b;
                    r = static_cast<int>(i);
                }
            } else if (viol > worst) {
                worst = viol;
                r = static_cast<int>(i);
            }
        }
        return r;
    }

    void pivot(std::size_t r, std::size_t q, double bound) {
        const std::size_t L = basis_[r];
        double* prow = &T_[r * N_];
        const double a = prow[q];
        const double delta = (x_[L] - bound) / a;
        for (std::size_t i = 0; i < m_; ++i) {
            const double f = T_[i * N_ + q];
            if (f != 0.0) x_[basis_[i]] -= f * delta;
        }
        x_[q] += delta;
        x_[L] = bound;
        at_upper_[L] = (bound == hi_[L] && bound != lo_[L]) ? 1 : 0;
        const double inv = 1.0 / a;
        nz_.clear();
        for (std::size_t j = 0; j < N_; ++j)
            if (prow[j] != 0.0) {
                prow[j] *= inv;
                if (j != q) nz_.push_back(j);
            }
        prow[q] = 1.0;
        beta_[r] *= inv;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            double* row = &T_[i * N_];
            const double f = row[q];
            if (f == 0.0) continue;
            for (std::size_t j : nz_) row[j] -= f * prow[j];
            row[q] = 0.0;
            beta_[i] -= f * beta_[r];
        }
        const double fd = d_[q];
        if (fd != 0.0) {
            for (std::size_t j : nz_) d_[j] -= fd * prow[j];
            d_[q] = 0.0;
        }
        basic_row_[L] = -1;
        basic_row_[q] = static_cast<int>(r);
        basis_[r] = q;
    }

    SolveResult finish(SolveResult res) {
        res.x.assign(x_.begin(), x_.begin() + static_cast<long>(n_));
        for (std::size_t j = 0; j < n_; ++j)
            if (boxed_[j] && std::abs(std::abs(res.x[j]) - kBox) < 1.0) {
                res.status = SolveStatus::unbounded;
                return res;
            }
        res.status = SolveStatus::optimal;
        res.has_solution = true;
        return res;
    }
};

SolveResult solve_with_bounds(const LinearModel& m, const std::vector<double>& lb,
                              const std::vector<double>& ub, const SolverOptions& opt) {
    for (std::size_t j = 0; j < lb.size(); ++j)
        if (lb[j] > ub[j] + opt.tol) {
            SolveResult r;
            r.status = SolveStatus::infeasible;
            return r;
        }
    DualSimplex s(m, lb, ub, opt);
    SolveResult r = s.run();
    if (r.status == SolveStatus::optimal) {
        for (std::size_t j = 0; j < r.x.size(); ++j) {
            // snap tiny drift onto the bounds
            if (std::abs(r.x[j] - lb[j]) < 1e-9) r.x[j] = lb[j];
            if (std::abs(r.x[j] - ub[j]) < 1e-9) r.x[j] = ub[j];
        }
        r.objective = m.objective(r.x);
        r.bound = r.objective;
        r.is_integral = m.all_integral(r.x, opt.tol);
        if (m.first_violation(r.x, opt.tol) >= 0) throw Error("numeric", "simplex returned an infeasible point");
    }
    return r;
}

}  // namespace

SolveResult solve_lp(const LinearModel& m, const SolverOptions& opt) {
    std::vector<double> lb, ub;
    for (const auto& v : m.vars) {
        lb.push_back(v.lb);
        ub.push_back(v.ub);
    }
    return solve_with_bounds(m, lb, ub, opt);
}

SolveResult solve_milp(const LinearModel& m, const SolverOptions& opt) {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    const std::size_t n = m.vars.size();
    std::vector<double> base_lb(n), base_ub(n);
    for (std::size_t j = 0; j < n; ++j) {
        base_lb[j] = m.vars[j].integral ? std::ceil(m.vars[j].lb - opt.tol) : m.vars[j].lb;
        base_ub[j] = m.vars[j].integral && std::isfinite(m.vars[j].ub) ? std::floor(m.vars[j].ub + opt.tol)
                                                                         : m.vars[j].ub;
    }
    // an integral objective lets bounds be rounded up
    bool integral_objective = true;
    for (const auto& v : m.vars)
        if (v.obj != 0 && (!v.integral || std::abs(v.obj - std::round(v.obj)) > 1e-12)) integral_objective = false;
    auto effective = [&](double b) { return integral_objective ? std::ceil(b - opt.tol) : b; };

    struct Node {
        double bound;
        long id;
        std::vector<double> lb, ub;
        std::vector<double> x;
    };
    auto cmp = [](const Node& a, const Node& b) { return std::tie(a.bound, a.id) > std::tie(b.bound, b.id); };
    std::priority_queue<Node, std::vector<Node>, decltype(cmp)> open(cmp);

    SolveResult best;
    best.status = SolveStatus::infeasible;
    double incumbent = kInf;
    long pivots = 0, nodes = 0, next_id = 0;

    auto finalize = [&](SolveStatus status, double bound) {
        best.status = status;
        best.pivots = pivots;
        best.nodes = nodes;
        best.bound = bound;
        if (best.has_solution) {
            for (std::size_t j = 0; j < n; ++j)
                if (m.vars[j].integral) best.x[j] = std::round(best.x[j]);
            best.objective = m.objective(best.x);
            best.is_integral = true;
        }
        return best;
    };
    auto evaluate = [&](std::vector<double> lb, std::vector<double> ub, bool root) -> int {
        SolveResult r = solve_with_bounds(m, lb, ub, opt);
        pivots += r.pivots;
        if (!root) ++nodes;
        if (r.status == SolveStatus::iteration_limit || r.status == SolveStatus::unbounded) return -1;
        if (r.status != SolveStatus::optimal) return 0;
        if (r.is_integral) {
            if (r.objective < incumbent - opt.tol) {
                incumbent = r.objective;
                best = r;
            }
            return 0;
        }
        if (effective(r.objective) >= incumbent - opt.tol) return 0;
        open.push(Node{r.objective, next_id++, std::move(lb), std::move(ub), std::move(r.x)});
        return 0;
    };

    if (evaluate(base_lb, base_ub, true) < 0) return finalize(SolveStatus::iteration_limit, -kInf);
    while (!open.empty()) {
        if (effective(open.top().bound) >= incumbent - opt.tol) break;
        if (nodes >= opt.node_cap) return finalize(SolveStatus::iteration_limit, open.top().bound);
        if (opt.time_limit_s > 0 &&
            std::chrono::duration<double>(clock::now() - start).count() > opt.time_limit_s)
            return finalize(SolveStatus::time_limit, open.top().bound);
        Node nd = open.top();
        open.pop();
        int var = -1;
        double frac_best = -1;
        for (std::size_t j = 0; j < n; ++j) {
            if (!m.vars[j].integral) continue;
            const double f = nd.x[j] - std::floor(nd.x[j]);
            const double dist = std::min(f, 1 - f);
            if (dist > opt.tol && dist > frac_best + 1e-12) {
                frac_best = dist;
                var = static_cast<int>(j);
            }
        }
        if (var < 0) continue;
        auto dn_ub = nd.ub;
        dn_ub[var] = std::floor(nd.x[var]);
        auto up_lb = nd.lb;
        up_lb[var] = std::ceil(nd.x[var]);
        if (evaluate(nd.lb, dn_ub, false) < 0 || evaluate(up_lb, nd.ub, false) < 0)
            return finalize(SolveStatus::iteration_limit, nd.bound);
    }
    if (!best.has_solution) return finalize(SolveStatus::infeasible, kInf);
    return finalize(SolveStatus::optimal, incumbent);
}

GapResult integrality_gap(const LinearModel& m, const SolverOptions& opt) {
    GapResult g;
    g.lp = solve_lp(m, opt);
    g.ilp = solve_milp(m, opt);
    return g;
}

}  // namespace rescq
