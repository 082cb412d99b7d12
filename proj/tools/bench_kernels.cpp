// Serial vs OpenMP versions of the parallel kernels.
#include <benchmark/benchmark.h>

#include "rescq/generate.hpp"
#include "rescq/responsibility.hpp"
#include "rescq/witness.hpp"

using namespace rescq;

namespace {

const Query& chain() {
    static const Query q = parse_query("q5 :- L(a,u), P(u,x), R(x,y), S(y,z), T(z,v).");
    return q;
}

const Query& triangle() {
    static const Query q = parse_query("qtri :- R(x,y), S(y,z), T(z,x).");
    return q;
}

Database instance(const Query& q, int domain, long n) { return generate_instance(q, domain, n, Semantics::set, 2, 42); }

template <WitnessSet (*F)(const Query&, const Database&)>
void witness_join(benchmark::State& st) {
    Database d = instance(chain(), 200, st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(F(chain(), d));
    st.counters["witnesses"] = static_cast<double>(compute_witnesses_serial(chain(), d).size());
}

template <bool (*F)(const WitnessSet&, const std::vector<bool>&)>
void p4_scan(benchmark::State& st) {
    // sparse enough that most instances have no P4, so the scan runs to the end
    Database d = instance(triangle(), 1000, st.range(0));
    WitnessSet ws = compute_witnesses(triangle(), d);
    auto exo = exogenous_mask(triangle(), d);
    for (auto _ : st) benchmark::DoNotOptimize(F(ws, exo));
    st.counters["witnesses"] = static_cast<double>(ws.size());
}

template <ResponsibilityAnswer (*F)(const Query&, const Database&, TupleId, const SolverOptions&)>
void milp_groups(benchmark::State& st) {
    Database d = instance(triangle(), 15, st.range(0));
    WitnessSet ws = compute_witnesses(triangle(), d);
    TupleId t = 0;
    std::size_t most = 0;
    for (TupleId u = 0; u < d.tuple_count(); ++u)
        if (ws.containing(u).size() > most) {
            most = ws.containing(u).size();
            t = u;
        }
    SolverOptions opt;
    for (auto _ : st) benchmark::DoNotOptimize(F(triangle(), d, t, opt));
    st.counters["groups"] = static_cast<double>(most);
}

}  // namespace

BENCHMARK(witness_join<compute_witnesses_serial>)->Name("witness_join/serial")->Arg(300)->Arg(500);
BENCHMARK(witness_join<compute_witnesses>)->Name("witness_join/omp")->Arg(300)->Arg(500);
BENCHMARK(p4_scan<has_p4_pattern_serial>)->Name("p4_scan/serial")->Arg(4000)->Arg(10000);
BENCHMARK(p4_scan<has_p4_pattern>)->Name("p4_scan/omp")->Arg(4000)->Arg(10000);
BENCHMARK(milp_groups<responsibility_milp_serial>)->Name("milp_groups/serial")->Arg(80)->Unit(benchmark::kMillisecond);
BENCHMARK(milp_groups<responsibility_milp>)->Name("milp_groups/omp")->Arg(80)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
