#include <benchmark/benchmark.h>

#include <random>

#include "oag/oracle.hpp"
#include "oag/parse.hpp"
#include "oag/qe.hpp"

using namespace oag;

namespace {

void bm_eliminate(benchmark::State& state) {
    GroupSpec g = parse_group_spec(
        "component hi: dims{} default 1 discrete realize Z\n"
        "component lo: dims{} default 1 discrete realize Z\n");
    std::mt19937_64 rng(4);
    std::vector<FormulaPtr> bodies;
    while (bodies.size() < 32)
        bodies.push_back(random_qf_formula(g, rng, {"x", "y"}, (std::size_t)state.range(0)));
    std::size_t i = 0;
    for (auto _ : state) {
        try {
            benchmark::DoNotOptimize(
                eliminate_exists(Formula::make_exists("x", bodies[i % bodies.size()]), g));
        } catch (const domain_error&) {
            // budget refusals count as work too
        }
        ++i;
    }
}

}  // namespace

BENCHMARK(bm_eliminate)->Arg(2)->Arg(3)->Arg(4);

BENCHMARK_MAIN();
