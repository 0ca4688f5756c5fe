#include <benchmark/benchmark.h>

#include <random>

#include "oag/oracle.hpp"
#include "oag/parse.hpp"
#include "oag/solver.hpp"

using namespace oag;

namespace {

void bm_solve(benchmark::State& state) {
    std::string text;
    for (int i = 0; i < 3; ++i)
        text += "component c" + std::to_string(i) + ": dims{} default 1 discrete realize Z\n";
    GroupSpec g = parse_group_spec(text);
    std::mt19937_64 rng(3);
    std::vector<CongruenceSystem> systems;
    for (int i = 0; i < 128; ++i)
        systems.push_back(random_congruence_system(g, rng, (std::size_t)state.range(0), 8));
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve(systems[i % systems.size()]));
        ++i;
    }
}

}  // namespace

BENCHMARK(bm_solve)->Arg(2)->Arg(4)->Arg(8);
