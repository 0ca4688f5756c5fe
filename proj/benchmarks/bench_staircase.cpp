#include <benchmark/benchmark.h>

#include <random>

#include "oag/oracle.hpp"
#include "oag/parse.hpp"
#include "oag/staircase.hpp"

using namespace oag;

namespace {

GroupSpec make_spec(int rank) {
    std::string text;
    for (int i = 0; i < rank; ++i)
        text += "component c" + std::to_string(i) + ": dims{} default 1 discrete realize Z\n";
    return parse_group_spec(text);
}

void bm_lattice_ops(benchmark::State& state) {
    GroupSpec g = make_spec((int)state.range(0));
    std::mt19937_64 rng(1);
    std::vector<StaircaseSubgroup> hs;
    for (int i = 0; i < 64; ++i) hs.push_back(random_staircase(g, rng, 12));
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& a = hs[i % hs.size()];
        const auto& b = hs[(i + 7) % hs.size()];
        benchmark::DoNotOptimize(sum(a, b));
        benchmark::DoNotOptimize(intersect(a, b));
        ++i;
    }
}

void bm_membership(benchmark::State& state) {
    GroupSpec g = make_spec((int)state.range(0));
    std::mt19937_64 rng(2);
    auto h = random_staircase(g, rng, 12);
    std::vector<GroupElement> xs;
    for (int i = 0; i < 256; ++i) xs.push_back(random_element(g, rng, 100));
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(contains(h, xs[i % xs.size()]));
        ++i;
    }
}

}  // namespace

BENCHMARK(bm_lattice_ops)->Arg(2)->Arg(4)->Arg(8);
BENCHMARK(bm_membership)->Arg(2)->Arg(4)->Arg(8);
