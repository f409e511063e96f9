#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sched/generators.hpp"
#include "sched/model.hpp"
#include "sched/rng.hpp"

namespace sched {

// Random instance families used by bound verification sweeps. Everything is
// derived from one seed so a failing draw can be replayed by index.

struct SmallCorpusSpec {
    int count = 1000;
    int n_max = 8;
    int m_max = 3;
    int p_lo = 1;
    int p_hi = 4;
    int gap_max = 3;  // integer interarrival gaps in [0, gap_max]
    std::uint64_t seed = 42;
};

struct SmallCase {
    Instance inst;
    int machines = 1;
};

inline SmallCase make_small_case(const SmallCorpusSpec& spec, int index) {
    auto rng = make_rng(mix_seed(mix_seed(spec.seed, fnv1a("small-corpus")),
                                 static_cast<std::uint64_t>(index)));
    SmallCase c;
    c.machines = 1 + static_cast<int>(next_below(rng, static_cast<std::uint64_t>(spec.m_max)));
    const int n = 1 + static_cast<int>(next_below(rng, static_cast<std::uint64_t>(spec.n_max)));
    double r = 0;
    for (int k = 0; k < n; ++k) {
        r += static_cast<double>(next_below(rng, static_cast<std::uint64_t>(spec.gap_max) + 1));
        const double p = spec.p_lo + static_cast<double>(next_below(
                             rng, static_cast<std::uint64_t>(spec.p_hi - spec.p_lo) + 1));
        c.inst.jobs.push_back(Job{k + 1, r, p, 1.0});
    }
    c.inst.meta["generator"] = "small-corpus";
    c.inst.meta["index"] = std::to_string(index);
    c.inst.meta["seed"] = std::to_string(spec.seed);
    return c;
}

struct M1CorpusSpec {
    int count = 1000;
    int n_max = 50;
    double arrival_rate = 1.0;
    double mean_workload = 0.8;
    std::uint64_t seed = 42;
};

inline Instance make_m1_case(const M1CorpusSpec& spec, int index,
                             bool fixed_n = false) {
    auto rng = make_rng(mix_seed(mix_seed(spec.seed, fnv1a("m1-corpus")),
                                 static_cast<std::uint64_t>(index)));
    const int n = fixed_n ? spec.n_max
                          : 1 + static_cast<int>(next_below(
                                    rng, static_cast<std::uint64_t>(spec.n_max)));
    const DistSpec gaps = DistSpec::exp(spec.arrival_rate);
    const DistSpec sizes = DistSpec::exp(1.0 / spec.mean_workload);
    Instance inst;
    double r = 0;
    for (int k = 0; k < n; ++k) {
        r += gaps.sample(rng);
        inst.jobs.push_back(Job{k + 1, r, sizes.sample(rng), 1.0});
    }
    inst.meta["generator"] = "m1-corpus";
    inst.meta["index"] = std::to_string(index);
    inst.meta["seed"] = std::to_string(spec.seed);
    return inst;
}

}  // namespace sched
