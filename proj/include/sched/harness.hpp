#pragma once

#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sched/analytics.hpp"
#include "sched/disciplines.hpp"
#include "sched/engine.hpp"
#include "sched/generators.hpp"
#include "sched/io.hpp"
#include "sched/model.hpp"
#include "sched/oracles.hpp"

namespace sched {

enum class SourceKind { stochastic, adversarial };
enum class DenomKind { arrival_lb, best_lb, oracle };

inline std::string to_string(DenomKind d) {
    switch (d) {
        case DenomKind::arrival_lb: return "arrival-lb";
        case DenomKind::best_lb: return "best-lb";
        case DenomKind::oracle: return "oracle";
    }
    return "?";
}

struct ExperimentSpec {
    Fleet fleet;  // mode adapts per discipline; machines and speeds are shared
    SourceKind source = SourceKind::stochastic;
    DistSpec interarrival = DistSpec::exp(1);
    DistSpec workload = DistSpec::exp(1);
    DistSpec weight = DistSpec::det(1);
    std::optional<RampSpec> ramp;
    double adversarial_B = 2;
    std::vector<DisciplineSpec> disciplines;
    std::vector<std::size_t> grid;  // instance sizes
    int replications = 1;
    std::uint64_t base_seed = 42;
    DenomKind denominator = DenomKind::arrival_lb;
};

struct CellResult {
    std::string discipline;
    std::size_t n = 0;
    int replication = 0;
    std::uint64_t seed = 0;
    double total_completion = 0;
    double total_flow = 0;
    double denom = 0;
    double ratio = 0;  // total completion over the chosen lower bound
};

struct ExperimentResult {
    std::vector<CellResult> cells;  // (discipline, n, replication) order

    std::vector<double> ratios_for(const std::string& discipline,
                                   std::size_t n) const {
        std::vector<double> out;
        for (const auto& c : cells)
            if (c.discipline == discipline && c.n == n) out.push_back(c.ratio);
        return out;
    }

    double mean_ratio(const std::string& discipline, std::size_t n) const {
        auto r = ratios_for(discipline, n);
        if (r.empty()) throw EmptySample("no cells for " + discipline + "/n=" +
                                         std::to_string(n));
        double s = 0;
        for (double v : r) s += v;
        return s / static_cast<double>(r.size());
    }

    double max_ratio() const {
        double mx = 0;
        for (const auto& c : cells) mx = std::max(mx, c.ratio);
        return mx;
    }
};

// Replication seeds mix the base seed with the discipline label, the grid
// point, and the replication index, in that order. Any one cell can be
// regenerated in isolation; disciplines intentionally draw distinct
// instances within a cell.
inline std::uint64_t cell_seed(std::uint64_t base, const DisciplineSpec& d,
                               std::size_t n, int replication) {
    std::string label = to_string(d.discipline);
    if (!d.rng_tag.empty()) label += ":" + d.rng_tag;
    std::uint64_t s = mix_seed(base, fnv1a(label));
    s = mix_seed(s, static_cast<std::uint64_t>(n));
    return mix_seed(s, static_cast<std::uint64_t>(replication));
}

inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
    if (spec.grid.empty()) throw Error("experiment needs a size grid");
    if (spec.disciplines.empty()) throw Error("experiment needs disciplines");
    if (spec.replications < 1) throw Error("experiment needs replications >= 1");

    ExperimentResult result;
    result.cells.reserve(spec.disciplines.size() * spec.grid.size() *
                         static_cast<std::size_t>(spec.replications));
    for (const auto& d : spec.disciplines) {
        Fleet fleet = spec.fleet;
        if (!mode_compatible(d.discipline, fleet.mode))
            fleet.mode = natural_mode(d.discipline);
        for (std::size_t n : spec.grid) {
            for (int rep = 0; rep < spec.replications; ++rep) {
                const std::uint64_t seed = cell_seed(spec.base_seed, d, n, rep);
                Instance inst;
                if (spec.source == SourceKind::stochastic) {
                    StochasticSpec g;
                    g.n = n;
                    g.interarrival = spec.interarrival;
                    g.workload = spec.workload;
                    g.weight = spec.weight;
                    g.ramp = spec.ramp;
                    g.seed = seed;
                    inst = gen_stochastic(g);
                } else {
                    inst = gen_adversarial(fleet.machines, spec.adversarial_B,
                                           static_cast<int>(n));
                }
                auto metrics =
                    simulate_metrics(inst, fleet, d, mix_seed(seed, fnv1a("sim")));

                CellResult cell;
                cell.discipline = to_string(d.discipline);
                cell.n = n;
                cell.replication = rep;
                cell.seed = seed;
                cell.total_completion = metrics.total_completion;
                cell.total_flow = metrics.total_flow;
                switch (spec.denominator) {
                    case DenomKind::arrival_lb:
                        cell.denom = arrival_time_lower_bound(inst);
                        break;
                    case DenomKind::best_lb:
                        cell.denom = completion_lower_bound(inst, fleet);
                        break;
                    case DenomKind::oracle:
                        cell.denom =
                            opt_nonpreemptive(inst, fleet).optimal_completion;
                        break;
                }
                cell.ratio = cell.denom > 0
                                 ? cell.total_completion / cell.denom
                                 : std::numeric_limits<double>::infinity();
                result.cells.push_back(cell);
            }
        }
    }
    return result;
}

struct ConvergenceRow {
    std::string discipline;
    std::size_t n = 0;
    std::size_t replications = 0;
    double mean_ratio = 0;
    double p95_ratio = 0;
};

inline std::vector<ConvergenceRow> convergence_table(
    const ExperimentResult& result) {
    std::map<std::pair<std::string, std::size_t>, std::vector<double>> groups;
    for (const auto& c : result.cells)
        groups[{c.discipline, c.n}].push_back(c.ratio);
    std::map<std::string, std::size_t> sizes_per_discipline;
    for (const auto& [key, _] : groups) ++sizes_per_discipline[key.first];
    for (const auto& [d, cnt] : sizes_per_discipline)
        if (cnt < 2)
            throw Error("convergence table needs at least two grid points (" +
                        d + " has " + std::to_string(cnt) + ")");

    std::vector<ConvergenceRow> rows;
    for (auto& [key, ratios] : groups) {
        ConvergenceRow row;
        row.discipline = key.first;
        row.n = key.second;
        row.replications = ratios.size();
        double s = 0;
        for (double v : ratios) s += v;
        row.mean_ratio = s / static_cast<double>(ratios.size());
        row.p95_ratio = empirical_cdf(ratios).quantile(0.95);
        rows.push_back(row);
    }
    return rows;
}

// Fraction of probe points where the large-n ratio distribution sits at or
// left of the small-n one; near 1 when growing instances improve ratios.
inline double left_shift_fraction(const ExperimentResult& result,
                                  const std::string& discipline,
                                  std::size_t n_small, std::size_t n_large) {
    auto small_cdf = empirical_cdf(result.ratios_for(discipline, n_small));
    auto large_cdf = empirical_cdf(result.ratios_for(discipline, n_large));
    std::vector<double> probes = small_cdf.sorted;
    probes.insert(probes.end(), large_cdf.sorted.begin(),
                  large_cdf.sorted.end());
    std::sort(probes.begin(), probes.end());
    std::size_t hit = 0;
    for (double x : probes)
        if (large_cdf.value_at(x) >= small_cdf.value_at(x)) ++hit;
    return static_cast<double>(hit) / static_cast<double>(probes.size());
}

inline void write_ratios_csv(std::ostream& os, const ExperimentResult& result) {
    os << "discipline,n,replication,ratio\n";
    for (const auto& c : result.cells)
        os << c.discipline << ',' << c.n << ',' << c.replication << ','
           << io::format_double(c.ratio) << '\n';
}

inline void write_ecdf_csv(std::ostream& os, const ExperimentResult& result) {
    os << "discipline,n,value,cum_prob\n";
    std::map<std::pair<std::string, std::size_t>, std::vector<double>> groups;
    for (const auto& c : result.cells)
        groups[{c.discipline, c.n}].push_back(c.ratio);
    for (auto& [key, ratios] : groups) {
        auto cdf = empirical_cdf(ratios);
        for (const auto& [x, p] : cdf.points())
            os << key.first << ',' << key.second << ',' << io::format_double(x)
               << ',' << io::format_double(p) << '\n';
    }
}

inline void write_table_txt(std::ostream& os,
                            const std::vector<ConvergenceRow>& rows) {
    os << std::left << std::setw(12) << "discipline" << std::right
       << std::setw(8) << "n" << std::setw(8) << "reps" << std::setw(14)
       << "mean_ratio" << std::setw(14) << "p95_ratio" << '\n';
    for (const auto& r : rows) {
        os << std::left << std::setw(12) << r.discipline << std::right
           << std::setw(8) << r.n << std::setw(8) << r.replications
           << std::setw(14) << std::fixed << std::setprecision(4)
           << r.mean_ratio << std::setw(14) << r.p95_ratio << '\n';
        os.unsetf(std::ios::fixed);
    }
}

}  // namespace sched
