#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sched/disciplines.hpp"
#include "sched/engine.hpp"
#include "sched/generators.hpp"
#include "sched/model.hpp"

namespace sched {

struct LindleyResult {
    std::vector<double> waits;        // recursion
    std::vector<double> closed_form;  // prefix-sum minimum form
    double max_abs_diff = 0;
};

// Single-machine FCFS waiting times. interarrivals[k] is the gap in front of
// job k+1, with element 0 measured from time zero (and unused by the
// recursion). The closed form W_k = S_{k-1} - min_{j<k} S_j over the prefix
// sums of p_j - dr_{j+1} must agree with the recursion to fp accuracy; a gap
// larger than 1e-9 means the inputs are diseased and is reported as an error.
inline LindleyResult lindley_waits(const std::vector<double>& workloads,
                                   const std::vector<double>& interarrivals) {
    if (workloads.size() != interarrivals.size())
        throw LengthMismatch("lindley_waits: " + std::to_string(workloads.size()) +
                             " workloads vs " + std::to_string(interarrivals.size()) +
                             " interarrivals");
    const std::size_t n = workloads.size();
    LindleyResult res;
    res.waits.resize(n);
    res.closed_form.resize(n);
    if (n == 0) return res;

    res.waits[0] = 0;
    for (std::size_t k = 1; k < n; ++k)
        res.waits[k] =
            std::max(0.0, res.waits[k - 1] + workloads[k - 1] - interarrivals[k]);

    double s = 0, smin = 0;
    res.closed_form[0] = 0;
    for (std::size_t k = 1; k < n; ++k) {
        s += workloads[k - 1] - interarrivals[k];
        smin = std::min(smin, s);
        res.closed_form[k] = s - smin;
    }

    for (std::size_t k = 0; k < n; ++k)
        res.max_abs_diff =
            std::max(res.max_abs_diff, std::fabs(res.waits[k] - res.closed_form[k]));
    if (res.max_abs_diff > 1e-9)
        throw Error("lindley forms diverged by " + std::to_string(res.max_abs_diff));
    return res;
}

struct CrossCheckResult {
    bool ok = true;
    std::size_t first_mismatch = 0;  // job position when !ok
    double trace_wait = 0;
    double recursion_wait = 0;
    double max_abs_diff = 0;
};

// Compares per-job waits read off a single-machine FCFS trace against the
// Lindley recursion on the same instance.
inline CrossCheckResult fcfs_cross_check(const Instance& inst,
                                         const ScheduleTrace& trace) {
    std::map<int, std::size_t> pos_of;
    for (std::size_t i = 0; i < inst.n(); ++i) pos_of[inst.jobs[i].id] = i;
    std::vector<double> start(inst.n(),
                              std::numeric_limits<double>::quiet_NaN());
    for (const auto& e : trace.events) {
        if (e.kind != EventKind::dispatch) continue;
        auto it = pos_of.find(e.job_id);
        if (it == pos_of.end())
            throw IncompleteTrace("trace dispatches unknown job " +
                                  std::to_string(e.job_id));
        if (std::isnan(start[it->second])) start[it->second] = e.time;
    }
    auto lin = lindley_waits(
        [&] {
            std::vector<double> p(inst.n());
            for (std::size_t i = 0; i < inst.n(); ++i)
                p[i] = inst.jobs[i].workload;
            return p;
        }(),
        inst.interarrivals());

    CrossCheckResult res;
    for (std::size_t i = 0; i < inst.n(); ++i) {
        if (std::isnan(start[i]))
            throw IncompleteTrace("job " + std::to_string(inst.jobs[i].id) +
                                  " never dispatched");
        const double w = start[i] - inst.jobs[i].arrival;
        const double d = std::fabs(w - lin.waits[i]);
        res.max_abs_diff = std::max(res.max_abs_diff, d);
        if (d > 1e-9 && res.ok) {
            res.ok = false;
            res.first_mismatch = i;
            res.trace_wait = w;
            res.recursion_wait = lin.waits[i];
        }
    }
    return res;
}

inline CrossCheckResult fcfs_cross_check(const Instance& inst) {
    auto trace = simulate(inst, Fleet::identical(1, Mode::non_preemptive),
                          DisciplineSpec::of(Discipline::fcfs));
    return fcfs_cross_check(inst, trace);
}

// --- certified lower bounds on total completion time ---

inline double arrival_time_lower_bound(const Instance& inst) {
    return inst.arrival_sum();
}

// Sort workloads ascending; even with all jobs available at time zero and the
// full fleet speed fused into one machine, the k-th finished job cannot beat
// the k smallest workloads run back to back.
inline double workload_lower_bound(const Instance& inst, const Fleet& fleet) {
    std::vector<double> p(inst.n());
    for (std::size_t i = 0; i < inst.n(); ++i) p[i] = inst.jobs[i].workload;
    std::sort(p.begin(), p.end());
    const double S = fleet.total_speed();
    double prefix = 0, total = 0;
    for (double v : p) {
        prefix += v;
        total += prefix / S;
    }
    return total;
}

inline double per_job_lower_bound(const Instance& inst, const Fleet& fleet) {
    const double smax = fleet.max_speed();
    double total = 0;
    for (const auto& j : inst.jobs) total += j.arrival + j.workload / smax;
    return total;
}

inline double completion_lower_bound(const Instance& inst, const Fleet& fleet) {
    return std::max({arrival_time_lower_bound(inst),
                     workload_lower_bound(inst, fleet),
                     per_job_lower_bound(inst, fleet)});
}

// --- cyclic decomposition onto m single-machine streams ---

// Window sums of interarrival gaps: stream i's j-th gap collects the m gaps
// ending at its global job index (zero-extended below index 1), which
// telescopes to the exact arrival spacing inside the stream.
inline std::vector<std::vector<double>> cyclic_interarrivals(
    const std::vector<double>& dr, int m) {
    if (m < 1) throw Error("cyclic split needs m >= 1");
    std::vector<std::vector<double>> out(static_cast<std::size_t>(m));
    for (std::size_t g = 0; g < dr.size(); ++g) {
        const std::size_t stream = g % static_cast<std::size_t>(m);
        double w = 0;
        for (int s = 0; s < m; ++s) {
            const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(g) - s;
            if (k >= 0) w += dr[static_cast<std::size_t>(k)];
        }
        out[stream].push_back(w);
    }
    return out;
}

inline std::vector<Instance> cyclic_partition(const Instance& inst, int m) {
    if (m < 1) throw Error("cyclic split needs m >= 1");
    std::vector<Instance> out(static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].meta = inst.meta;
        out[i].meta["stream"] = std::to_string(i);
        out[i].meta["streams"] = std::to_string(m);
    }
    for (std::size_t g = 0; g < inst.n(); ++g) {
        auto& stream = out[g % static_cast<std::size_t>(m)];
        Job j = inst.jobs[g];
        j.id = static_cast<int>(stream.jobs.size()) + 1;
        stream.jobs.push_back(j);
    }
    return out;
}

// --- stability statistics over mean schedules ---

struct MeanSchedule {
    std::vector<double> mu_p;
    std::vector<double> mu_r;
    std::string source;  // "declared" or "sample"
};

inline MeanSchedule declared_means(const StochasticSpec& spec) {
    MeanSchedule s;
    s.source = "declared";
    s.mu_p.assign(spec.n, spec.workload.mean());
    s.mu_r.resize(spec.n);
    const double base = spec.interarrival.mean();
    for (std::size_t k = 0; k < spec.n; ++k)
        s.mu_r[k] = spec.ramp ? spec.ramp->mean_at(k, spec.n) : base;
    return s;
}

inline MeanSchedule sample_means(const Instance& inst) {
    if (inst.jobs.empty()) throw EmptySample("sample_means of empty instance");
    MeanSchedule s;
    s.source = "sample";
    double p = 0;
    for (const auto& j : inst.jobs) p += j.workload;
    p /= static_cast<double>(inst.n());
    const auto dr = inst.interarrivals();
    double r = 0;
    for (double v : dr) r += v;
    r /= static_cast<double>(dr.size());
    s.mu_p.assign(inst.n(), p);
    s.mu_r.assign(inst.n(), r);
    return s;
}

struct StabilityReport {
    double rho_n = 0;     // sup_l mu_p(l) / sum of the next m interarrival means
    double s_single = 0;  // overload speed on one machine
    double s_multi = 0;   // overload speed against the fused fleet
    std::size_t n = 0;
    bool stable = false;  // rho_n < 1
};

inline StabilityReport stability_stats(const MeanSchedule& sched, int m) {
    if (m < 1) throw Error("stability_stats needs m >= 1");
    if (sched.mu_p.size() != sched.mu_r.size())
        throw LengthMismatch("mean schedule lengths differ");
    const std::size_t n = sched.mu_p.size();
    if (n == 0) throw EmptySample("stability_stats over empty schedule");

    // Interarrival means repeat their final value past the horizon.
    auto mu_r_at = [&](std::size_t k) {
        return k < n ? sched.mu_r[k] : sched.mu_r[n - 1];
    };
    StabilityReport rep;
    rep.n = n;
    for (std::size_t l = 0; l < n; ++l) {
        double denom = 0;
        for (int s = 0; s < m; ++s) denom += mu_r_at(l + static_cast<std::size_t>(s));
        if (denom <= 0) {
            rep.rho_n = std::numeric_limits<double>::infinity();
            break;
        }
        rep.rho_n = std::max(rep.rho_n, sched.mu_p[l] / denom);
    }
    double single = 0, multi = 0;
    for (std::size_t k = 0; k < n; ++k) {
        single += std::max(0.0, sched.mu_p[k] - sched.mu_r[k]);
        multi += std::max(0.0, sched.mu_p[k] - static_cast<double>(m) * sched.mu_r[k]);
    }
    rep.s_single = single / static_cast<double>(n);
    rep.s_multi = multi / static_cast<double>(n);
    rep.stable = rep.rho_n < 1;
    return rep;
}

// --- empirical distributions and tail diagnostics ---

struct EmpiricalCDF {
    std::vector<double> sorted;  // ascending sample values

    std::size_t n() const { return sorted.size(); }

    double value_at(double x) const {
        auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
        return static_cast<double>(it - sorted.begin()) /
               static_cast<double>(sorted.size());
    }

    // (value, cumulative probability) at each order statistic.
    std::vector<std::pair<double, double>> points() const {
        std::vector<std::pair<double, double>> out;
        out.reserve(sorted.size());
        for (std::size_t i = 0; i < sorted.size(); ++i)
            out.emplace_back(sorted[i], static_cast<double>(i + 1) /
                                            static_cast<double>(sorted.size()));
        return out;
    }

    double quantile(double q) const {
        if (sorted.empty()) throw EmptySample("quantile of empty cdf");
        const double clamped = std::min(std::max(q, 0.0), 1.0);
        const std::size_t rank = static_cast<std::size_t>(
            std::ceil(clamped * static_cast<double>(sorted.size())));
        return sorted[rank == 0 ? 0 : rank - 1];
    }
};

inline EmpiricalCDF empirical_cdf(std::vector<double> samples) {
    if (samples.empty()) throw EmptySample("empirical_cdf of empty sample");
    std::sort(samples.begin(), samples.end());
    return EmpiricalCDF{std::move(samples)};
}

// Trajectory k -> max_{i<=k} x_i / k^(1/r). Decays to zero when the r-th
// moment exists; hovers or grows when the tail is heavier.
inline std::vector<std::pair<std::size_t, double>> scaled_max_diagnostic(
    const std::vector<double>& samples, double r) {
    if (samples.empty()) throw EmptySample("scaled_max_diagnostic of empty sample");
    if (!(r > 0)) throw Error("scaled_max_diagnostic needs r > 0");
    std::vector<std::pair<std::size_t, double>> out;
    out.reserve(samples.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < samples.size(); ++k) {
        mx = std::max(mx, samples[k]);
        out.emplace_back(k + 1,
                         mx / std::pow(static_cast<double>(k + 1), 1.0 / r));
    }
    return out;
}

// Independently routes each job to one machine with probability proportional
// to its speed; per-machine substreams keep arrivals and workloads verbatim.
inline std::vector<Instance> speed_routing_split(const Instance& inst,
                                                 const std::vector<double>& speeds,
                                                 std::uint64_t seed) {
    if (speeds.empty()) throw Error("speed_routing_split needs speeds");
    double total = 0;
    for (double s : speeds) {
        if (!(s > 0)) throw Error("speeds must be positive");
        total += s;
    }
    auto rng = make_rng(mix_seed(seed, fnv1a("speed-routing")));
    std::vector<Instance> out(speeds.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].meta = inst.meta;
        out[i].meta["route"] = std::to_string(i + 1);
        out[i].meta["routes"] = std::to_string(speeds.size());
    }
    for (const auto& job : inst.jobs) {
        const double u = next_unit(rng) * total;
        double acc = 0;
        std::size_t pick = speeds.size() - 1;
        for (std::size_t i = 0; i < speeds.size(); ++i) {
            acc += speeds[i];
            if (u < acc) {
                pick = i;
                break;
            }
        }
        Job j = job;
        j.id = static_cast<int>(out[pick].jobs.size()) + 1;
        out[pick].jobs.push_back(j);
    }
    return out;
}

}  // namespace sched
