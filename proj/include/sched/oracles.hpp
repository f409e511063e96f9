#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "sched/analytics.hpp"
#include "sched/disciplines.hpp"
#include "sched/engine.hpp"
#include "sched/model.hpp"

namespace sched {

enum class OracleMethod { subset_dp, exhaustive, srpt_m1 };

inline std::string to_string(OracleMethod m) {
    switch (m) {
        case OracleMethod::subset_dp: return "subset-dp";
        case OracleMethod::exhaustive: return "exhaustive";
        case OracleMethod::srpt_m1: return "srpt-m1";
    }
    return "?";
}

struct OracleResult {
    double optimal_flow = 0;
    double optimal_completion = 0;  // = optimal_flow + sum of arrivals
    ScheduleTrace witness;
    OracleMethod method{};
};

namespace detail {

inline void finish_witness(std::vector<TraceEvent>& ev, const Instance& inst) {
    for (const auto& j : inst.jobs)
        ev.push_back(TraceEvent{EventKind::arrival, j.arrival, j.id, -1});
    auto rank = [](EventKind k) {
        switch (k) {
            case EventKind::complete: return 0;
            case EventKind::arrival: return 1;
            case EventKind::preempt: return 2;
            case EventKind::dispatch: return 3;
        }
        return 4;
    };
    std::sort(ev.begin(), ev.end(),
              [&](const TraceEvent& a, const TraceEvent& b) {
                  if (a.time != b.time) return a.time < b.time;
                  if (rank(a.kind) != rank(b.kind))
                      return rank(a.kind) < rank(b.kind);
                  if (a.machine != b.machine) return a.machine < b.machine;
                  return a.job_id < b.job_id;
              });
}

// Exact single-machine optimum by subset DP. Each subset keeps the Pareto
// frontier over (last finish time, accumulated flow): an earlier finish can
// buy lower flow later, so neither coordinate alone is enough.
inline OracleResult opt_m1_subset(const Instance& inst, double speed) {
    const std::size_t n = inst.n();
    if (n > 12) throw TooLarge("subset oracle accepts n <= 12");

    struct Point {
        double finish;
        double flow;
        int job;           // last scheduled job (position), -1 at the root
        int parent_point;  // index into the parent mask's pruned frontier
        double start;
    };
    const std::size_t full = (std::size_t{1} << n) - 1;
    std::vector<std::vector<Point>> frontier(full + 1);
    frontier[0].push_back(Point{0, 0, -1, -1, 0});

    auto prune = [](std::vector<Point>& pts) {
        std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
            if (a.finish != b.finish) return a.finish < b.finish;
            return a.flow < b.flow;
        });
        std::vector<Point> keep;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : pts)
            if (p.flow < best) {
                keep.push_back(p);
                best = p.flow;
            }
        pts.swap(keep);
    };

    for (std::size_t mask = 0; mask <= full; ++mask) {
        auto& pts = frontier[mask];
        if (pts.empty()) continue;
        prune(pts);
        if (mask == full) break;
        for (std::size_t idx = 0; idx < pts.size(); ++idx) {
            const Point& pt = pts[idx];
            for (std::size_t j = 0; j < n; ++j) {
                if (mask & (std::size_t{1} << j)) continue;
                const Job& job = inst.jobs[j];
                const double start = std::max(pt.finish, job.arrival);
                const double fin = start + job.workload / speed;
                frontier[mask | (std::size_t{1} << j)].push_back(
                    Point{fin, pt.flow + (fin - job.arrival),
                          static_cast<int>(j), static_cast<int>(idx), start});
            }
        }
        pts.shrink_to_fit();
    }

    const auto& last = frontier[full];
    std::size_t best = 0;
    for (std::size_t i = 1; i < last.size(); ++i)
        if (last[i].flow < last[best].flow) best = i;

    OracleResult res;
    res.method = OracleMethod::subset_dp;
    res.optimal_flow = last[best].flow;
    res.optimal_completion = res.optimal_flow + inst.arrival_sum();

    std::vector<TraceEvent> ev;
    std::size_t mask = full;
    int point = static_cast<int>(best);
    double horizon = 0;
    while (mask != 0) {
        const Point& p = frontier[mask][static_cast<std::size_t>(point)];
        const Job& job = inst.jobs[static_cast<std::size_t>(p.job)];
        const double fin = p.start + job.workload / speed;
        horizon = std::max(horizon, fin);
        ev.push_back(TraceEvent{EventKind::dispatch, p.start, job.id, 0});
        ev.push_back(TraceEvent{EventKind::complete, fin, job.id, 0});
        mask &= ~(std::size_t{1} << static_cast<std::size_t>(p.job));
        point = p.parent_point;
    }
    finish_witness(ev, inst);
    res.witness.events = std::move(ev);
    res.witness.horizon = horizon;
    return res;
}

// Exact optimum for up to three machines: dynamic program over
// (scheduled subset, machine availability vector). Identical machines are
// interchangeable, so their availability vector is kept sorted to fold
// symmetric states; distinguishable speeds disable that folding.
inline OracleResult opt_exhaustive(const Instance& inst, const Fleet& fleet) {
    const std::size_t n = inst.n();
    const int m = fleet.machines;
    if (m > 3) throw TooLarge("exhaustive oracle accepts m <= 3");
    if (n > 8) throw TooLarge("exhaustive oracle accepts n <= 8");

    bool identical = true;
    for (int k = 0; k < m; ++k)
        if (fleet.speed(k) != fleet.speed(0)) identical = false;

    using Key = std::tuple<unsigned, double, double, double>;
    struct Entry {
        double flow;
        Key parent;
        int job;  // position
        int machine;
        double start;
        double finish;
    };
    auto key_of = [&](unsigned mask, std::array<double, 3> avail) {
        if (identical) std::sort(avail.begin(), avail.begin() + m);
        return Key{mask, avail[0], avail[1], avail[2]};
    };

    // Levels are indexed by scheduled-job count; each state keeps only its
    // cheapest flow since the future depends on the state alone.
    std::vector<std::map<Key, Entry>> level(n + 1);
    level[0][key_of(0, {0, 0, 0})] =
        Entry{0, Key{0, 0, 0, 0}, -1, -1, 0, 0};

    for (std::size_t c = 0; c < n; ++c) {
        for (const auto& [key, ent] : level[c]) {
            const unsigned mask = std::get<0>(key);
            const std::array<double, 3> avail{std::get<1>(key),
                                              std::get<2>(key),
                                              std::get<3>(key)};
            for (std::size_t j = 0; j < n; ++j) {
                if (mask & (1u << j)) continue;
                const Job& job = inst.jobs[j];
                for (int k = 0; k < m; ++k) {
                    // On identical machines the sorted vector makes machines
                    // with equal availability interchangeable; skip clones.
                    if (identical && k > 0 && avail[static_cast<std::size_t>(k)] ==
                                                  avail[static_cast<std::size_t>(k - 1)])
                        continue;
                    const double start =
                        std::max(avail[static_cast<std::size_t>(k)], job.arrival);
                    const double fin = start + job.workload / fleet.speed(k);
                    std::array<double, 3> next = avail;
                    next[static_cast<std::size_t>(k)] = fin;
                    const Key nk = key_of(mask | (1u << j), next);
                    const double flow = ent.flow + (fin - job.arrival);
                    auto it = level[c + 1].find(nk);
                    if (it == level[c + 1].end() || flow < it->second.flow)
                        level[c + 1][nk] = Entry{flow, key, static_cast<int>(j),
                                                 k, start, fin};
                }
            }
        }
    }

    const Entry* best = nullptr;
    Key best_key{};
    for (const auto& [key, ent] : level[n])
        if (!best || ent.flow < best->flow) {
            best = &ent;
            best_key = key;
        }
    if (!best) throw Error("exhaustive oracle found no schedule");

    OracleResult res;
    res.method = OracleMethod::exhaustive;
    res.optimal_flow = best->flow;
    res.optimal_completion = res.optimal_flow + inst.arrival_sum();

    struct Segment {
        double start;
        double finish;
        int job_id;
        int machine;
    };
    std::vector<Segment> segs;
    double horizon = 0;
    Key cur = best_key;
    for (std::size_t c = n; c > 0; --c) {
        const Entry& e = level[c].at(cur);
        const Job& job = inst.jobs[static_cast<std::size_t>(e.job)];
        horizon = std::max(horizon, e.finish);
        segs.push_back(Segment{e.start, e.finish, job.id, e.machine});
        cur = e.parent;
    }
    if (identical && m > 1) {
        // The folded availability vector erases machine identity, so the
        // recorded indices are slots in a sorted array. Recoloring greedily
        // by start time restores a feasible assignment: the state vector
        // guarantees at most m overlapping segments.
        std::sort(segs.begin(), segs.end(),
                  [](const Segment& a, const Segment& b) {
                      if (a.start != b.start) return a.start < b.start;
                      if (a.finish != b.finish) return a.finish < b.finish;
                      return a.job_id < b.job_id;
                  });
        std::vector<double> free_at(static_cast<std::size_t>(m), 0.0);
        for (auto& s : segs) {
            int pick = -1;
            for (int k = 0; k < m && pick < 0; ++k)
                if (free_at[static_cast<std::size_t>(k)] <=
                    s.start + 1e-12 * std::max(1.0, std::fabs(s.start)))
                    pick = k;
            if (pick < 0) {
                pick = 0;
                for (int k = 1; k < m; ++k)
                    if (free_at[static_cast<std::size_t>(k)] <
                        free_at[static_cast<std::size_t>(pick)])
                        pick = k;
            }
            s.machine = pick;
            free_at[static_cast<std::size_t>(pick)] = s.finish;
        }
    }
    std::vector<TraceEvent> ev;
    for (const auto& s : segs) {
        ev.push_back(
            TraceEvent{EventKind::dispatch, s.start, s.job_id, s.machine});
        ev.push_back(
            TraceEvent{EventKind::complete, s.finish, s.job_id, s.machine});
    }
    finish_witness(ev, inst);
    res.witness.events = std::move(ev);
    res.witness.horizon = horizon;
    return res;
}

}  // namespace detail

inline OracleResult opt_nonpreemptive(const Instance& inst, const Fleet& fleet) {
    if (inst.jobs.empty()) throw EmptySample("oracle over empty instance");
    if (fleet.machines == 1) return detail::opt_m1_subset(inst, fleet.speed(0));
    return detail::opt_exhaustive(inst, fleet);
}

// Same optimum through the multi-machine program; exists so the two
// independent routes can be played against each other on m = 1.
inline OracleResult opt_nonpreemptive_exhaustive(const Instance& inst,
                                                 const Fleet& fleet) {
    if (inst.jobs.empty()) throw EmptySample("oracle over empty instance");
    return detail::opt_exhaustive(inst, fleet);
}

// On one machine, shortest-remaining-first is flow-optimal among all
// preemptive schedules, so the engine itself is the oracle here.
inline OracleResult opt_preemptive_m1(const Instance& inst) {
    if (inst.jobs.empty()) throw EmptySample("oracle over empty instance");
    auto trace = simulate(inst, Fleet::identical(1, Mode::preemptive),
                          DisciplineSpec::of(Discipline::srpt));
    auto rep = derive_metrics(trace, inst);
    OracleResult res;
    res.method = OracleMethod::srpt_m1;
    res.optimal_flow = rep.total_flow;
    res.optimal_completion = rep.total_completion;
    res.witness = std::move(trace);
    return res;
}

struct TwoBRow {
    std::string discipline;
    double flow = 0;
    double ratio = 0;  // flow / optimal flow
    bool ok = false;
};

struct TwoBReport {
    double B = 0;
    double opt_flow = 0;
    OracleMethod method{};
    std::vector<TwoBRow> rows;
    bool all_ok = true;
    double max_ratio = 0;
};

// Checks total flow of each discipline against twice the size ratio times the
// optimal flow. The optimum is the preemptive one when the fleet preempts on
// a single machine, the exact non-preemptive one otherwise.
inline TwoBReport verify_2B(const Instance& inst, const Fleet& fleet,
                            const std::vector<DisciplineSpec>& disciplines,
                            std::uint64_t seed = 0) {
    OracleResult opt =
        (fleet.mode == Mode::preemptive && fleet.machines == 1)
            ? opt_preemptive_m1(inst)
            : opt_nonpreemptive(inst, fleet);
    TwoBReport rep;
    rep.B = size_ratio(inst);
    rep.opt_flow = opt.optimal_flow;
    rep.method = opt.method;
    for (const auto& d : disciplines) {
        Fleet f = fleet;
        if (!mode_compatible(d.discipline, f.mode))
            f.mode = natural_mode(d.discipline);
        auto metrics = derive_metrics(simulate(inst, f, d, seed), inst);
        TwoBRow row;
        row.discipline = to_string(d.discipline);
        row.flow = metrics.total_flow;
        row.ratio = row.flow / rep.opt_flow;
        row.ok = row.flow <= 2.0 * rep.B * rep.opt_flow * (1 + 1e-9);
        rep.max_ratio = std::max(rep.max_ratio, row.ratio);
        rep.all_ok = rep.all_ok && row.ok;
        rep.rows.push_back(row);
    }
    return rep;
}

struct JobCountViolation {
    double t = 0;
    int count = 0;
    int opt_count = 0;
    double allowed = 0;
};

struct JobCountReport {
    bool ok = true;
    double B = 0;
    double max_excess = 0;  // max over time of count - B * opt_count
    std::vector<JobCountViolation> violations;
};

// Single-machine check that a work-conserving discipline never holds more
// than B times the jobs the preemptive optimum holds. Both step curves are
// evaluated right-continuously on the union of their breakpoints; breakpoints
// within 1e-9 (relative) collapse to one probe, since work-conserving traces
// share busy periods only up to fp noise at the boundaries.
inline JobCountReport verify_jobcount_inequality(const Instance& inst,
                                                 const DisciplineSpec& disc,
                                                 std::uint64_t seed = 0) {
    Fleet pi_fleet = Fleet::identical(1, natural_mode(disc.discipline));
    auto pi = job_count_curve(simulate(inst, pi_fleet, disc, seed));
    auto star = job_count_curve(simulate(
        inst, Fleet::identical(1, Mode::preemptive),
        DisciplineSpec::of(Discipline::srpt)));

    JobCountReport rep;
    rep.B = size_ratio(inst);

    std::vector<double> probes;
    probes.reserve(pi.times.size() + star.times.size());
    probes.insert(probes.end(), pi.times.begin(), pi.times.end());
    probes.insert(probes.end(), star.times.begin(), star.times.end());
    std::sort(probes.begin(), probes.end());

    std::size_t i = 0;
    while (i < probes.size()) {
        std::size_t j = i;
        while (j + 1 < probes.size() &&
               probes[j + 1] - probes[i] <=
                   1e-9 * std::max(1.0, std::fabs(probes[i])))
            ++j;
        const double t = probes[j];
        const int np = pi.value_at(t);
        const int ns = star.value_at(t);
        const double allowed = rep.B * ns;
        rep.max_excess = std::max(rep.max_excess, np - allowed);
        if (np > allowed + 1e-9 * std::max(1.0, allowed)) {
            rep.ok = false;
            if (rep.violations.size() < 16)
                rep.violations.push_back(JobCountViolation{t, np, ns, allowed});
        }
        i = j + 1;
    }
    return rep;
}

}  // namespace sched
