#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sched/disciplines.hpp"
#include "sched/model.hpp"
#include "sched/rng.hpp"

namespace sched {

// Right-continuous integer step function; value is 0 before the first
// breakpoint and values[i] on [times[i], times[i+1]).
struct StepFunction {
    std::vector<double> times;
    std::vector<int> values;

    int value_at(double t) const {
        auto it = std::upper_bound(times.begin(), times.end(), t);
        if (it == times.begin()) return 0;
        return values[static_cast<std::size_t>(it - times.begin()) - 1];
    }

    double integral() const {
        double s = 0;
        for (std::size_t i = 0; i + 1 < times.size(); ++i)
            s += static_cast<double>(values[i]) * (times[i + 1] - times[i]);
        return s;
    }
};

// Number of released-but-unfinished jobs over time. Events sharing a
// timestamp collapse into a single breakpoint carrying the post-event count.
inline StepFunction job_count_curve(const ScheduleTrace& trace) {
    StepFunction f;
    int cur = 0;
    for (const auto& e : trace.events) {
        int d;
        if (e.kind == EventKind::arrival) d = 1;
        else if (e.kind == EventKind::complete) d = -1;
        else continue;
        cur += d;
        if (!f.times.empty() && f.times.back() == e.time)
            f.values.back() = cur;
        else {
            f.times.push_back(e.time);
            f.values.push_back(cur);
        }
    }
    return f;
}

namespace detail {

struct WaitKey {
    double key = 0;
    int id = 0;
    std::size_t pos = 0;
};

struct WaitLess {
    bool desc = false;
    bool operator()(const WaitKey& a, const WaitKey& b) const {
        if (a.key != b.key) return desc ? a.key > b.key : a.key < b.key;
        return a.id < b.id;
    }
};

class Simulator {
public:
    Simulator(const Instance& inst, const Fleet& fleet,
              const DisciplineSpec& disc, std::uint64_t seed,
              bool full_trace = true)
        : inst_(inst),
          fleet_(fleet),
          disc_(disc),
          full_trace_(full_trace),
          rng_(make_rng(mix_seed(seed, fnv1a(disc.rng_tag)))),
          waiting_(WaitLess{disc.discipline == Discipline::lrpt}) {}

    ScheduleTrace run() {
        check_preconditions();
        const std::size_t n = inst_.n();
        const std::uint64_t budget = 1000000ull * std::max<std::size_t>(n, 1);
        remaining_.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            remaining_[i] = inst_.jobs[i].workload;
        machines_.assign(static_cast<std::size_t>(fleet_.machines), Machine{});
        trace_.events.reserve(full_trace_ ? 3 * n + 16 : n);

        std::size_t done = 0;
        while (done < n) {
            const double arrival_t = next_arrival_ < n
                                         ? inst_.jobs[next_arrival_].arrival
                                         : std::numeric_limits<double>::infinity();
            double min_pred = std::numeric_limits<double>::infinity();
            for (const auto& M : machines_)
                if (M.job >= 0) min_pred = std::min(min_pred, M.predicted);
            double t = std::min(arrival_t, min_pred);
            if (wake_) t = std::min(t, *wake_);
            if (wake_ && *wake_ == t && arrival_t != t && min_pred != t) {
                // Only the LRPT boundary can move here: no machine finishes
                // and nothing arrives, so the decision reduces to swapping
                // the worst running job against the best waiting one.
                clock_ = t;
                wake_.reset();
                lrpt_boundary_swaps(t);
                compute_wake(t);
            } else {
                clock_ = t;
                done += settle_completions(t);
                admit_arrivals(t);
                if (wake_ && *wake_ <= t) wake_.reset();
                decide(t);
            }
            if (++iterations_ > budget)
                throw NonTermination(
                    "event budget exceeded: " + std::to_string(iterations_) +
                    " iterations, clock " + std::to_string(clock_) + ", " +
                    std::to_string(done) + "/" + std::to_string(n) + " jobs done");
        }
        trace_.horizon = last_completion_;
        return std::move(trace_);
    }

private:
    struct Machine {
        int job = -1;  // position in inst_.jobs, -1 when idle
        double dispatch_time = 0;
        double predicted = 0;  // completion instant, recomputed only at dispatch
    };

    void check_preconditions() {
        if (fleet_.machines < 1) throw Error("fleet needs at least one machine");
        if (!fleet_.speeds.empty()) {
            if (static_cast<int>(fleet_.speeds.size()) != fleet_.machines)
                throw Error("speed vector length does not match machine count");
            for (double s : fleet_.speeds)
                if (!(s > 0)) throw Error("non-positive machine speed");
        }
        if (!mode_compatible(disc_.discipline, fleet_.mode))
            throw IncompatibleMode(to_string(disc_.discipline) + " cannot run " +
                                   to_string(fleet_.mode));
        if (disc_.discipline == Discipline::lrpt && !(disc_.quantum > 0))
            throw Error("LRPT quantum must be positive");
        auto bad = validate_instance(inst_);
        if (!bad.empty())
            throw Error("invalid instance: job " + std::to_string(bad[0].job_id) +
                        ": " + bad[0].message);
    }

    // Remaining work is stored as a snapshot taken at the last (re)dispatch;
    // the live value is derived on demand instead of being advanced at every
    // event. One subtraction per service interval also beats the drift of
    // incremental updates.
    double live_remaining(std::size_t k, double t) const {
        const auto& M = machines_[k];
        return remaining_[static_cast<std::size_t>(M.job)] -
               (t - M.dispatch_time) * fleet_.speed(static_cast<int>(k));
    }

    void materialize(std::size_t k, double t) {
        auto& M = machines_[k];
        remaining_[static_cast<std::size_t>(M.job)] =
            std::max(0.0, live_remaining(k, t));
    }

    std::size_t settle_completions(double t) {
        std::size_t done = 0;
        for (std::size_t k = 0; k < machines_.size(); ++k) {
            auto& M = machines_[k];
            if (M.job < 0 || M.predicted != t) continue;
            const std::size_t pos = static_cast<std::size_t>(M.job);
            remaining_[pos] = 0;
            emit(EventKind::complete, t, inst_.jobs[pos].id, static_cast<int>(k));
            last_completion_ = t;
            M.job = -1;
            if (random_preemptive())
                erase_from_pool(pool_, pos);
            ++done;
        }
        return done;
    }

    void admit_arrivals(double t) {
        while (next_arrival_ < inst_.n() &&
               inst_.jobs[next_arrival_].arrival == t) {
            const std::size_t pos = next_arrival_;
            emit(EventKind::arrival, t, inst_.jobs[pos].id, -1);
            if (disc_.discipline == Discipline::random)
                pool_.push_back(pos);
            else
                waiting_.insert(wait_key(pos));
            ++next_arrival_;
        }
    }

    void decide(double t) {
        if (fleet_.mode == Mode::non_preemptive)
            decide_non_preemptive(t);
        else if (disc_.discipline == Discipline::random)
            decide_random_preemptive(t);
        else
            decide_preemptive(t);
        // Work conservation: a machine may stay idle only when nothing waits.
        compute_wake(t);
    }

    void decide_non_preemptive(double t) {
        for (int k : free_machines_by_speed()) {
            std::size_t pos;
            if (disc_.discipline == Discipline::random) {
                if (pool_.empty()) break;
                const std::size_t i =
                    static_cast<std::size_t>(next_below(rng_, pool_.size()));
                pos = pool_[i];
                pool_.erase(pool_.begin() + static_cast<std::ptrdiff_t>(i));
            } else {
                if (waiting_.empty()) break;
                pos = waiting_.begin()->pos;
                waiting_.erase(waiting_.begin());
            }
            dispatch(k, pos, t);
        }
    }

    void decide_preemptive(double t) {
        struct Cand {
            double rem;
            int id;
            std::size_t pos;
            int machine;  // -1 if waiting
        };
        std::vector<Cand> cand;
        cand.reserve(machines_.size() * 2);
        for (std::size_t k = 0; k < machines_.size(); ++k)
            if (machines_[k].job >= 0) {
                const auto pos = static_cast<std::size_t>(machines_[k].job);
                cand.push_back({live_remaining(k, t), inst_.jobs[pos].id, pos,
                                static_cast<int>(k)});
            }
        auto it = waiting_.begin();
        for (std::size_t i = 0;
             i < machines_.size() && it != waiting_.end(); ++i, ++it)
            cand.push_back({it->key, it->id, it->pos, -1});
        if (cand.empty()) return;

        const bool lrpt = disc_.discipline == Discipline::lrpt;
        auto better = [lrpt](const Cand& a, const Cand& b) {
            if (a.rem != b.rem) return lrpt ? a.rem > b.rem : a.rem < b.rem;
            return a.id < b.id;
        };
        std::sort(cand.begin(), cand.end(), better);
        const std::size_t take = std::min(machines_.size(), cand.size());

        std::vector<Cand> incoming;  // best first
        for (std::size_t i = 0; i < take; ++i)
            if (cand[i].machine < 0) incoming.push_back(cand[i]);
        std::vector<Cand> victims;  // running jobs pushed out; worst first
        for (std::size_t i = take; i < cand.size(); ++i)
            if (cand[i].machine >= 0) victims.push_back(cand[i]);
        std::reverse(victims.begin(), victims.end());

        // Freshly dispatched work is immune to same-remaining swaps for one
        // quantum, otherwise equal-length jobs could trade places forever.
        // Each protected victim cancels one incoming job of equal remaining.
        if (lrpt && !victims.empty() && !incoming.empty()) {
            std::vector<bool> drop_inc(incoming.size(), false),
                drop_vic(victims.size(), false);
            for (std::size_t v = 0; v < victims.size(); ++v) {
                const auto& vic = victims[v];
                if (t - machines_[static_cast<std::size_t>(vic.machine)]
                                .dispatch_time >= disc_.quantum)
                    continue;
                for (std::size_t i = incoming.size(); i-- > 0;) {
                    if (!drop_inc[i] && incoming[i].rem == vic.rem) {
                        drop_inc[i] = drop_vic[v] = true;
                        break;
                    }
                }
            }
            std::vector<Cand> inc2, vic2;
            for (std::size_t i = 0; i < incoming.size(); ++i)
                if (!drop_inc[i]) inc2.push_back(incoming[i]);
            for (std::size_t i = 0; i < victims.size(); ++i)
                if (!drop_vic[i]) vic2.push_back(victims[i]);
            incoming.swap(inc2);
            victims.swap(vic2);
        }

        std::sort(victims.begin(), victims.end(),
                  [](const Cand& a, const Cand& b) { return a.machine < b.machine; });
        for (const auto& v : victims) {
            materialize(static_cast<std::size_t>(v.machine), t);
            emit(EventKind::preempt, t, v.id, v.machine);
            machines_[static_cast<std::size_t>(v.machine)].job = -1;
            waiting_.insert(WaitKey{remaining_[v.pos], v.id, v.pos});
        }
        const auto free = free_machines_by_speed();
        std::size_t fi = 0;
        for (const auto& inc : incoming) {
            waiting_.erase(WaitKey{inc.rem, inc.id, inc.pos});
            dispatch(free[fi++], inc.pos, t);
        }
    }

    void decide_random_preemptive(double t) {
        // Re-randomized occupancy; decision instants are exactly arrivals and
        // completions since RANDOM never requests wake-ups.
        if (pool_.empty()) return;
        std::vector<std::size_t> perm = pool_;
        shuffle_inplace(perm, rng_);
        const std::size_t take = std::min(machines_.size(), perm.size());
        std::vector<bool> keep_machine(machines_.size(), false);
        std::vector<std::size_t> incoming;
        for (std::size_t i = 0; i < take; ++i) {
            const std::size_t pos = perm[i];
            int on = machine_of(pos);
            if (on >= 0)
                keep_machine[static_cast<std::size_t>(on)] = true;
            else
                incoming.push_back(pos);
        }
        for (std::size_t k = 0; k < machines_.size(); ++k) {
            auto& M = machines_[k];
            if (M.job >= 0 && !keep_machine[k]) {
                const auto pos = static_cast<std::size_t>(M.job);
                materialize(k, t);
                emit(EventKind::preempt, t, inst_.jobs[pos].id,
                     static_cast<int>(k));
                M.job = -1;
            }
        }
        const auto free = free_machines_by_speed();
        std::size_t fi = 0;
        for (std::size_t pos : incoming) dispatch(free[fi++], pos, t);
    }

    // One wake-up step: pull the best waiting job onto the machine holding
    // the worst running one, repeating while the waiting side wins. Reuses
    // the extracted set node for the evicted job, so the hot loop does not
    // touch the allocator.
    void lrpt_boundary_swaps(double t) {
        for (std::size_t guard = 0; guard < machines_.size(); ++guard) {
            if (waiting_.empty()) return;
            double worst_rem = std::numeric_limits<double>::infinity();
            int worst_id = -1;
            std::size_t worst_k = 0;
            for (std::size_t k = 0; k < machines_.size(); ++k) {
                if (machines_[k].job < 0) return;  // settled elsewhere
                const double rem = live_remaining(k, t);
                const int id =
                    inst_.jobs[static_cast<std::size_t>(machines_[k].job)].id;
                if (rem < worst_rem || (rem == worst_rem && id > worst_id)) {
                    worst_rem = rem;
                    worst_id = id;
                    worst_k = k;
                }
            }
            const auto& best = *waiting_.begin();
            const bool wins =
                best.key > worst_rem || (best.key == worst_rem && best.id < worst_id);
            if (!wins) return;
            if (best.key == worst_rem &&
                t - machines_[worst_k].dispatch_time < disc_.quantum)
                return;  // same-value swap inside the protection quantum

            const std::size_t vic_pos =
                static_cast<std::size_t>(machines_[worst_k].job);
            materialize(worst_k, t);
            emit(EventKind::preempt, t, inst_.jobs[vic_pos].id,
                 static_cast<int>(worst_k));
            auto node = waiting_.extract(waiting_.begin());
            const std::size_t in_pos = node.value().pos;
            node.value() =
                WaitKey{remaining_[vic_pos], inst_.jobs[vic_pos].id, vic_pos};
            waiting_.insert(std::move(node));
            dispatch(static_cast<int>(worst_k), in_pos, t);
        }
    }

    void compute_wake(double t) {
        wake_.reset();
        if (disc_.discipline != Discipline::lrpt || waiting_.empty()) return;
        const double maxw = waiting_.begin()->key;  // set is ordered descending
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < machines_.size(); ++k) {
            if (machines_[k].job < 0) continue;
            const double rem = live_remaining(k, t);
            if (rem > maxw)
                best = std::min(best,
                                t + (rem - maxw) / fleet_.speed(static_cast<int>(k)));
        }
        if (std::isfinite(best)) wake_ = std::max(best, t + disc_.quantum);
    }

    std::vector<int> free_machines_by_speed() const {
        std::vector<int> free;
        for (std::size_t k = 0; k < machines_.size(); ++k)
            if (machines_[k].job < 0) free.push_back(static_cast<int>(k));
        std::stable_sort(free.begin(), free.end(), [this](int a, int b) {
            return fleet_.speed(a) > fleet_.speed(b);
        });
        return free;
    }

    int machine_of(std::size_t pos) const {
        for (std::size_t k = 0; k < machines_.size(); ++k)
            if (machines_[k].job == static_cast<int>(pos))
                return static_cast<int>(k);
        return -1;
    }

    WaitKey wait_key(std::size_t pos) const {
        double key = 0;
        switch (disc_.discipline) {
            case Discipline::fcfs: key = inst_.jobs[pos].arrival; break;
            case Discipline::spt: key = inst_.jobs[pos].workload; break;
            case Discipline::srpt:
            case Discipline::lrpt: key = remaining_[pos]; break;
            case Discipline::random: break;
        }
        return WaitKey{key, inst_.jobs[pos].id, pos};
    }

    void dispatch(int k, std::size_t pos, double t) {
        auto& M = machines_[static_cast<std::size_t>(k)];
        M.job = static_cast<int>(pos);
        M.dispatch_time = t;
        M.predicted = t + remaining_[pos] / fleet_.speed(k);
        emit(EventKind::dispatch, t, inst_.jobs[pos].id, k);
    }

    void emit(EventKind kind, double t, int id, int machine) {
        if (!full_trace_ && kind != EventKind::complete) return;
        trace_.events.push_back(TraceEvent{kind, t, id, machine});
    }

    static void erase_from_pool(std::vector<std::size_t>& pool, std::size_t pos) {
        for (std::size_t i = 0; i < pool.size(); ++i)
            if (pool[i] == pos) {
                pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(i));
                return;
            }
    }

    bool random_preemptive() const {
        return disc_.discipline == Discipline::random &&
               fleet_.mode == Mode::preemptive;
    }

    const Instance& inst_;
    Fleet fleet_;
    DisciplineSpec disc_;
    bool full_trace_ = true;
    std::mt19937_64 rng_;

    double clock_ = 0;
    double last_completion_ = 0;
    std::vector<double> remaining_;  // live for waiting jobs, dispatch snapshot
                                     // for running ones
    std::vector<Machine> machines_;
    std::set<WaitKey, WaitLess> waiting_;   // ranked disciplines
    std::vector<std::size_t> pool_;         // RANDOM
    std::size_t next_arrival_ = 0;
    std::optional<double> wake_;
    std::uint64_t iterations_ = 0;
    ScheduleTrace trace_;
};

}  // namespace detail

// Runs one discipline over one instance on one fleet. The trace is a pure
// function of the four arguments; the seed only feeds RANDOM's stream.
inline ScheduleTrace simulate(const Instance& inst, const Fleet& fleet,
                              const DisciplineSpec& disc,
                              std::uint64_t seed = 0) {
    return detail::Simulator(inst, fleet, disc, seed).run();
}

// Same dynamics, but the trace keeps completion events only. Used by bulk
// sweeps where storing every dispatch and preemption would dominate cost.
inline MetricsReport simulate_metrics(const Instance& inst, const Fleet& fleet,
                                      const DisciplineSpec& disc,
                                      std::uint64_t seed = 0) {
    auto trace = detail::Simulator(inst, fleet, disc, seed, false).run();
    return derive_metrics(trace, inst);
}

}  // namespace sched
