#pragma once

#include <cctype>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sched/model.hpp"
#include "sched/rng.hpp"

namespace sched {

enum class Discipline { fcfs, spt, srpt, lrpt, random };

inline std::string to_string(Discipline d) {
    switch (d) {
        case Discipline::fcfs: return "FCFS";
        case Discipline::spt: return "SPT";
        case Discipline::srpt: return "SRPT";
        case Discipline::lrpt: return "LRPT";
        case Discipline::random: return "RANDOM";
    }
    return "?";
}

inline Discipline parse_discipline(const std::string& s) {
    std::string u;
    for (char c : s) u.push_back(static_cast<char>(std::toupper(c)));
    if (u == "FCFS") return Discipline::fcfs;
    if (u == "SPT") return Discipline::spt;
    if (u == "SRPT") return Discipline::srpt;
    if (u == "LRPT") return Discipline::lrpt;
    if (u == "RANDOM") return Discipline::random;
    throw Error("unknown discipline: " + s);
}

struct DisciplineSpec {
    Discipline discipline = Discipline::fcfs;
    double quantum = 1e-3;     // LRPT wake-up floor
    std::string rng_tag;       // extra RANDOM stream separation

    static DisciplineSpec of(Discipline d) { return DisciplineSpec{d, 1e-3, {}}; }
};

inline bool mode_compatible(Discipline d, Mode mode) {
    switch (d) {
        case Discipline::fcfs:
        case Discipline::spt:
            return mode == Mode::non_preemptive;
        case Discipline::srpt:
        case Discipline::lrpt:
            return mode == Mode::preemptive;
        case Discipline::random:
            return true;
    }
    return false;
}

// The mode a discipline runs under when the caller has no opinion.
inline Mode natural_mode(Discipline d) {
    return (d == Discipline::srpt || d == Discipline::lrpt)
               ? Mode::preemptive
               : Mode::non_preemptive;
}

struct ReleasedJob {
    std::size_t pos = 0;  // index into the instance's job vector
    int id = 0;
    double arrival = 0;
    double workload = 0;
    double remaining = 0;
};

// Strict weak order: smaller = served first. All ties resolve by ascending id,
// which equals ascending arrival index under the instance invariants.
struct PriorityLess {
    Discipline d = Discipline::fcfs;
    bool operator()(const ReleasedJob& a, const ReleasedJob& b) const {
        switch (d) {
            case Discipline::fcfs:
                if (a.arrival != b.arrival) return a.arrival < b.arrival;
                break;
            case Discipline::spt:
                if (a.workload != b.workload) return a.workload < b.workload;
                break;
            case Discipline::srpt:
                if (a.remaining != b.remaining) return a.remaining < b.remaining;
                break;
            case Discipline::lrpt:
                if (a.remaining != b.remaining) return a.remaining > b.remaining;
                break;
            case Discipline::random:
                break;
        }
        return a.id < b.id;
    }
};

// Full service order over the released set at one decision instant.
// RANDOM draws a fresh uniform permutation from rng.
inline std::vector<std::size_t> priority_order(const DisciplineSpec& spec,
                                               const std::vector<ReleasedJob>& released,
                                               std::mt19937_64& rng) {
    if (released.empty()) throw EmptySample("priority_order over empty set");
    std::vector<std::size_t> idx(released.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (spec.discipline == Discipline::random) {
        shuffle_inplace(idx, rng);
        return idx;
    }
    PriorityLess less{spec.discipline};
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return less(released[a], released[b]);
    });
    return idx;
}

struct RunningJob {
    ReleasedJob job;
    double speed = 1;
};

// LRPT is the one discipline whose relative order changes between natural
// events: a running job's remaining work decays toward the best waiting job's.
// A wake-up is requested at the first instant a running job, currently
// strictly above the waiting maximum, falls level with it; the request is
// floored at clock + quantum so equal-remaining churn cannot accumulate.
// At exact equality nothing is requested (ties sit still until the next
// arrival or completion re-ranks them by id).
inline std::optional<double> wakeup_request(const DisciplineSpec& spec,
                                            const std::vector<RunningJob>& running,
                                            const std::vector<ReleasedJob>& waiting,
                                            double clock) {
    if (spec.discipline != Discipline::lrpt) return std::nullopt;
    if (waiting.empty() || running.empty()) return std::nullopt;
    double maxw = waiting[0].remaining;
    for (const auto& w : waiting) maxw = std::max(maxw, w.remaining);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : running)
        if (r.job.remaining > maxw)
            best = std::min(best, clock + (r.job.remaining - maxw) / r.speed);
    if (!std::isfinite(best)) return std::nullopt;
    return std::max(best, clock + spec.quantum);
}

}  // namespace sched
