#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace sched {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IncompleteTrace : Error { using Error::Error; };
struct IncompatibleMode : Error { using Error::Error; };
struct NonTermination : Error { using Error::Error; };
struct TooLarge : Error { using Error::Error; };
struct UnsupportedDistribution : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct EmptySample : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct VerificationFailure : Error { using Error::Error; };

inline constexpr double kRelTol = 1e-9;
inline constexpr double kAbsTol = 1e-12;

inline bool nearly_equal(double a, double b, double rel = kRelTol,
                         double abs = kAbsTol) {
    double diff = std::fabs(a - b);
    if (diff <= abs) return true;
    return diff <= rel * std::max(std::fabs(a), std::fabs(b));
}

struct Job {
    int id = 0;           // 1-based, ascending by arrival
    double arrival = 0;   // r_j >= 0
    double workload = 0;  // p_j > 0
    double weight = 1;    // w_j > 0
};

struct Instance {
    std::vector<Job> jobs;  // sorted by (arrival, id)
    std::map<std::string, std::string> meta;

    std::size_t n() const { return jobs.size(); }

    double total_workload() const {
        double s = 0;
        for (const auto& j : jobs) s += j.workload;
        return s;
    }

    double arrival_sum() const {
        double s = 0;
        for (const auto& j : jobs) s += j.arrival;
        return s;
    }

    // Gaps between consecutive arrivals. Element 0 is the gap from time zero
    // (= r_1), so arrivals are exactly the prefix sums of this vector.
    std::vector<double> interarrivals() const {
        std::vector<double> dr(jobs.size());
        double prev = 0;
        for (std::size_t k = 0; k < jobs.size(); ++k) {
            dr[k] = jobs[k].arrival - prev;
            prev = jobs[k].arrival;
        }
        return dr;
    }

    void sort_jobs() {
        std::stable_sort(jobs.begin(), jobs.end(),
                         [](const Job& a, const Job& b) {
                             if (a.arrival != b.arrival)
                                 return a.arrival < b.arrival;
                             return a.id < b.id;
                         });
    }
};

enum class Mode { non_preemptive, preemptive };

inline std::string to_string(Mode m) {
    return m == Mode::preemptive ? "preemptive" : "non-preemptive";
}

struct Fleet {
    int machines = 1;
    std::vector<double> speeds;  // empty means all speed 1
    Mode mode = Mode::non_preemptive;

    static Fleet identical(int m, Mode mode) { return Fleet{m, {}, mode}; }

    double speed(int k) const {
        return speeds.empty() ? 1.0 : speeds[static_cast<std::size_t>(k)];
    }
    double total_speed() const {
        if (speeds.empty()) return static_cast<double>(machines);
        double s = 0;
        for (double v : speeds) s += v;
        return s;
    }
    double max_speed() const {
        if (speeds.empty()) return 1.0;
        return *std::max_element(speeds.begin(), speeds.end());
    }
    double min_speed() const {
        if (speeds.empty()) return 1.0;
        return *std::min_element(speeds.begin(), speeds.end());
    }
};

enum class EventKind { arrival, dispatch, preempt, complete };

inline std::string to_string(EventKind k) {
    switch (k) {
        case EventKind::arrival: return "arrival";
        case EventKind::dispatch: return "dispatch";
        case EventKind::preempt: return "preempt";
        case EventKind::complete: return "complete";
    }
    return "?";
}

struct TraceEvent {
    EventKind kind{};
    double time = 0;
    int job_id = 0;
    int machine = -1;  // -1 for arrival events

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct ScheduleTrace {
    std::vector<TraceEvent> events;  // nondecreasing in time
    double horizon = 0;              // last completion instant
};

struct JobMetrics {
    int id = 0;
    double completion = 0;
    double flow = 0;
};

struct MetricsReport {
    std::vector<JobMetrics> per_job;  // instance order
    double total_completion = 0;
    double total_flow = 0;
    double weighted_completion = 0;
    double weighted_flow = 0;
    std::size_t n = 0;
    double size_ratio = 0;  // p_max / p_min
};

struct Violation {
    int job_id = 0;  // 0 when the problem is not tied to one job
    std::string message;
};

inline std::vector<Violation> validate_instance(const Instance& inst) {
    std::vector<Violation> out;
    std::map<int, int> seen;
    const Job* prev = nullptr;
    for (const auto& j : inst.jobs) {
        if (j.arrival < 0)
            out.push_back({j.id, "negative arrival"});
        if (!(j.workload > 0))
            out.push_back({j.id, "non-positive workload"});
        if (!(j.weight > 0))
            out.push_back({j.id, "non-positive weight"});
        if (!std::isfinite(j.arrival) || !std::isfinite(j.workload) ||
            !std::isfinite(j.weight))
            out.push_back({j.id, "non-finite field"});
        if (++seen[j.id] == 2)
            out.push_back({j.id, "duplicate id"});
        if (prev) {
            if (j.arrival < prev->arrival)
                out.push_back({j.id, "arrival order broken"});
            else if (j.arrival == prev->arrival && j.id < prev->id)
                out.push_back({j.id, "id order broken within equal arrivals"});
            else if (j.id < prev->id)
                out.push_back({j.id, "id not ascending with arrival"});
        }
        prev = &j;
    }
    return out;
}

inline double size_ratio(const Instance& inst) {
    if (inst.jobs.empty()) throw EmptySample("size_ratio of empty instance");
    double lo = inst.jobs[0].workload, hi = lo;
    for (const auto& j : inst.jobs) {
        lo = std::min(lo, j.workload);
        hi = std::max(hi, j.workload);
    }
    return hi / lo;
}

inline MetricsReport derive_metrics(const ScheduleTrace& trace,
                                    const Instance& inst) {
    std::map<int, double> completion;
    for (const auto& e : trace.events)
        if (e.kind == EventKind::complete) completion[e.job_id] = e.time;

    MetricsReport rep;
    rep.n = inst.n();
    rep.per_job.reserve(inst.n());
    for (const auto& j : inst.jobs) {
        auto it = completion.find(j.id);
        if (it == completion.end())
            throw IncompleteTrace("job " + std::to_string(j.id) +
                                  " never completes in trace");
        double c = it->second;
        double f = c - j.arrival;
        rep.per_job.push_back({j.id, c, f});
        rep.total_completion += c;
        rep.total_flow += f;
        rep.weighted_completion += j.weight * c;
        rep.weighted_flow += j.weight * f;
    }
    if (!inst.jobs.empty()) rep.size_ratio = size_ratio(inst);
    return rep;
}

}  // namespace sched
