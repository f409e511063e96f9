#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sched/model.hpp"
#include "sched/rng.hpp"

namespace sched {

enum class DistFamily {
    deterministic,
    exponential,
    uniform,
    lognormal,
    pareto,
    bounded_pareto
};

enum class DistRole { workload, interarrival, weight };

// Every sampler is a fixed transform of mt19937_64 output, so a (spec, seed)
// pair reproduces the same stream on any platform.
struct DistSpec {
    DistFamily family = DistFamily::deterministic;
    double a = 1, b = 0, c = 0;
    // deterministic: a = value
    // exponential:   a = rate
    // uniform:       a = lo, b = hi
    // lognormal:     a = mu, b = sigma (log scale)
    // pareto:        a = alpha, b = x_m
    // bounded_pareto: a = alpha, b = lo, c = hi

    static DistSpec det(double v) { return {DistFamily::deterministic, v, 0, 0}; }
    static DistSpec exp(double rate) { return {DistFamily::exponential, rate, 0, 0}; }
    static DistSpec unif(double lo, double hi) { return {DistFamily::uniform, lo, hi, 0}; }
    static DistSpec lognorm(double mu, double sigma) { return {DistFamily::lognormal, mu, sigma, 0}; }
    static DistSpec pareto(double alpha, double xm) { return {DistFamily::pareto, alpha, xm, 0}; }
    static DistSpec bpareto(double alpha, double lo, double hi) { return {DistFamily::bounded_pareto, alpha, lo, hi}; }

    double mean() const {
        switch (family) {
            case DistFamily::deterministic: return a;
            case DistFamily::exponential: return 1.0 / a;
            case DistFamily::uniform: return 0.5 * (a + b);
            case DistFamily::lognormal: return std::exp(a + 0.5 * b * b);
            case DistFamily::pareto: return a * b / (a - 1.0);
            case DistFamily::bounded_pareto: {
                const double al = a, lo = b, hi = c;
                if (al == 1.0)
                    return std::log(hi / lo) * lo / (1.0 - lo / hi);
                const double la = std::pow(lo, al);
                return la / (1.0 - std::pow(lo / hi, al)) * al / (al - 1.0) *
                       (std::pow(lo, 1.0 - al) - std::pow(hi, 1.0 - al));
            }
        }
        return 0;
    }

    double sample(std::mt19937_64& g) const {
        switch (family) {
            case DistFamily::deterministic:
                return a;
            case DistFamily::exponential:
                return -std::log(1.0 - next_unit(g)) / a;
            case DistFamily::uniform:
                return a + (b - a) * next_unit(g);
            case DistFamily::lognormal: {
                const double u1 = next_unit_open(g);
                const double u2 = next_unit(g);
                const double z = std::sqrt(-2.0 * std::log(u1)) *
                                 std::cos(2.0 * 3.14159265358979323846 * u2);
                return std::exp(a + b * z);
            }
            case DistFamily::pareto:
                return b * std::pow(1.0 - next_unit(g), -1.0 / a);
            case DistFamily::bounded_pareto: {
                const double u = next_unit(g);
                const double ra = std::pow(b / c, a);
                return b * std::pow(1.0 - u * (1.0 - ra), -1.0 / a);
            }
        }
        return 0;
    }

    // Workload draws must keep a finite (2+eps)-th moment, hence the stricter
    // plain-pareto tail requirement in that role.
    void validate(DistRole role) const {
        auto fail = [this](const std::string& why) {
            throw UnsupportedDistribution(to_string() + ": " + why);
        };
        const bool strict_pos = role != DistRole::interarrival;
        switch (family) {
            case DistFamily::deterministic:
                if (strict_pos ? !(a > 0) : !(a >= 0))
                    fail("value outside support");
                break;
            case DistFamily::exponential:
                if (!(a > 0)) fail("rate must be positive");
                break;
            case DistFamily::uniform:
                if (!(b >= a)) fail("hi below lo");
                if (strict_pos ? !(a > 0) : !(a >= 0)) fail("lo outside support");
                break;
            case DistFamily::lognormal:
                if (!(b >= 0)) fail("sigma must be nonnegative");
                break;
            case DistFamily::pareto:
                if (!(b > 0)) fail("scale must be positive");
                if (role == DistRole::workload && !(a > 2.1))
                    fail("workload tail too heavy (alpha must exceed 2.1)");
                if (role != DistRole::workload && !(a > 1.0))
                    fail("alpha must exceed 1 for a finite mean");
                break;
            case DistFamily::bounded_pareto:
                if (!(a > 0)) fail("alpha must be positive");
                if (!(b > 0) || !(c >= b)) fail("bounds must satisfy 0 < lo <= hi");
                break;
        }
    }

    std::string to_string() const {
        std::ostringstream os;
        switch (family) {
            case DistFamily::deterministic: os << "det:" << a; break;
            case DistFamily::exponential: os << "exp:" << a; break;
            case DistFamily::uniform: os << "uniform:" << a << ":" << b; break;
            case DistFamily::lognormal: os << "lognormal:" << a << ":" << b; break;
            case DistFamily::pareto: os << "pareto:" << a << ":" << b; break;
            case DistFamily::bounded_pareto:
                os << "bpareto:" << a << ":" << b << ":" << c;
                break;
        }
        return os.str();
    }

    static DistSpec parse(const std::string& text) {
        std::vector<std::string> parts;
        std::string cur;
        for (char ch : text) {
            if (ch == ':') {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(ch);
            }
        }
        parts.push_back(cur);
        auto num = [&](std::size_t i) {
            try {
                std::size_t used = 0;
                double v = std::stod(parts.at(i), &used);
                if (used != parts[i].size()) throw std::invalid_argument("");
                return v;
            } catch (const std::exception&) {
                throw UnsupportedDistribution("bad parameter in '" + text + "'");
            }
        };
        auto arity = [&](std::size_t want) {
            if (parts.size() != want + 1)
                throw UnsupportedDistribution("wrong parameter count in '" +
                                              text + "'");
        };
        const std::string& f = parts[0];
        if (f == "det" || f == "deterministic") { arity(1); return det(num(1)); }
        if (f == "exp" || f == "exponential") { arity(1); return exp(num(1)); }
        if (f == "uniform") { arity(2); return unif(num(1), num(2)); }
        if (f == "lognormal") { arity(2); return lognorm(num(1), num(2)); }
        if (f == "pareto") { arity(2); return pareto(num(1), num(2)); }
        if (f == "bpareto" || f == "bounded_pareto") {
            arity(3);
            return bpareto(num(1), num(2), num(3));
        }
        throw UnsupportedDistribution("unknown family in '" + text + "'");
    }
};

// Linear drift of the interarrival mean across the instance, expressed as a
// per-index rescaling of the base distribution.
struct RampSpec {
    double start_mean = 1;
    double end_mean = 1;

    double mean_at(std::size_t k, std::size_t n) const {
        if (n <= 1) return start_mean;
        const double f = static_cast<double>(k) / static_cast<double>(n - 1);
        return start_mean + (end_mean - start_mean) * f;
    }
};

struct StochasticSpec {
    std::size_t n = 0;
    DistSpec interarrival;
    DistSpec workload;
    DistSpec weight = DistSpec::det(1);
    std::optional<RampSpec> ramp;
    std::uint64_t seed = 42;
};

inline Instance gen_stochastic(const StochasticSpec& spec) {
    if (spec.n < 1) throw Error("stochastic spec needs n >= 1");
    spec.interarrival.validate(DistRole::interarrival);
    spec.workload.validate(DistRole::workload);
    spec.weight.validate(DistRole::weight);
    if (spec.ramp && (!(spec.ramp->start_mean >= 0) || !(spec.ramp->end_mean >= 0)))
        throw Error("ramp means must be nonnegative");

    auto rng = make_rng(mix_seed(spec.seed, fnv1a("stochastic")));
    const double base_mean = spec.interarrival.mean();
    Instance inst;
    inst.jobs.reserve(spec.n);
    double r = 0;
    for (std::size_t k = 0; k < spec.n; ++k) {
        double dr = spec.interarrival.sample(rng);
        if (spec.ramp) dr *= spec.ramp->mean_at(k, spec.n) / base_mean;
        r += dr;
        const double p = spec.workload.sample(rng);
        const double w = spec.weight.sample(rng);
        inst.jobs.push_back(Job{static_cast<int>(k) + 1, r, p, w});
    }
    inst.meta["generator"] = "stochastic";
    inst.meta["n"] = std::to_string(spec.n);
    inst.meta["interarrival"] = spec.interarrival.to_string();
    inst.meta["workload"] = spec.workload.to_string();
    inst.meta["weight"] = spec.weight.to_string();
    inst.meta["seed"] = std::to_string(spec.seed);
    if (spec.ramp) {
        std::ostringstream os;
        os << spec.ramp->start_mean << ":" << spec.ramp->end_mean;
        inst.meta["ramp"] = os.str();
    }
    return inst;
}

// The lower-bound family for the flow-time gap: m jobs of length B released
// together, then m unit jobs at every integer instant 0..n-1. Ids place the
// long jobs first so remaining-work ties resolve in their favor.
inline Instance gen_adversarial(int m, double B, int n) {
    if (m < 1 || n < 1) throw Error("adversarial family needs m >= 1, n >= 1");
    if (!(B >= 1)) throw Error("adversarial family needs B >= 1");
    Instance inst;
    inst.jobs.reserve(static_cast<std::size_t>(m) * (1 + static_cast<std::size_t>(n)));
    int id = 1;
    for (int i = 0; i < m; ++i)
        inst.jobs.push_back(Job{id++, 0.0, B, 1.0});
    for (int t = 0; t < n; ++t)
        for (int i = 0; i < m; ++i)
            inst.jobs.push_back(Job{id++, static_cast<double>(t), 1.0, 1.0});
    inst.sort_jobs();
    inst.meta["generator"] = "adversarial";
    inst.meta["m"] = std::to_string(m);
    inst.meta["B"] = std::to_string(B);
    inst.meta["n"] = std::to_string(n);
    return inst;
}

// Clamps workloads from below, bounding the size ratio of the result.
inline Instance threshold_lift(const Instance& inst, double delta) {
    if (!(delta > 0)) throw Error("lift threshold must be positive");
    Instance out = inst;
    for (auto& j : out.jobs) j.workload = std::max(j.workload, delta);
    std::ostringstream os;
    os << delta;
    out.meta["lift_delta"] = os.str();
    return out;
}

}  // namespace sched
