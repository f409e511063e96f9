#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sched/generators.hpp"

using namespace sched;

TEST_CASE("distribution text round-trips") {
    for (const char* text :
         {"det:3", "exp:0.45", "uniform:1:2.5", "lognormal:0:1",
          "pareto:2.5:1", "bpareto:1.5:1:100"})
        CHECK(DistSpec::parse(text).to_string() == text);
}

TEST_CASE("malformed distribution text is rejected") {
    for (const char* text : {"", "exp", "exp:1:2", "uniform:1", "noise:3",
                             "det:", "pareto:2.5", "bpareto:1.5:1"})
        CHECK_THROWS_AS(DistSpec::parse(text), UnsupportedDistribution);
}

TEST_CASE("distribution means") {
    CHECK(DistSpec::det(3).mean() == 3.0);
    CHECK(DistSpec::exp(0.45).mean() == Catch::Approx(1 / 0.45));
    CHECK(DistSpec::unif(1, 2).mean() == 1.5);
    CHECK(DistSpec::lognorm(0, 1).mean() == Catch::Approx(std::exp(0.5)));
    CHECK(DistSpec::pareto(3, 2).mean() == Catch::Approx(3.0));
    // Bounded Pareto, alpha != 1: mean through the truncated density.
    const double a = 1.5, lo = 1, hi = 100;
    const double expect = std::pow(lo, a) / (1 - std::pow(lo / hi, a)) *
                          (a / (a - 1)) *
                          (std::pow(lo, 1 - a) - std::pow(hi, 1 - a));
    CHECK(DistSpec::bpareto(a, lo, hi).mean() == Catch::Approx(expect));
    const double h = DistSpec::bpareto(1, 1, std::exp(1.0)).mean();
    CHECK(h == Catch::Approx(std::exp(1.0) / (std::exp(1.0) - 1)));
}

TEST_CASE("sampling follows the declared means") {
    auto g = make_rng(99);
    auto empirical = [&g](const DistSpec& d, int n) {
        double s = 0;
        for (int i = 0; i < n; ++i) s += d.sample(g);
        return s / n;
    };
    CHECK(empirical(DistSpec::det(3), 10) == 3.0);
    CHECK(empirical(DistSpec::exp(0.5), 200000) ==
          Catch::Approx(2.0).epsilon(0.02));
    CHECK(empirical(DistSpec::unif(1, 2), 100000) ==
          Catch::Approx(1.5).epsilon(0.01));
    CHECK(empirical(DistSpec::lognorm(0, 0.5), 200000) ==
          Catch::Approx(std::exp(0.125)).epsilon(0.02));
    CHECK(empirical(DistSpec::pareto(3, 2), 200000) ==
          Catch::Approx(3.0).epsilon(0.03));
    CHECK(empirical(DistSpec::bpareto(1.5, 1, 100), 200000) ==
          Catch::Approx(DistSpec::bpareto(1.5, 1, 100).mean()).epsilon(0.03));
}

TEST_CASE("samples stay inside their support") {
    auto g = make_rng(5);
    for (int i = 0; i < 2000; ++i) {
        const double u = DistSpec::unif(1, 2).sample(g);
        CHECK(u >= 1.0);
        CHECK(u < 2.0);
        const double p = DistSpec::pareto(2.5, 3).sample(g);
        CHECK(p >= 3.0);
        const double b = DistSpec::bpareto(1.5, 1, 100).sample(g);
        CHECK(b >= 1.0);
        CHECK(b <= 100.0);
        CHECK(DistSpec::exp(2).sample(g) >= 0.0);
        CHECK(DistSpec::lognorm(0, 1).sample(g) > 0.0);
    }
}

TEST_CASE("sampling is reproducible for a fixed generator state") {
    auto g1 = make_rng(123), g2 = make_rng(123);
    for (int i = 0; i < 100; ++i)
        CHECK(DistSpec::exp(1).sample(g1) == DistSpec::exp(1).sample(g2));
}

TEST_CASE("role validation") {
    CHECK_NOTHROW(DistSpec::exp(1).validate(DistRole::workload));
    // Workload tails need a finite second moment with margin.
    CHECK_THROWS_AS(DistSpec::pareto(2.0, 1).validate(DistRole::workload),
                    UnsupportedDistribution);
    CHECK_NOTHROW(DistSpec::pareto(2.2, 1).validate(DistRole::workload));
    CHECK_THROWS_AS(DistSpec::pareto(1.0, 1).validate(DistRole::interarrival),
                    UnsupportedDistribution);
    CHECK_NOTHROW(DistSpec::pareto(1.5, 1).validate(DistRole::interarrival));
    CHECK_THROWS_AS(DistSpec::det(0).validate(DistRole::workload),
                    UnsupportedDistribution);
    CHECK_NOTHROW(DistSpec::det(0).validate(DistRole::interarrival));
    CHECK_THROWS_AS(DistSpec::unif(-1, 2).validate(DistRole::workload),
                    UnsupportedDistribution);
}

TEST_CASE("stochastic generation produces a valid, reproducible instance") {
    StochasticSpec ss;
    ss.n = 300;
    ss.interarrival = DistSpec::exp(1.0);
    ss.workload = DistSpec::exp(0.5);
    ss.seed = 7;
    auto a = gen_stochastic(ss);
    REQUIRE(a.n() == 300);
    CHECK(validate_instance(a).empty());
    for (std::size_t i = 0; i < a.n(); ++i) {
        CHECK(a.jobs[i].id == static_cast<int>(i) + 1);
        CHECK(a.jobs[i].weight == 1.0);
    }
    auto b = gen_stochastic(ss);
    for (std::size_t i = 0; i < a.n(); ++i) {
        CHECK(a.jobs[i].arrival == b.jobs[i].arrival);
        CHECK(a.jobs[i].workload == b.jobs[i].workload);
    }
    ss.seed = 8;
    auto c = gen_stochastic(ss);
    bool differs = false;
    for (std::size_t i = 0; i < a.n(); ++i)
        differs = differs || a.jobs[i].workload != c.jobs[i].workload;
    CHECK(differs);
    CHECK(a.meta.at("generator") == "stochastic");
    CHECK(a.meta.at("seed") == "7");
}

TEST_CASE("arrival ramp scales interarrival draws linearly") {
    StochasticSpec ss;
    ss.n = 5;
    ss.interarrival = DistSpec::det(1.0);
    ss.workload = DistSpec::det(2.0);
    ss.ramp = RampSpec{1.0, 3.0};
    auto inst = gen_stochastic(ss);
    // Gap ahead of job k is the ramped mean: 1, 1.5, 2, 2.5, 3.
    const auto dr = inst.interarrivals();
    REQUIRE(dr.size() == 5);
    CHECK(dr[0] == Catch::Approx(1.0));
    CHECK(dr[1] == Catch::Approx(1.5));
    CHECK(dr[2] == Catch::Approx(2.0));
    CHECK(dr[3] == Catch::Approx(2.5));
    CHECK(dr[4] == Catch::Approx(3.0));
}

TEST_CASE("stochastic spec sanity checks") {
    StochasticSpec ss;
    ss.n = 0;
    CHECK_THROWS_AS(gen_stochastic(ss), Error);
    ss.n = 5;
    ss.workload = DistSpec::pareto(1.5, 1);  // infinite variance
    CHECK_THROWS_AS(gen_stochastic(ss), UnsupportedDistribution);
}

TEST_CASE("adversarial construction") {
    auto inst = gen_adversarial(2, 4, 3);
    REQUIRE(inst.n() == 8);
    CHECK(validate_instance(inst).empty());
    for (int i = 0; i < 2; ++i) {
        CHECK(inst.jobs[static_cast<std::size_t>(i)].arrival == 0.0);
        CHECK(inst.jobs[static_cast<std::size_t>(i)].workload == 4.0);
    }
    std::size_t k = 2;
    for (int t = 0; t < 3; ++t)
        for (int i = 0; i < 2; ++i, ++k) {
            CHECK(inst.jobs[k].arrival == static_cast<double>(t));
            CHECK(inst.jobs[k].workload == 1.0);
        }
    CHECK(inst.meta.at("m") == "2");
    CHECK(inst.meta.at("B") == std::to_string(4.0));
    CHECK(inst.meta.at("n") == "3");
    CHECK(size_ratio(inst) == 4.0);

    CHECK_THROWS_AS(gen_adversarial(0, 4, 3), Error);
    CHECK_THROWS_AS(gen_adversarial(2, 0.5, 3), Error);
    CHECK_THROWS_AS(gen_adversarial(2, 4, 0), Error);
}

TEST_CASE("threshold lift clamps small workloads only") {
    Instance inst;
    inst.jobs = {{1, 0, 0.05, 1}, {2, 1, 2.0, 1}};
    auto lifted = threshold_lift(inst, 0.1);
    CHECK(lifted.jobs[0].workload == 0.1);
    CHECK(lifted.jobs[1].workload == 2.0);
    CHECK(lifted.meta.at("lift_delta") == "0.1");
    CHECK_THROWS_AS(threshold_lift(inst, 0.0), Error);
}
