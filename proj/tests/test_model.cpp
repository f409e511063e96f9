#include <catch2/catch_amalgamated.hpp>

#include "sched/model.hpp"
#include "sched/rng.hpp"

using namespace sched;

namespace {

Instance make(std::vector<Job> jobs) {
    Instance inst;
    inst.jobs = std::move(jobs);
    return inst;
}

}  // namespace

TEST_CASE("nearly_equal mixes relative and absolute tolerance") {
    CHECK(nearly_equal(1.0, 1.0));
    CHECK(nearly_equal(1e12, 1e12 * (1 + 1e-10)));
    CHECK_FALSE(nearly_equal(1e12, 1e12 * (1 + 1e-8)));
    CHECK(nearly_equal(0.0, 1e-13));
    CHECK_FALSE(nearly_equal(0.0, 1e-11));
}

TEST_CASE("instance aggregates") {
    auto inst = make({{1, 0.5, 2.0, 1.0}, {2, 2.0, 8.0, 1.0}, {3, 3.0, 1.0, 1.0}});
    CHECK(inst.n() == 3);
    CHECK(inst.total_workload() == 11.0);
    CHECK(inst.arrival_sum() == 5.5);
}

TEST_CASE("interarrivals start from time zero") {
    auto inst = make({{1, 0.5, 1, 1}, {2, 2.0, 1, 1}, {3, 3.0, 1, 1}});
    const auto dr = inst.interarrivals();
    REQUIRE(dr.size() == 3);
    CHECK(dr[0] == 0.5);
    CHECK(dr[1] == 1.5);
    CHECK(dr[2] == 1.0);
}

TEST_CASE("interarrivals are exact gaps ahead of each job") {
    auto g = make_rng(7);
    std::vector<Job> jobs;
    double r = 0;
    for (int i = 1; i <= 200; ++i) {
        r += next_unit(g) * 3;
        jobs.push_back({i, r, 1.0, 1.0});
    }
    auto inst = make(jobs);
    const auto dr = inst.interarrivals();
    REQUIRE(dr.size() == 200);
    CHECK(dr[0] == inst.jobs[0].arrival);
    for (std::size_t i = 1; i < dr.size(); ++i) {
        CHECK(dr[i] == inst.jobs[i].arrival - inst.jobs[i - 1].arrival);
        CHECK(dr[i] >= 0);
    }
}

TEST_CASE("sort_jobs orders by arrival then id and is stable") {
    auto inst = make({{3, 1.0, 1, 1}, {1, 0.0, 2, 1}, {2, 1.0, 3, 1}});
    inst.sort_jobs();
    CHECK(inst.jobs[0].id == 1);
    CHECK(inst.jobs[1].id == 2);
    CHECK(inst.jobs[2].id == 3);
}

TEST_CASE("validate_instance accepts a clean instance") {
    auto inst = make({{1, 0, 1, 1}, {2, 0.5, 2, 1}});
    CHECK(validate_instance(inst).empty());
}

TEST_CASE("validate_instance flags each defect") {
    SECTION("negative arrival") {
        auto v = validate_instance(make({{1, -1, 1, 1}}));
        REQUIRE_FALSE(v.empty());
        CHECK(v[0].job_id == 1);
    }
    SECTION("non-positive workload") {
        CHECK_FALSE(validate_instance(make({{1, 0, 0, 1}})).empty());
        CHECK_FALSE(validate_instance(make({{1, 0, -2, 1}})).empty());
    }
    SECTION("non-positive weight") {
        CHECK_FALSE(validate_instance(make({{1, 0, 1, 0}})).empty());
    }
    SECTION("non-finite fields") {
        CHECK_FALSE(validate_instance(
                        make({{1, std::numeric_limits<double>::quiet_NaN(), 1, 1}}))
                        .empty());
        CHECK_FALSE(validate_instance(
                        make({{1, 0, std::numeric_limits<double>::infinity(), 1}}))
                        .empty());
    }
    SECTION("duplicate ids") {
        CHECK_FALSE(validate_instance(make({{1, 0, 1, 1}, {1, 1, 1, 1}})).empty());
    }
    SECTION("arrivals out of order") {
        CHECK_FALSE(validate_instance(make({{1, 2, 1, 1}, {2, 1, 1, 1}})).empty());
    }
    SECTION("ids out of order") {
        CHECK_FALSE(validate_instance(make({{2, 0, 1, 1}, {1, 1, 1, 1}})).empty());
    }
}

TEST_CASE("size_ratio is max over min workload") {
    CHECK(size_ratio(make({{1, 0, 2, 1}, {2, 0, 8, 1}})) == 4.0);
    CHECK(size_ratio(make({{1, 0, 3, 1}})) == 1.0);
    CHECK_THROWS_AS(size_ratio(Instance{}), EmptySample);
}

TEST_CASE("derive_metrics reads completions out of a trace") {
    auto inst = make({{1, 0, 3, 2}, {2, 1, 1, 1}});
    ScheduleTrace tr;
    tr.events = {
        {EventKind::arrival, 0, 1, -1},  {EventKind::dispatch, 0, 1, 0},
        {EventKind::arrival, 1, 2, -1},  {EventKind::complete, 3, 1, 0},
        {EventKind::dispatch, 3, 2, 0},  {EventKind::complete, 4, 2, 0},
    };
    tr.horizon = 4;
    auto m = derive_metrics(tr, inst);
    REQUIRE(m.n == 2);
    CHECK(m.per_job[0].completion == 3);
    CHECK(m.per_job[0].flow == 3);
    CHECK(m.per_job[1].completion == 4);
    CHECK(m.per_job[1].flow == 3);
    CHECK(m.total_completion == 7);
    CHECK(m.total_flow == 6);
    CHECK(m.weighted_completion == 2 * 3 + 4);
    CHECK(m.weighted_flow == 2 * 3 + 3);
    CHECK(m.size_ratio == 3.0);
}

TEST_CASE("derive_metrics rejects a trace missing a completion") {
    auto inst = make({{1, 0, 3, 1}, {2, 1, 1, 1}});
    ScheduleTrace tr;
    tr.events = {{EventKind::arrival, 0, 1, -1}, {EventKind::complete, 3, 1, 0}};
    CHECK_THROWS_AS(derive_metrics(tr, inst), IncompleteTrace);
}

TEST_CASE("fleet speed helpers") {
    Fleet f = Fleet::identical(3, Mode::preemptive);
    CHECK(f.speed(2) == 1.0);
    CHECK(f.total_speed() == 3.0);
    CHECK(f.max_speed() == 1.0);
    CHECK(f.min_speed() == 1.0);

    Fleet g{2, {2.0, 0.5}, Mode::non_preemptive};
    CHECK(g.speed(0) == 2.0);
    CHECK(g.speed(1) == 0.5);
    CHECK(g.total_speed() == 2.5);
    CHECK(g.max_speed() == 2.0);
    CHECK(g.min_speed() == 0.5);
}

TEST_CASE("enum names") {
    CHECK(to_string(Mode::non_preemptive) == "non-preemptive");
    CHECK(to_string(Mode::preemptive) == "preemptive");
    CHECK(to_string(EventKind::arrival) == "arrival");
    CHECK(to_string(EventKind::dispatch) == "dispatch");
    CHECK(to_string(EventKind::preempt) == "preempt");
    CHECK(to_string(EventKind::complete) == "complete");
}
