#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sched/analytics.hpp"
#include "sched/corpus.hpp"
#include "sched/disciplines.hpp"
#include "sched/engine.hpp"
#include "sched/generators.hpp"
#include "sched/harness.hpp"
#include "sched/io.hpp"
#include "sched/model.hpp"
#include "sched/oracles.hpp"

using nlohmann::json;

namespace {

sched::RampSpec parse_ramp(const std::string& text) {
    const auto sep = text.find(':');
    if (sep == std::string::npos)
        throw sched::Error("ramp must be start:end, got '" + text + "'");
    try {
        return sched::RampSpec{std::stod(text.substr(0, sep)),
                               std::stod(text.substr(sep + 1))};
    } catch (const std::exception&) {
        throw sched::Error("ramp must be start:end, got '" + text + "'");
    }
}

sched::StochasticSpec stochastic_from_json(const json& cfg) {
    sched::StochasticSpec s;
    s.n = cfg.at("n").get<std::size_t>();
    s.interarrival = sched::DistSpec::parse(cfg.at("interarrival").get<std::string>());
    s.workload = sched::DistSpec::parse(cfg.at("workload").get<std::string>());
    if (cfg.contains("weight"))
        s.weight = sched::DistSpec::parse(cfg.at("weight").get<std::string>());
    if (cfg.contains("ramp")) s.ramp = parse_ramp(cfg.at("ramp").get<std::string>());
    if (cfg.contains("seed")) s.seed = cfg.at("seed").get<std::uint64_t>();
    return s;
}

sched::Fleet make_fleet(int machines, const std::vector<double>& speeds,
                        sched::Mode mode) {
    sched::Fleet f;
    f.machines = machines;
    f.speeds = speeds;
    f.mode = mode;
    return f;
}

void require_valid(const sched::Instance& inst) {
    auto bad = sched::validate_instance(inst);
    if (!bad.empty()) {
        std::string msg = "invalid instance:";
        for (const auto& v : bad)
            msg += " [job " + std::to_string(v.job_id) + ": " + v.message + "]";
        throw sched::Error(msg);
    }
}

// --- generate ---

struct GenerateOpts {
    std::string config;
    std::string type = "stochastic";
    std::size_t n = 0;
    std::string interarrival, workload, weight, ramp;
    int machines = 1;
    double B = 2;
    std::uint64_t seed = 42;
    double lift = 0;
    std::string out;
};

void run_generate(const GenerateOpts& o) {
    sched::Instance inst;
    std::string type = o.type;
    if (!o.config.empty()) {
        json cfg = sched::io::read_config(o.config);
        type = cfg.value("type", "stochastic");
        if (type == "stochastic") {
            inst = sched::gen_stochastic(stochastic_from_json(cfg));
        } else if (type == "adversarial") {
            inst = sched::gen_adversarial(cfg.at("m").get<int>(),
                                          cfg.at("B").get<double>(),
                                          cfg.at("n").get<int>());
        } else {
            throw sched::Error("unknown generator type '" + type + "'");
        }
    } else if (type == "stochastic") {
        sched::StochasticSpec s;
        s.n = o.n;
        if (o.interarrival.empty() || o.workload.empty())
            throw sched::Error(
                "stochastic generation needs --interarrival and --workload");
        s.interarrival = sched::DistSpec::parse(o.interarrival);
        s.workload = sched::DistSpec::parse(o.workload);
        if (!o.weight.empty()) s.weight = sched::DistSpec::parse(o.weight);
        if (!o.ramp.empty()) s.ramp = parse_ramp(o.ramp);
        s.seed = o.seed;
        inst = sched::gen_stochastic(s);
    } else if (type == "adversarial") {
        inst = sched::gen_adversarial(o.machines, o.B, static_cast<int>(o.n));
    } else {
        throw sched::Error("unknown generator type '" + type + "'");
    }
    if (o.lift > 0) inst = sched::threshold_lift(inst, o.lift);

    if (o.out.empty()) {
        sched::io::write_instance_csv(std::cout, inst);
    } else {
        sched::io::write_instance(o.out, inst);
        std::cerr << "wrote " << inst.n() << " jobs to " << o.out << "\n";
    }
}

// --- simulate ---

struct SimulateOpts {
    std::string instance;
    std::string discipline = "FCFS";
    int machines = 1;
    std::vector<double> speeds;
    std::string mode;  // empty = discipline default
    std::uint64_t seed = 42;
    double quantum = 1e-3;
    std::string trace_out;
};

void run_simulate(const SimulateOpts& o) {
    sched::Instance inst = sched::io::read_instance(o.instance);
    require_valid(inst);
    auto d = sched::DisciplineSpec::of(sched::parse_discipline(o.discipline));
    d.quantum = o.quantum;
    sched::Mode mode = sched::natural_mode(d.discipline);
    if (o.mode == "preemptive") mode = sched::Mode::preemptive;
    else if (o.mode == "non-preemptive") mode = sched::Mode::non_preemptive;
    else if (!o.mode.empty())
        throw sched::Error("mode must be preemptive or non-preemptive");

    auto fleet = make_fleet(o.machines, o.speeds, mode);
    auto trace = sched::simulate(inst, fleet, d, o.seed);
    auto metrics = sched::derive_metrics(trace, inst);
    if (!o.trace_out.empty()) sched::io::write_trace(o.trace_out, trace);

    json out;
    out["n"] = metrics.n;
    out["discipline"] = sched::to_string(d.discipline);
    out["mode"] = sched::to_string(mode);
    out["machines"] = o.machines;
    out["total_flow"] = metrics.total_flow;
    out["total_completion"] = metrics.total_completion;
    out["weighted_flow"] = metrics.weighted_flow;
    out["weighted_completion"] = metrics.weighted_completion;
    out["size_ratio"] = metrics.size_ratio;
    out["horizon"] = trace.horizon;
    out["events"] = trace.events.size();
    std::cout << out.dump(2) << "\n";
}

// --- bounds ---

struct BoundsOpts {
    std::string instance;
    int machines = 1;
    std::vector<double> speeds;
};

void run_bounds(const BoundsOpts& o) {
    sched::Instance inst = sched::io::read_instance(o.instance);
    require_valid(inst);
    auto fleet = make_fleet(o.machines, o.speeds, sched::Mode::non_preemptive);
    json out;
    out["n"] = inst.n();
    out["machines"] = o.machines;
    out["arrival_lb"] = sched::arrival_time_lower_bound(inst);
    out["workload_lb"] = sched::workload_lower_bound(inst, fleet);
    out["per_job_lb"] = sched::per_job_lower_bound(inst, fleet);
    out["completion_lb"] = sched::completion_lower_bound(inst, fleet);
    out["size_ratio"] = sched::size_ratio(inst);
    std::cout << out.dump(2) << "\n";
}

// --- stability ---

struct StabilityOpts {
    std::string config;
    std::string instance;
    int machines = 1;
};

void run_stability(const StabilityOpts& o) {
    sched::MeanSchedule sched_means;
    if (!o.config.empty()) {
        auto spec = stochastic_from_json(sched::io::read_config(o.config));
        sched_means = sched::declared_means(spec);
    } else if (!o.instance.empty()) {
        sched::Instance inst = sched::io::read_instance(o.instance);
        require_valid(inst);
        sched_means = sched::sample_means(inst);
    } else {
        throw sched::Error("stability needs --config or --instance");
    }
    auto rep = sched::stability_stats(sched_means, o.machines);
    json out;
    out["estimator"] = sched_means.source;
    out["n"] = rep.n;
    out["machines"] = o.machines;
    out["rho_n"] = rep.rho_n;
    out["s_single"] = rep.s_single;
    out["s_multi"] = rep.s_multi;
    out["stable"] = rep.stable;
    std::cout << out.dump(2) << "\n";
}

// --- verify ---

struct VerifyOpts {
    std::string corpus = "small";
    std::string bound = "all";
    std::string config;
    int count = 0;  // 0 = corpus default
    std::uint64_t seed = 42;
    bool seed_set = false;
};

std::vector<sched::DisciplineSpec> all_disciplines() {
    return {sched::DisciplineSpec::of(sched::Discipline::fcfs),
            sched::DisciplineSpec::of(sched::Discipline::spt),
            sched::DisciplineSpec::of(sched::Discipline::srpt),
            sched::DisciplineSpec::of(sched::Discipline::lrpt),
            sched::DisciplineSpec::of(sched::Discipline::random)};
}

void run_verify(const VerifyOpts& o) {
    std::string corpus = o.corpus;
    std::string bound = o.bound;
    sched::SmallCorpusSpec small;
    sched::M1CorpusSpec m1;
    int count = o.count;
    std::uint64_t seed = o.seed;
    bool seed_set = o.seed_set;
    if (!o.config.empty()) {
        json cfg = sched::io::read_config(o.config);
        corpus = cfg.value("corpus", corpus);
        bound = cfg.value("bound", bound);
        if (cfg.contains("count")) count = cfg.at("count").get<int>();
        if (cfg.contains("seed")) {
            seed = cfg.at("seed").get<std::uint64_t>();
            seed_set = true;
        }
        small.n_max = cfg.value("n_max", small.n_max);
        small.m_max = cfg.value("m_max", small.m_max);
        small.p_lo = cfg.value("p_lo", small.p_lo);
        small.p_hi = cfg.value("p_hi", small.p_hi);
        small.gap_max = cfg.value("gap_max", small.gap_max);
        m1.n_max = cfg.value("n_max", m1.n_max);
        m1.arrival_rate = cfg.value("arrival_rate", m1.arrival_rate);
        m1.mean_workload = cfg.value("mean_workload", m1.mean_workload);
    }
    if (seed_set) {
        small.seed = seed;
        m1.seed = seed;
    }
    const bool check_2b = bound == "2B" || bound == "2b" || bound == "all";
    const bool check_jobcount = bound == "jobcount" || bound == "all";
    if (!check_2b && !check_jobcount)
        throw sched::Error("unknown bound '" + bound + "' (2B, jobcount, all)");

    json report;
    report["corpus"] = corpus;
    report["bound"] = bound;
    std::size_t failures = 0;
    double worst_2b_margin = 0;  // max flow / (2B opt)
    double worst_excess = 0;
    int checked = 0;

    auto disciplines = all_disciplines();
    if (corpus == "small") {
        small.count = count > 0 ? count : small.count;
        for (int i = 0; i < small.count; ++i) {
            auto c = sched::make_small_case(small, i);
            auto fleet = sched::Fleet::identical(c.machines,
                                                 sched::Mode::non_preemptive);
            if (check_2b) {
                auto rep = sched::verify_2B(c.inst, fleet, disciplines,
                                            small.seed + static_cast<std::uint64_t>(i));
                for (const auto& row : rep.rows)
                    worst_2b_margin = std::max(
                        worst_2b_margin, row.flow / (2 * rep.B * rep.opt_flow));
                if (!rep.all_ok) ++failures;
            }
            ++checked;
        }
        report["count"] = small.count;
    } else if (corpus == "preemptive-m1" || corpus == "jobcount") {
        const bool fixed_n = corpus == "jobcount";
        m1.count = count > 0 ? count : (fixed_n ? 100 : m1.count);
        if (fixed_n) m1.mean_workload = 0.9;
        for (int i = 0; i < m1.count; ++i) {
            auto inst = sched::make_m1_case(m1, i, fixed_n);
            if (check_2b && !fixed_n) {
                auto rep = sched::verify_2B(
                    inst, sched::Fleet::identical(1, sched::Mode::preemptive),
                    disciplines, m1.seed + static_cast<std::uint64_t>(i));
                for (const auto& row : rep.rows)
                    worst_2b_margin = std::max(
                        worst_2b_margin, row.flow / (2 * rep.B * rep.opt_flow));
                if (!rep.all_ok) ++failures;
            }
            if (check_jobcount) {
                for (auto d : {sched::Discipline::fcfs, sched::Discipline::lrpt}) {
                    auto rep = sched::verify_jobcount_inequality(
                        inst, sched::DisciplineSpec::of(d));
                    worst_excess = std::max(worst_excess, rep.max_excess);
                    if (!rep.ok) ++failures;
                }
            }
            ++checked;
        }
        report["count"] = m1.count;
    } else {
        throw sched::Error("unknown corpus '" + corpus +
                           "' (small, preemptive-m1, jobcount)");
    }

    report["instances_checked"] = checked;
    report["violations"] = failures;
    if (check_2b) report["worst_flow_over_2B_opt"] = worst_2b_margin;
    if (check_jobcount) report["worst_count_excess"] = worst_excess;
    report["ok"] = failures == 0;
    std::cout << report.dump(2) << "\n";

    std::cerr << "corpus " << corpus << ": " << checked << " instances, "
              << failures << " violations\n";
    if (check_2b)
        std::cerr << "  worst flow / (2B x opt): " << worst_2b_margin << "\n";
    if (check_jobcount)
        std::cerr << "  worst job-count excess: " << worst_excess << "\n";
    if (failures > 0)
        throw sched::VerificationFailure(std::to_string(failures) +
                                         " corpus instances violate " + bound);
}

// --- experiment ---

struct ExperimentOpts {
    std::string config;
    std::string outdir = ".";
};

void run_experiment_cmd(const ExperimentOpts& o) {
    json cfg = sched::io::read_config(o.config);
    sched::ExperimentSpec spec;
    spec.fleet.machines = cfg.value("machines", 1);
    if (cfg.contains("speeds"))
        spec.fleet.speeds = cfg.at("speeds").get<std::vector<double>>();
    const std::string source = cfg.value("source", "stochastic");
    if (source == "stochastic") {
        spec.source = sched::SourceKind::stochastic;
        spec.interarrival =
            sched::DistSpec::parse(cfg.at("interarrival").get<std::string>());
        spec.workload =
            sched::DistSpec::parse(cfg.at("workload").get<std::string>());
        if (cfg.contains("weight"))
            spec.weight = sched::DistSpec::parse(cfg.at("weight").get<std::string>());
        if (cfg.contains("ramp"))
            spec.ramp = parse_ramp(cfg.at("ramp").get<std::string>());
    } else if (source == "adversarial") {
        spec.source = sched::SourceKind::adversarial;
        spec.adversarial_B = cfg.at("B").get<double>();
    } else {
        throw sched::Error("unknown source '" + source + "'");
    }
    for (const auto& name : cfg.at("disciplines"))
        spec.disciplines.push_back(
            sched::DisciplineSpec::of(sched::parse_discipline(name.get<std::string>())));
    spec.grid = cfg.at("grid").get<std::vector<std::size_t>>();
    spec.replications = cfg.value("replications", 1);
    spec.base_seed = cfg.value("base_seed", std::uint64_t{42});
    const std::string denom = cfg.value("denominator", "arrival-lb");
    if (denom == "arrival-lb") spec.denominator = sched::DenomKind::arrival_lb;
    else if (denom == "best-lb") spec.denominator = sched::DenomKind::best_lb;
    else if (denom == "oracle") spec.denominator = sched::DenomKind::oracle;
    else throw sched::Error("unknown denominator '" + denom + "'");

    auto result = sched::run_experiment(spec);
    auto table = sched::convergence_table(result);

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(o.outdir, ec);
    if (ec) throw sched::IoError("cannot create " + o.outdir + ": " + ec.message());

    {
        auto f = sched::io::open_out(o.outdir + "/ratios.csv");
        sched::write_ratios_csv(f, result);
    }
    {
        auto f = sched::io::open_out(o.outdir + "/ecdf.csv");
        sched::write_ecdf_csv(f, result);
    }
    {
        auto f = sched::io::open_out(o.outdir + "/table.txt");
        sched::write_table_txt(f, table);
    }

    json out;
    out["cells"] = result.cells.size();
    out["max_ratio"] = result.max_ratio();
    out["outdir"] = o.outdir;
    std::cout << out.dump(2) << "\n";
    std::cerr << "wrote ratios.csv, ecdf.csv, table.txt to " << o.outdir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete-event toolkit for online parallel-machine scheduling"};
    app.require_subcommand(1);

    GenerateOpts gen;
    auto* cmd_gen = app.add_subcommand("generate", "emit a job instance");
    cmd_gen->add_option("--config", gen.config, "JSON generator config");
    cmd_gen->add_option("--type", gen.type, "stochastic or adversarial");
    cmd_gen->add_option("--n", gen.n, "job count (waves for adversarial)");
    cmd_gen->add_option("--interarrival", gen.interarrival, "distribution, e.g. exp:0.45");
    cmd_gen->add_option("--workload", gen.workload, "distribution, e.g. exp:0.025");
    cmd_gen->add_option("--weight", gen.weight, "weight distribution");
    cmd_gen->add_option("--ramp", gen.ramp, "interarrival mean drift start:end");
    cmd_gen->add_option("-m,--machines", gen.machines, "adversarial machine count");
    cmd_gen->add_option("-B,--size-ratio", gen.B, "adversarial long-job length");
    cmd_gen->add_option("--seed", gen.seed, "generator seed");
    cmd_gen->add_option("--lift", gen.lift, "clamp workloads below this value up");
    cmd_gen->add_option("-o,--out", gen.out, "output file (.csv or .jsonl)");
    cmd_gen->callback([&] { run_generate(gen); });

    SimulateOpts sim;
    auto* cmd_sim = app.add_subcommand("simulate", "run one discipline over an instance");
    cmd_sim->add_option("--instance", sim.instance, "instance file")->required();
    cmd_sim->add_option("-d,--discipline", sim.discipline, "FCFS/SPT/SRPT/LRPT/RANDOM");
    cmd_sim->add_option("-m,--machines", sim.machines, "machine count");
    cmd_sim->add_option("--speeds", sim.speeds, "per-machine speeds")->delimiter(',');
    cmd_sim->add_option("--mode", sim.mode, "preemptive or non-preemptive");
    cmd_sim->add_option("--seed", sim.seed, "RANDOM stream seed");
    cmd_sim->add_option("--quantum", sim.quantum, "LRPT wake-up floor");
    cmd_sim->add_option("--trace", sim.trace_out, "trace output file (.csv or .jsonl)");
    cmd_sim->callback([&] { run_simulate(sim); });

    BoundsOpts bounds;
    auto* cmd_bounds = app.add_subcommand("bounds", "certified completion-time lower bounds");
    cmd_bounds->add_option("--instance", bounds.instance, "instance file")->required();
    cmd_bounds->add_option("-m,--machines", bounds.machines, "machine count");
    cmd_bounds->add_option("--speeds", bounds.speeds, "per-machine speeds")->delimiter(',');
    cmd_bounds->callback([&] { run_bounds(bounds); });

    StabilityOpts stab;
    auto* cmd_stab = app.add_subcommand("stability", "stability statistics of a workload");
    cmd_stab->add_option("--config", stab.config, "stochastic spec JSON (declared means)");
    cmd_stab->add_option("--instance", stab.instance, "instance file (sample means)");
    cmd_stab->add_option("-m,--machines", stab.machines, "machine count");
    cmd_stab->callback([&] { run_stability(stab); });

    VerifyOpts ver;
    auto* cmd_ver = app.add_subcommand("verify", "sweep bound checks over a corpus");
    cmd_ver->add_option("--corpus", ver.corpus, "small, preemptive-m1, jobcount");
    cmd_ver->add_option("--bound", ver.bound, "2B, jobcount, all");
    cmd_ver->add_option("--config", ver.config, "corpus config JSON");
    cmd_ver->add_option("--count", ver.count, "instances to draw");
    cmd_ver->add_option("--seed", ver.seed, "corpus seed")
        ->each([&](const std::string&) { ver.seed_set = true; });
    cmd_ver->callback([&] { run_verify(ver); });

    ExperimentOpts exp;
    auto* cmd_exp = app.add_subcommand("experiment", "replicated ratio study");
    cmd_exp->add_option("--config", exp.config, "experiment JSON")->required();
    cmd_exp->add_option("--outdir", exp.outdir, "output directory");
    cmd_exp->callback([&] { run_experiment_cmd(exp); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const sched::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const sched::VerificationFailure& e) {
        std::cerr << "verification failed: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
