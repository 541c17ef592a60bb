// osa: command line front end for the spectrum access simulator.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "osa/detector.hpp"
#include "osa/harness.hpp"
#include "osa/policy_engine.hpp"
#include "osa/scenario.hpp"
#include "osa/sharing.hpp"
#include "osa/text_util.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;

std::string output_dir(const osa::Scenario& sc, const std::string& cli_out) {
    if (!cli_out.empty()) {
        return cli_out;
    }
    if (const char* env = std::getenv("OSA_OUTPUT_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return sc.run.output_dir;
}

int cmd_run(const std::string& path, const std::vector<std::uint64_t>& seeds, std::uint64_t slots,
            const std::string& out) {
    osa::Scenario sc = osa::Scenario::load(path);
    if (!seeds.empty()) {
        sc.run.seeds = seeds;
    }
    if (slots > 0) {
        sc.run.slots = slots;
    }
    const osa::MetricsReport m = osa::run(sc);
    const std::string dir = output_dir(sc, out);
    auto files = osa::report(m, sc, dir, osa::ReportFormat::csv);
    const auto summary = osa::report(m, sc, dir, osa::ReportFormat::summary_text);
    files.insert(files.end(), summary.begin(), summary.end());
    std::cout << osa::summary_text(m, sc);
    for (const auto& f : files) {
        std::cout << "wrote " << f << '\n';
    }
    return m.exit_status();
}

int cmd_sweep(const std::string& path, const std::string& axis_name, const std::string& grid_spec,
              const std::vector<std::uint64_t>& seeds, std::uint64_t slots, const std::string& out) {
    osa::Scenario sc = osa::Scenario::load(path);
    if (!seeds.empty()) {
        sc.run.seeds = seeds;
    }
    if (slots > 0) {
        sc.run.slots = slots;
    }
    const auto axis = osa::parse_sweep_axis(axis_name);
    const auto rows = osa::sweep(sc, axis, osa::parse_grid(grid_spec));
    const std::string csv = osa::sweep_csv(axis, rows);
    const std::string dir = output_dir(sc, out);
    std::filesystem::create_directories(dir);
    const std::string file = (std::filesystem::path(dir) / ("sweep_" + axis_name + ".csv")).string();
    osa::write_text_file(file, csv);
    std::cout << csv;
    std::cerr << "wrote " << file << '\n';
    for (const auto& r : rows) {
        if (r.policy_violations > 0) {
            return 2;
        }
    }
    return kOk;
}

int cmd_roc(double snr, int samples, bool mc, int trials, std::uint64_t seed, int points, double eps_target,
            double power_target) {
    osa::EnergyDetectorSpec spec{snr, samples, 1.0};
    spec.validate();
    osa::RocCurve roc = osa::energy_roc_analytic(spec, points);
    if (mc) {
        osa::Rng rng(seed);
        roc = osa::energy_roc_monte_carlo(spec, trials, rng, points);
    }
    std::cout << "epsilon,delta,power\n";
    for (const auto& p : roc.points()) {
        std::printf("%.17g,%.17g,%.17g\n", p.epsilon, p.delta, 1.0 - p.delta);
    }
    if (eps_target > 0.0 && power_target > 0.0) {
        const auto req = osa::samples_required(snr, eps_target, power_target);
        std::fprintf(stderr, "samples_required energy=%lld matched_filter=%.6g\n",
                     static_cast<long long>(req.energy_samples), req.matched_filter_samples);
    }
    return kOk;
}

int cmd_color(const std::string& path, const std::string& algo, const std::string& objective,
              const std::string& order, bool single, int rounds, std::uint64_t seed) {
    std::map<int, double> bw;
    const osa::ConflictGraph g = osa::ConflictGraph::load(path, &bw);
    osa::ColorAssignment a;
    if (algo == "greedy") {
        osa::GreedyOptions opt;
        opt.objective = objective == "fair" ? osa::Objective::proportional_fair : osa::Objective::sum_bandwidth;
        opt.order = order == "static" ? osa::VertexOrder::static_order : osa::VertexOrder::max_degree_first;
        opt.single_channel = single;
        a = osa::greedy_color(g, bw, opt);
    } else {
        osa::Rng rng(seed);
        const auto r = osa::distributed_color(g, rounds, rng, single);
        a = r.assignment;
        std::fprintf(stderr, "rounds_used=%d converged=%d\n", r.rounds_used, r.converged ? 1 : 0);
    }
    std::cout << osa::assignment_csv(g, a);
    std::fprintf(stderr, "utility_sum=%.6g utility_fair=%.6g\n",
                 osa::utility(a, bw, osa::Objective::sum_bandwidth),
                 osa::utility(a, bw, osa::Objective::proportional_fair));
    return kOk;
}

int cmd_policy_check(const std::string& policy_path, const std::string& request) {
    const osa::PolicySet policy = osa::PolicySet::load(policy_path);
    const std::string text = std::filesystem::is_regular_file(request) ? osa::read_file(request) : request;
    int status = kOk;
    int line_no = 0;
    for (const auto& raw : osa::split(text, '\n')) {
        ++line_no;
        const std::string line = osa::trim(osa::strip_comment(raw));
        if (line.empty()) {
            continue;
        }
        osa::TransmissionRequest req;
        try {
            req = osa::TransmissionRequest::parse(line);
        } catch (const std::invalid_argument& e) {
            throw osa::ConfigError(request, line_no, e.what());
        }
        const osa::Decision d = osa::evaluate(policy, req);
        std::cout << osa::format_decision(d) << '\n';
        if (d.verdict == osa::Verdict::no) {
            status = 2;
        }
    }
    return status;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"opportunistic spectrum access simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::vector<std::uint64_t> seeds;
    std::uint64_t slots = 0;
    std::string out;
    auto* run = app.add_subcommand("run", "closed-loop run; writes trace/metrics/series CSV and a summary");
    run->add_option("scenario", scenario_path)->required();
    run->add_option("--seed", seeds, "override the scenario's seed list");
    run->add_option("--slots", slots, "override the slot count");
    run->add_option("--out", out, "output directory (default: $OSA_OUTPUT_DIR, then the scenario's)");

    std::string axis;
    std::string grid;
    auto* sw = app.add_subcommand("sweep", "one run per grid point, merged CSV");
    sw->add_option("scenario", scenario_path)->required();
    sw->add_option("--axis", axis, "delta|zeta|snr|horizon")->required();
    sw->add_option("--grid", grid, "lo:hi:step or comma list")->required();
    sw->add_option("--seed", seeds);
    sw->add_option("--slots", slots);
    sw->add_option("--out", out);

    double snr = 0.0;
    int samples = 0;
    bool mc = false;
    int trials = 100000;
    std::uint64_t seed = 1;
    int points = 201;
    double eps_target = 0.0;
    double power_target = 0.0;
    auto* roc = app.add_subcommand("roc", "energy detector ROC as epsilon,delta,power CSV");
    roc->add_option("--snr", snr)->required();
    roc->add_option("--samples", samples)->required();
    roc->add_flag("--mc", mc, "Monte-Carlo instead of the Gaussian approximation");
    roc->add_option("--trials", trials);
    roc->add_option("--seed", seed);
    roc->add_option("--points", points);
    roc->add_option("--target-epsilon", eps_target, "with --target-power, report the required sample count");
    roc->add_option("--target-power", power_target);

    std::string graph_path;
    std::string algo = "greedy";
    std::string objective = "sum";
    std::string order = "max-degree";
    bool single = false;
    int rounds = 100;
    auto* color = app.add_subcommand("color", "list-color a conflict graph");
    color->add_option("graph", graph_path)->required();
    color->add_option("--algo", algo)->check(CLI::IsMember({"greedy", "distributed"}));
    color->add_option("--objective", objective)->check(CLI::IsMember({"sum", "fair"}));
    color->add_option("--order", order)->check(CLI::IsMember({"max-degree", "static"}));
    color->add_flag("--single", single, "one channel per vertex");
    color->add_option("--rounds", rounds);
    color->add_option("--seed", seed);

    std::string policy_path;
    std::string request;
    auto* pc = app.add_subcommand("policy-check", "decide requests against a policy file");
    pc->add_option("policy", policy_path)->required();
    pc->add_option("request", request, "request file (one per line) or an inline request")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) {
            return cmd_run(scenario_path, seeds, slots, out);
        }
        if (*sw) {
            return cmd_sweep(scenario_path, axis, grid, seeds, slots, out);
        }
        if (*roc) {
            return cmd_roc(snr, samples, mc, trials, seed, points, eps_target, power_target);
        }
        if (*color) {
            return cmd_color(graph_path, algo, objective, order, single, rounds, seed);
        }
        if (*pc) {
            return cmd_policy_check(policy_path, request);
        }
    } catch (const osa::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kOk;
}
