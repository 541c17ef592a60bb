// Acceptance gate: one PASS/FAIL line per criterion, exit 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "osa/access_analysis.hpp"
#include "osa/detector.hpp"
#include "osa/geometry.hpp"
#include "osa/harness.hpp"
#include "osa/policy_engine.hpp"
#include "osa/sharing.hpp"
#include "osa/text_util.hpp"
#include "osa/tracker.hpp"

using namespace osa;

namespace {

std::string source(const std::string& rel) { return std::string(OSA_SOURCE_DIR) + "/" + rel; }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

Outcome collision_identity() {
    ClosedLoopSetup s;
    s.chains = {{0.5, 0.5, 1.0}};
    s.strategy.kind = StrategyKind::static_choice;
    s.slots = 1000000;
    s.seeds = {101};
    Outcome o{true, ""};
    for (double delta : {0.05, 0.1, 0.25}) {
        const auto st = collision_stats(run_closed_loop(s, {0.1, delta}, 0.1)[0]);
        const double rate = *st.conditional();
        o.pass = o.pass && std::abs(rate - 0.1) <= 0.003;
        o.detail += fmt("delta=%.2f rate=%.5f; ", delta, rate);
    }
    return o;
}

Outcome separation() {
    const auto sc = Scenario::load(source("scenarios/separation.scn"));
    if (sc.run.slots < 100000 || !sc.detector.roc || !sc.detector.roc->is_concave()) {
        return {false, "fixture must be concave with >= 1e5 slots"};
    }
    const auto rows = sweep(sc, SweepAxis::delta, parse_grid("0.01:0.30:0.01"));
    std::size_t best = 0;
    bool collisions_ok = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].mean_throughput > rows[best].mean_throughput) {
            best = i;
        }
        collisions_ok = collisions_ok && rows[i].collision_conditional &&
                        *rows[i].collision_conditional <= 0.1 + 3 * rows[i].collision_conditional_stderr;
    }
    const double argmax = rows[best].value;
    return {std::abs(argmax - 0.10) <= 0.01 + 1e-9 && collisions_ok,
            fmt("argmax delta=%.2f throughput=%.4f (grid 0.01..0.30)", argmax, rows[best].mean_throughput) +
                (collisions_ok ? "" : "; collision bound exceeded")};
}

Outcome three_channel_shape() {
    const auto sc = Scenario::load(source("scenarios/three_channel.scn"));
    if (sc.run.seeds.size() < 10 || sc.chains.size() != 3) {
        return {false, "fixture needs 3 channels and >= 10 seeds"};
    }
    const auto pomdp = run(sc);
    auto st_sc = sc;
    st_sc.strategy.kind = StrategyKind::static_choice;
    const auto st = run(st_sc);
    const std::size_t n = pomdp.per_seed.size();
    double mean_d = 0;
    std::vector<double> d;
    for (std::size_t k = 0; k < n; ++k) {
        d.push_back(pomdp.per_seed[k].mean_throughput - 1.3 * st.per_seed[k].mean_throughput);
        mean_d += d.back() / n;
    }
    double ss = 0;
    for (double v : d) {
        ss += (v - mean_d) * (v - mean_d);
    }
    const double se = std::sqrt(ss / (n - 1)) / std::sqrt(double(n));
    const bool a = mean_d > 2 * se;
    const std::size_t T = sc.run.slots;
    double early = 0;
    double late = 0;
    for (const auto& r : pomdp.records) {
        early += r.mean_reward_between(0, T / 10) / n;
        late += r.mean_reward_between(T / 2, T) / n;
    }
    const bool b = late >= early;
    return {a && b, fmt("gain=%.1f%% (pomdp %.4f vs static %.4f), paired margin over 30%%: %.4f > 2se=",
                        100 * (pomdp.mean_throughput / st.mean_throughput - 1), pomdp.mean_throughput,
                        st.mean_throughput, mean_d) +
                        fmt("%.4f; window [T/2,T]=%.4f vs [0,T/10]=%.4f", 2 * se, late, early)};
}

Outcome belief_oracle() {
    Rng rng(777);
    double worst = 0;
    int trajectories = 0;
    for (std::size_t n = 2; n <= 4; ++n) {
        for (int k = 0; k < 1000; ++k) {
            std::vector<ChannelChain> chains;
            std::vector<oracle::Chain> oc;
            for (std::size_t i = 0; i < n; ++i) {
                chains.push_back({0.02 + 0.96 * uniform01(rng), 0.02 + 0.96 * uniform01(rng), 1.0});
                oc.push_back({chains.back().p_ii, chains.back().p_bi, 1.0});
            }
            const double eps = 0.4 * uniform01(rng);
            const double delta = 0.4 * uniform01(rng);
            auto proc = OccupancyProcess::stationary_start(chains, rng);
            BeliefState b = BeliefState::stationary(chains);
            auto dist = oracle::product_distribution(b.per_channel_idle);
            for (int t = 0; t < 50; ++t) {
                const std::size_t a = static_cast<std::size_t>(rng() % n);
                const Observation o = sense(proc.idle(a), eps, delta, rng);
                b = belief_update(b, a, o, eps, delta, chains);
                dist = oracle::joint_filter(oc, dist, a, o == Observation::idle, eps, delta);
                const auto m = oracle::marginals(dist, n);
                for (std::size_t i = 0; i < n; ++i) {
                    worst = std::max(worst, std::abs(m[i] - b.per_channel_idle[i]));
                }
                proc.advance(rng);
            }
            ++trajectories;
        }
    }
    return {worst <= 1e-9, fmt("%.0f trajectories x 50 slots, max |diff| = %.3g", trajectories, worst)};
}

Outcome tiny_pomdp() {
    // Gaps are measured at grid 65 per channel. The default 33 is reported
    // alongside: it misses a few near-tie instances under perfect sensing.
    const int grid = 65;
    Rng rng(2025);
    double worst_perfect = 0;
    double worst_noisy = 0;
    double worst_default = 0;
    const int instances = 200;
    for (int k = 0; k < instances; ++k) {
        std::vector<ChannelChain> chains;
        std::vector<oracle::Chain> oc;
        for (int i = 0; i < 2; ++i) {
            chains.push_back({0.05 + 0.9 * uniform01(rng), 0.05 + 0.9 * uniform01(rng), 0.5 + uniform01(rng)});
            oc.push_back({chains.back().p_ii, chains.back().p_bi, chains.back().bandwidth});
        }
        const auto b0 = BeliefState::stationary(chains);
        const double op = oracle::best_decision_tree(oc, b0.per_channel_idle, 3, 0, 0, 0.1);
        const double vp = evaluate_policy_exact(value_iteration(chains, 0, 0, 0.1, 3, grid), b0, chains, 0, 0, 0.1, 3);
        worst_perfect = std::max(worst_perfect, std::abs(vp - op));
        const double vd = evaluate_policy_exact(value_iteration(chains, 0, 0, 0.1, 3, 33), b0, chains, 0, 0, 0.1, 3);
        worst_default = std::max(worst_default, std::abs(vd - op));
        const double on = oracle::best_decision_tree(oc, b0.per_channel_idle, 3, 0.1, 0.1, 0.1);
        const double vn =
            evaluate_policy_exact(value_iteration(chains, 0.1, 0.1, 0.1, 3, grid), b0, chains, 0.1, 0.1, 0.1, 3);
        worst_noisy = std::max(worst_noisy, std::abs(vn - on));
    }
    return {worst_perfect <= 1e-6 && worst_noisy <= 1e-2,
            fmt("%.0f instances, grid 65; perfect sensing max gap %.3g (tol 1e-6), eps=delta=0.1 max gap %.3g "
                "(tol 1e-2); ",
                instances, worst_perfect, worst_noisy) +
                fmt("default grid 33 perfect-sensing gap %.3g", worst_default)};
}

Outcome energy_scaling() {
    const std::vector<double> snrs{0.01, 0.02, 0.05, 0.1};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double worst = 0;
    std::string detail;
    for (double s : snrs) {
        const long long ns = samples_required(s, 0.1, 0.9).energy_samples;
        const long long mc = oracle::monte_carlo_samples(s, 0.1, 0.9, 100000, 17);
        worst = std::max(worst, std::abs(double(ns) - double(mc)) / double(mc));
        const double x = std::log(s);
        const double y = std::log(double(ns));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        detail += fmt("snr=%.2f Ns=%.0f mc=%.0f; ", s, double(ns), double(mc));
    }
    const double n = double(snrs.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope >= -2.3 && slope <= -1.7 && worst <= 0.2,
            fmt("slope=%.3f, max analytic/MC gap %.1f%%; ", slope, 100 * worst) + detail};
}

Outcome coloring() {
    Rng rng(31337);
    int invalid = 0;
    int below = 0;
    double worst_ratio = 1e9;
    for (int k = 0; k < 200; ++k) {
        const std::size_t nv = 1 + rng() % 8;
        const int nc = 1 + static_cast<int>(rng() % 3);
        oracle::Graph plain;
        std::map<int, double> bw;
        for (int c = 1; c <= nc; ++c) {
            bw[c] = 0.5 + 2 * uniform01(rng);
        }
        ConflictGraph g;
        for (std::size_t v = 0; v < nv; ++v) {
            std::set<int> list;
            for (int c = 1; c <= nc; ++c) {
                if (bernoulli(rng, 0.6)) {
                    list.insert(c);
                }
            }
            plain.lists.push_back(list);
            g.add_vertex({"v" + std::to_string(v), {0, 0}, list});
        }
        const double pe = uniform01(rng);
        for (std::size_t u = 0; u < nv; ++u) {
            for (std::size_t v = u + 1; v < nv; ++v) {
                if (bernoulli(rng, pe)) {
                    g.add_edge(u, v);
                    plain.edges.push_back({int(u), int(v)});
                }
            }
        }
        for (bool single : {false, true}) {
            const auto gr = greedy_color(g, bw, {Objective::sum_bandwidth, VertexOrder::max_degree_first, single});
            const auto ds = distributed_color(g, 100, rng, single);
            invalid += is_valid(g, gr) ? 0 : 1;
            invalid += is_valid(g, ds.assignment) ? 0 : 1;
            const double best = oracle::best_coloring(plain, bw, single);
            const double got = utility(gr, bw, Objective::sum_bandwidth);
            if (best > 0) {
                worst_ratio = std::min(worst_ratio, got / best);
            }
            below += got >= 0.5 * best - 1e-12 ? 0 : 1;
        }
    }
    return {invalid == 0 && below == 0,
            fmt("200 instances x {multi, single}: invalid=%.0f, below 50%%=%.0f, worst ratio %.3f", invalid, below,
                worst_ratio)};
}

Outcome geometry() {
    Rng rng(4242);
    int violations = 0;
    int overlooked = 0;
    for (int k = 0; k < 10000; ++k) {
        Topology t;
        t.r_tx = 0.5 + 3 * uniform01(rng);
        t.r_rx = 0.5 + 3 * uniform01(rng);
        t.r_p = 0.5 + 5 * uniform01(rng);
        t.secondaries = {{1, {0, 0}}, {2, {t.r_tx * uniform01(rng), t.r_tx * uniform01(rng)}}};
        t.links = {{1, 2}};
        const int pairs = 1 + static_cast<int>(rng() % 4);
        for (int p = 0; p < pairs; ++p) {
            const Point tx{-15 + 30 * uniform01(rng), -15 + 30 * uniform01(rng)};
            const double r = t.r_p * std::sqrt(uniform01(rng));
            const double th = 6.283185307179586 * uniform01(rng);
            const Point rx{tx.x + r * std::cos(th), tx.y + r * std::sin(th)};
            const std::vector<bool> pattern{bernoulli(rng, 0.7)};
            t.primaries.push_back({100 + 2 * p, tx, {{0, PrimaryRole::transmitting, -1, pattern}}});
            t.primaries.push_back({101 + 2 * p, rx, {{0, PrimaryRole::receiving, 100 + 2 * p, {}}}});
        }
        t.validate();
        const bool clear = conservative_detect(t, 1, 0, 0);
        if (clear) {
            for (const auto& node : t.primaries) {
                if (t.role(node, 0, 0) == PrimaryRole::receiving && distance(node.position, {0, 0}) <= t.r_tx) {
                    ++violations;
                }
            }
        } else if (is_opportunity(t, 1, 2, 0, 0)) {
            ++overlooked;
        }
    }
    return {violations == 0 && overlooked >= 1,
            fmt("10000 topologies: violations=%.0f, overlooked-opportunity witnesses=%.0f", violations, overlooked)};
}

Outcome policy_contract() {
    const auto p = PolicySet::load(source("fixtures/policy.txt"));
    const std::vector<std::pair<std::string, Verdict>> fixtures{
        {"band=1 power=0.2 duration=1 x=0 y=0 time=3 class=basic", Verdict::yes},
        {"band=0 power=0.2 duration=1 x=0 y=0 time=3 class=advanced", Verdict::no},
        {"band=2 power=2 duration=1 x=0 y=0 time=3 class=basic", Verdict::yes_with_constraints},
        {"band=3 power=0.1 duration=1 x=0 y=0 time=3 class=basic", Verdict::no},
        {"band=1 power=0.5 duration=4 x=50 y=50 time=150 class=advanced", Verdict::yes_with_constraints},
    };
    int fixture_fail = 0;
    for (const auto& [text, want] : fixtures) {
        fixture_fail += evaluate(p, TransmissionRequest::parse(text)).verdict == want ? 0 : 1;
    }
    Rng rng(9);
    int tightened = 0;
    int not_converted = 0;
    for (int k = 0; k < 20000; ++k) {
        TransmissionRequest r;
        r.band = static_cast<int>(rng() % 4);
        r.power = 3 * uniform01(rng);
        r.duration = 1 + static_cast<int>(rng() % 15);
        r.location = {100 * uniform01(rng), 100 * uniform01(rng)};
        r.time = rng() % 300;
        r.detector_class = bernoulli(rng, 0.5) ? "basic" : "advanced";
        const auto d = evaluate(p, r);
        if (d.verdict == Verdict::yes_with_constraints) {
            ++tightened;
            not_converted += evaluate(p, tighten(r, d)).verdict == Verdict::yes ? 0 : 1;
        }
    }
    const auto m = run(Scenario::load(source("scenarios/gated.scn")));
    std::uint64_t gated = 0;
    for (const auto& s : m.per_seed) {
        gated += s.gated;
    }
    return {fixture_fail == 0 && not_converted == 0 && tightened > 0 && m.policy_violations == 0 && gated > 0,
            fmt("fixture mismatches=%.0f; tightened %.0f, not converted %.0f; gated run violations=%.0f", fixture_fail,
                tightened, not_converted, double(m.policy_violations))};
}

Outcome reproducibility() {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "osa_acceptance_repro";
    fs::remove_all(base);
    const std::string cli = OSA_CLI;
    const std::string scn = source("scenarios/three_channel.scn");
    for (const char* run_dir : {"a", "b"}) {
        const std::string cmd =
            "\"" + cli + "\" run \"" + scn + "\" --seed 7 --out \"" + (base / run_dir).string() + "\" > /dev/null";
        if (std::system(cmd.c_str()) != 0) {
            return {false, "cli run failed"};
        }
    }
    int files = 0;
    int differ = 0;
    for (const auto& e : fs::directory_iterator(base / "a")) {
        if (e.path().extension() != ".csv") {
            continue;
        }
        ++files;
        const fs::path other = base / "b" / e.path().filename();
        differ += fs::exists(other) && read_file(e.path().string()) == read_file(other.string()) ? 0 : 1;
    }
    return {files >= 3 && differ == 0, fmt("%.0f CSV files compared, %.0f differ", files, differ)};
}

struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> check;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"collision-constraint identity", 10, collision_identity},
        {"separation principle sweep", 300, separation},
        {"three_channel.scn strategy gain and improvement over time", 120, three_channel_shape},
        {"belief filter vs exact joint filter", 60, belief_oracle},
        {"tiny POMDP optimality", 60, tiny_pomdp},
        {"energy detector sample scaling", 300, energy_scaling},
        {"list-coloring oracle", 60, coloring},
        {"geometry conservativeness", 30, geometry},
        {"policy-engine contract", 5, policy_contract},
        {"reproducibility of run three_channel.scn --seed 7", 120, reproducibility},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = o.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("%s  %s  [%.1fs / %.0fs]  %s%s\n", pass ? "PASS" : "FAIL", c.name, secs, c.budget_s,
                    o.detail.c_str(), in_time ? "" : "  (over time budget)");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
