#include <doctest.h>

#include <cmath>

#include "osa/access.hpp"
#include "osa/access_analysis.hpp"
#include "osa/tracker.hpp"
#include "oracles.hpp"

using namespace osa;

namespace {

std::vector<oracle::Chain> to_oracle(const std::vector<ChannelChain>& chains) {
    std::vector<oracle::Chain> out;
    for (const auto& c : chains) {
        out.push_back({c.p_ii, c.p_bi, c.bandwidth});
    }
    return out;
}

std::vector<ChannelChain> random_chains(Rng& rng, std::size_t n) {
    std::vector<ChannelChain> c;
    for (std::size_t i = 0; i < n; ++i) {
        c.push_back({0.05 + 0.9 * uniform01(rng), 0.05 + 0.9 * uniform01(rng), 0.5 + uniform01(rng)});
    }
    return c;
}

} // namespace

TEST_SUITE("tracker") {

TEST_CASE("posterior arithmetic") {
    CHECK(posterior_idle(0.5, Observation::idle, 0.1, 0.2) == doctest::Approx(0.45 / 0.55).epsilon(1e-15));
    CHECK(posterior_idle(0.5, Observation::busy, 0.1, 0.2) == doctest::Approx(0.05 / 0.45).epsilon(1e-15));
    for (double p : {0.0, 0.2, 0.7, 1.0}) {
        CHECK(posterior_idle(p, Observation::idle, 0.5, 0.5) == doctest::Approx(p));
        CHECK(posterior_idle(p, Observation::busy, 0.5, 0.5) == doctest::Approx(p));
    }
}

TEST_CASE("zero-probability observation") {
    CHECK_THROWS_AS(posterior_idle(1.0, Observation::busy, 0.0, 0.0), InconsistentObservation);
    CHECK_THROWS_AS(posterior_idle(0.0, Observation::idle, 0.1, 0.0), InconsistentObservation);
    const std::vector<ChannelChain> chains{{0.8, 0.3, 1}};
    CHECK_THROWS_WITH(belief_update(BeliefState::product({1.0}), 0, Observation::busy, 0, 0, chains),
                      "inconsistent observation");
}

TEST_CASE("belief update corrects then predicts") {
    const std::vector<ChannelChain> chains{{0.8, 0.3, 1}, {0.9, 0.1, 1}};
    const auto b = belief_update(BeliefState::product({0.5, 0.4}), 0, Observation::idle, 0.1, 0.2, chains);
    const double post = 0.45 / 0.55;
    CHECK(b.per_channel_idle[0] == doctest::Approx(post * 0.8 + (1 - post) * 0.3));
    CHECK(b.per_channel_idle[1] == doctest::Approx(0.4 * 0.9 + 0.6 * 0.1));
}

TEST_CASE("static choice") {
    CHECK(static_choice({0.6, 0.4}, {1, 1}) == 0);
    CHECK(static_choice({0.6, 0.4}, {1, 2}) == 1);
    CHECK(static_choice({0.5, 0.5}, {1, 1}) == 0);
    // 0.8/0.3 chain has pi = 0.6, 0.4/0.6 chain pi = 0.5
    CHECK(static_choice(std::vector<ChannelChain>{{0.8, 0.3, 1}, {0.4, 0.6, 1}}) == 0);
}

TEST_CASE("myopic choice") {
    const std::vector<ChannelChain> unit{{0.5, 0.5, 1}, {0.5, 0.5, 1}};
    CHECK(myopic_choice(BeliefState::product({0.9, 0.1}), unit) == 0);
    const std::vector<ChannelChain> weighted{{0.5, 0.5, 2}, {0.5, 0.5, 1}};
    CHECK(myopic_choice(BeliefState::product({0.4, 0.5}), weighted) == 0);
    const std::vector<ChannelChain> chains{{0.8, 0.3, 1}, {0.6, 0.5, 1.5}, {0.7, 0.2, 2}};
    CHECK(myopic_choice(BeliefState::stationary(chains), chains) == static_choice(chains));
}

TEST_CASE("strategy names") {
    CHECK(parse_strategy_kind("static") == StrategyKind::static_choice);
    CHECK(parse_strategy_kind("pomdp") == StrategyKind::value_iteration);
    CHECK(std::string(to_string(StrategyKind::myopic)) == "myopic");
    CHECK_THROWS(parse_strategy_kind("oracle"));
}

TEST_CASE("product filter equals the joint filter") {
    Rng rng(31);
    for (std::size_t n = 2; n <= 4; ++n) {
        for (int traj = 0; traj < 50; ++traj) {
            const auto chains = random_chains(rng, n);
            const double eps = 0.3 * uniform01(rng);
            const double delta = 0.3 * uniform01(rng);
            BeliefState b = BeliefState::stationary(chains);
            BeliefState j = BeliefState::from_joint(oracle::product_distribution(b.per_channel_idle), n);
            const JointChain jc = JointChain::product(chains);
            for (int t = 0; t < 30; ++t) {
                const std::size_t a = static_cast<std::size_t>(rng() % n);
                const Observation o = bernoulli(rng, 0.5) ? Observation::idle : Observation::busy;
                b = belief_update(b, a, o, eps, delta, chains);
                j = joint_belief_update(j, a, o, eps, delta, jc);
                for (std::size_t i = 0; i < n; ++i) {
                    REQUIRE(std::abs(b.per_channel_idle[i] - j.per_channel_idle[i]) < 1e-9);
                }
            }
        }
    }
}

TEST_CASE("joint update matches the brute-force filter") {
    Rng rng(5);
    const auto chains = random_chains(rng, 3);
    const auto oc = to_oracle(chains);
    auto dist = oracle::product_distribution({0.3, 0.6, 0.9});
    BeliefState j = BeliefState::from_joint(dist, 3);
    const JointChain jc = JointChain::product(chains);
    for (int t = 0; t < 40; ++t) {
        const std::size_t a = t % 3;
        const bool idle = (t * 7) % 3 != 0;
        dist = oracle::joint_filter(oc, dist, a, idle, 0.15, 0.05);
        j = joint_belief_update(j, a, idle ? Observation::idle : Observation::busy, 0.15, 0.05, jc);
        for (std::size_t s = 0; s < dist.size(); ++s) {
            REQUIRE((*j.joint)[s] == doctest::Approx(dist[s]).epsilon(1e-12));
        }
    }
}

TEST_CASE("value iteration horizon 1 is myopic on grid beliefs") {
    const std::vector<ChannelChain> chains{{0.8, 0.3, 1}, {0.6, 0.5, 1.5}};
    const int res = 9;
    const SensingPolicy p = value_iteration(chains, 0.1, 0.1, 0.1, 1, res);
    for (int i = 0; i < res; ++i) {
        for (int k = 0; k < res; ++k) {
            const auto b = BeliefState::product({i / double(res - 1), k / double(res - 1)});
            CHECK(p.choose(b) == myopic_choice(b, chains));
        }
    }
}

TEST_CASE("single channel value is the sum of predicted idle probabilities") {
    const std::vector<ChannelChain> chains{{0.7, 0.2, 2.0}};
    const double eps = 0.1;
    const double delta = 0.05;
    const double zeta = 0.1;
    const int H = 6;
    const SensingPolicy p = value_iteration(chains, eps, delta, zeta, H, 33);
    const auto [pi, pb] = oracle::access_probs(delta, zeta);
    for (double b0 : {0.0, 0.25, 0.5, 0.8, 1.0}) {
        double expected = 0.0;
        double b = b0;
        for (int t = 0; t < H; ++t) {
            expected += 2.0 * b * ((1 - eps) * pi + eps * pb);
            b = b * 0.7 + (1 - b) * 0.2;
        }
        CHECK(p.value(BeliefState::product({b0}), H) == doctest::Approx(expected).epsilon(1e-9));
        CHECK(evaluate_policy_exact(p, BeliefState::product({b0}), chains, eps, delta, zeta, H) ==
              doctest::Approx(expected).epsilon(1e-9));
        CHECK(p.choose(BeliefState::product({b0})) == 0);
    }
}

TEST_CASE("tiny problem: value iteration matches decision-tree enumeration") {
    const std::vector<ChannelChain> chains{{0.9, 0.2, 1.0}, {0.6, 0.5, 1.3}};
    const std::vector<double> b0{0.5, 0.7};
    const double perfect = oracle::best_decision_tree(to_oracle(chains), b0, 3, 0, 0, 0.1);
    const SensingPolicy p = value_iteration(chains, 0, 0, 0.1, 3, 33);
    CHECK(evaluate_policy_exact(p, BeliefState::product(b0), chains, 0, 0, 0.1, 3) ==
          doctest::Approx(perfect).epsilon(1e-9));
}

TEST_CASE("value is monotone in horizon and delta") {
    const std::vector<ChannelChain> chains{{0.8, 0.3, 1}, {0.6, 0.5, 1.5}};
    const int res = 9;
    const SensingPolicy p4 = value_iteration(chains, 0.1, 0.1, 0.1, 4, res);
    for (int i = 0; i < res; ++i) {
        for (int k = 0; k < res; ++k) {
            const auto b = BeliefState::product({i / double(res - 1), k / double(res - 1)});
            for (int h = 1; h < 4; ++h) {
                CHECK(p4.value(b, h + 1) >= p4.value(b, h) - 1e-12);
            }
        }
    }
    double last = 1e9;
    for (double delta : {0.0, 0.05, 0.1, 0.2, 0.3, 0.5}) {
        const SensingPolicy p = value_iteration(chains, 0.1, delta, 0.1, 3, res);
        const double v = p.value(BeliefState::product({0.5, 0.5}), 3);
        CHECK(v <= last + 1e-12);
        last = v;
    }
}

TEST_CASE("value iteration argument checks") {
    const std::vector<ChannelChain> chains{{0.8, 0.3, 1}};
    CHECK_THROWS(value_iteration(chains, 0.1, 0.1, 0.1, 0, 33));
    CHECK_THROWS(value_iteration(chains, 0.1, 0.1, 0.1, 2, 1));
}

TEST_CASE("perfect detector on always-idle channels") {
    const std::vector<ChannelChain> chains{{1, 1, 1.0}, {1, 1, 2.5}, {1, 1, 1.5}};
    Rng rng(1);
    const auto rec = run_tracking(chains, SensingPolicy::make_myopic({1.0, 2.5, 1.5}), {0, 0}, 0.1, 200, rng);
    CHECK(rec.mean_throughput() == doctest::Approx(2.5));
    for (const auto& s : rec.slots) {
        CHECK(s.action == 1);
    }
}

TEST_CASE("static policy steady-state throughput") {
    const std::vector<ChannelChain> chains{{0.8, 0.3, 2.0}, {0.5, 0.2, 1.0}};
    const std::size_t k = static_choice(chains);
    Rng rng(77);
    const double eps = 0.2;
    const auto rec = run_tracking(chains, SensingPolicy::make_static(k, 2), {eps, 0.1}, 0.1, 400000, rng);
    const double expected = 2.0 * 0.6 * (1 - eps);
    CHECK(k == 0);
    CHECK(std::abs(rec.mean_throughput() - expected) < 0.01);
}

TEST_CASE("strategy dominance on a heterogeneous scenario") {
    ClosedLoopSetup setup;
    setup.chains = {{0.9, 0.1, 1.0}, {0.9, 0.15, 1.2}, {0.85, 0.1, 1.4}};
    setup.slots = 20000;
    setup.seeds = {1};
    const DetectorParams det{0.1, 0.1};
    auto run_kind = [&](StrategyKind kind) {
        setup.strategy = {kind, 2, 17};
        return throughput_mean_stderr(run_closed_loop(setup, det, 0.1));
    };
    const auto st = run_kind(StrategyKind::static_choice);
    const auto my = run_kind(StrategyKind::myopic);
    const auto vi = run_kind(StrategyKind::value_iteration);
    const auto se = [](auto a, auto b) { return std::sqrt(a.second * a.second + b.second * b.second); };
    CHECK(my.first > st.first + 2 * se(my, st));
    CHECK(vi.first >= my.first - 2 * se(vi, my));
}

TEST_CASE("track record series") {
    TrackRecord r;
    r.num_channels = 1;
    for (int t = 0; t < 4; ++t) {
        TrackSlot s;
        s.slot = t;
        s.reward = t;
        r.slots.push_back(s);
    }
    CHECK(r.total_reward() == 6);
    CHECK(r.mean_throughput() == 1.5);
    CHECK(r.cumulative_throughput() == std::vector<double>{0, 0.5, 1, 1.5});
    CHECK(r.windowed_throughput(2) == std::vector<double>{0, 0.5, 1.5, 2.5});
    CHECK(r.mean_reward_between(2, 4) == 2.5);
}

TEST_CASE("tracking is deterministic per seed") {
    const std::vector<ChannelChain> chains{{0.9, 0.2, 1}, {0.7, 0.3, 2}};
    const auto p = value_iteration(chains, 0.1, 0.1, 0.1, 2, 9);
    Rng a(4);
    Rng b(4);
    const auto ra = run_tracking(chains, p, {0.1, 0.1}, 0.1, 3000, a);
    const auto rb = run_tracking(chains, p, {0.1, 0.1}, 0.1, 3000, b);
    for (std::size_t t = 0; t < ra.slots.size(); ++t) {
        REQUIRE(ra.slots[t].action == rb.slots[t].action);
        REQUIRE(ra.slots[t].reward == rb.slots[t].reward);
        REQUIRE(ra.slots[t].true_state_bits == rb.slots[t].true_state_bits);
    }
}

TEST_CASE("policy actions are valid channels") {
    Rng rng(12);
    const auto chains = random_chains(rng, 3);
    const auto p = value_iteration(chains, 0.2, 0.1, 0.1, 2, 5);
    for (int k = 0; k < 200; ++k) {
        const auto b = BeliefState::product({uniform01(rng), uniform01(rng), uniform01(rng)});
        CHECK(p.choose(b) < 3);
    }
}

}
