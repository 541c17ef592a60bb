#include <doctest.h>

#include <cmath>

#include "osa/channel_model.hpp"

using namespace osa;

TEST_SUITE("channel_model") {

TEST_CASE("stationary idle probability") {
    CHECK(stationary_distribution({0.8, 0.3, 1.0}).idle == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(stationary_distribution({0.5, 0.5, 1.0}).idle == doctest::Approx(0.5));
    const auto absorbing = stationary_distribution({1.0, 1.0, 1.0});
    CHECK(absorbing.idle == 1.0);
    CHECK_FALSE(absorbing.degenerate);
}

TEST_CASE("periodic chain is flagged, reducible chain throws") {
    const auto periodic = stationary_distribution({0.0, 1.0, 1.0});
    CHECK(periodic.idle == 0.5);
    CHECK(periodic.degenerate);
    CHECK_THROWS_AS(stationary_distribution({1.0, 0.0, 1.0}), NoStationaryDistribution);
    CHECK_THROWS_WITH(stationary_distribution({1.0, 0.0, 1.0}), "no unique stationary distribution");
}

TEST_CASE("chain validation") {
    CHECK_THROWS(ChannelChain{1.2, 0.1, 1.0}.validate());
    CHECK_THROWS(ChannelChain{0.5, -0.1, 1.0}.validate());
    CHECK_THROWS(ChannelChain{0.5, 0.5, 0.0}.validate());
    CHECK_NOTHROW(ChannelChain{0.0, 1.0, 3.0}.validate());
}

TEST_CASE("predict") {
    CHECK(predict(1.0, {0.8, 0.3, 1.0}) == doctest::Approx(0.8));
    CHECK(predict(0.6, {0.8, 0.3, 1.0}) == doctest::Approx(0.6));
    CHECK(predict(0.0, {0.8, 0.3, 1.0}) == doctest::Approx(0.3));
}

TEST_CASE("stationary point is a fixed point of predict") {
    Rng rng(5);
    for (int k = 0; k < 1000; ++k) {
        ChannelChain c{uniform01(rng), uniform01(rng), 1.0};
        if (c.p_ii > 0.999 && c.p_bi < 0.001) {
            continue;
        }
        double p = stationary_distribution(c).idle;
        for (int h = 0; h < 20; ++h) {
            p = predict(p, c);
        }
        CHECK(std::abs(p - stationary_distribution(c).idle) < 1e-12);
    }
}

TEST_CASE("absorbing and deterministic rows") {
    Rng rng(1);
    OccupancyProcess idle_forever({{1.0, 0.0, 1.0}}, {true});
    for (int t = 0; t < 1000; ++t) {
        idle_forever.advance(rng);
        REQUIRE(idle_forever.idle(0));
    }
    OccupancyProcess flip({{0.0, 1.0, 1.0}}, {false});
    for (int t = 0; t < 100; ++t) {
        const bool before = flip.idle(0);
        flip = step(flip, rng);
        REQUIRE(flip.idle(0) != before);
    }
    CHECK(flip.slot_index() == 100);
}

TEST_CASE("empirical idle fraction converges") {
    Rng rng(2024);
    OccupancyProcess p = OccupancyProcess::stationary_start({{0.8, 0.3, 1.0}}, rng);
    const int T = 1000000;
    long idle = 0;
    for (int t = 0; t < T; ++t) {
        idle += p.idle(0) ? 1 : 0;
        p.advance(rng);
    }
    CHECK(std::abs(static_cast<double>(idle) / T - 0.6) < 0.002);
}

TEST_CASE("same seed gives the same trajectory") {
    const std::vector<ChannelChain> chains{{0.9, 0.2, 1.0}, {0.6, 0.4, 2.0}, {0.3, 0.7, 1.0}};
    Rng a(77);
    Rng b(77);
    auto pa = OccupancyProcess::stationary_start(chains, a);
    auto pb = OccupancyProcess::stationary_start(chains, b);
    for (int t = 0; t < 5000; ++t) {
        REQUIRE(pa.state() == pb.state());
        pa.advance(a);
        pb.advance(b);
    }
}

TEST_CASE("state index encoding") {
    const ChannelState s{true, false, true};
    CHECK(state_index(s) == 5);
    CHECK(state_from_index(5, 3) == s);
}

TEST_CASE("joint chain") {
    const std::vector<ChannelChain> chains{{0.8, 0.3, 1.0}, {0.5, 0.2, 1.0}};
    const JointChain j = JointChain::product(chains);
    for (std::size_t s = 0; s < 4; ++s) {
        double row = 0.0;
        for (std::size_t t = 0; t < 4; ++t) {
            row += j(s, t);
        }
        CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
    }
    // both idle -> both idle
    CHECK(j(3, 3) == doctest::Approx(0.8 * 0.5));
    const auto pi = j.stationary();
    const auto m = marginal_idle(pi, 2);
    CHECK(m[0] == doctest::Approx(0.6));
    CHECK(m[1] == doctest::Approx(0.2 / 0.7));
    const auto next = j.propagate(pi);
    for (std::size_t s = 0; s < 4; ++s) {
        CHECK(next[s] == doctest::Approx(pi[s]).epsilon(1e-12));
    }
}

TEST_CASE("joint chain validation") {
    CHECK_THROWS(JointChain(1, {0.5, 0.5, 0.2}));
    CHECK_THROWS(JointChain(1, {0.5, 0.6, 0.2, 0.8}));
    CHECK_NOTHROW(JointChain(1, {0.5, 0.5 + 1e-10, 0.2, 0.8}));
    CHECK_THROWS(JointChain(9, std::vector<double>(1u << 18, 0.0)));
    // periodic, but the stationary law is still unique
    CHECK(JointChain(1, {0.0, 1.0, 1.0, 0.0}).stationary()[0] == doctest::Approx(0.5));
    CHECK_THROWS_AS(JointChain(1, {1.0, 0.0, 0.0, 1.0}).stationary(), NoStationaryDistribution);
}

TEST_CASE("joint mode consumes one draw and follows the matrix") {
    // Correlated pair: both channels always flip together.
    std::vector<double> m(16, 0.0);
    m[0 * 4 + 3] = 1.0;
    m[3 * 4 + 0] = 1.0;
    m[1 * 4 + 1] = 1.0;
    m[2 * 4 + 2] = 1.0;
    const std::vector<ChannelChain> chains{{0.5, 0.5, 1.0}, {0.5, 0.5, 1.0}};
    OccupancyProcess p(chains, JointChain(2, m), {true, true});
    Rng rng(3);
    Rng shadow(3);
    p.advance(rng);
    shadow();
    CHECK(rng() == shadow());
    CHECK(p.state() == ChannelState{false, false});
    p.advance(rng);
    CHECK(p.state() == ChannelState{true, true});
}

TEST_CASE("product mode consumes one draw per channel") {
    const std::vector<ChannelChain> chains{{0.9, 0.2, 1.0}, {0.6, 0.4, 2.0}, {0.3, 0.7, 1.0}};
    OccupancyProcess p(chains, {true, true, false});
    Rng rng(9);
    Rng shadow(9);
    p.advance(rng);
    for (int i = 0; i < 3; ++i) {
        shadow();
    }
    CHECK(rng() == shadow());
}

TEST_CASE("initial state length must match") {
    CHECK_THROWS(OccupancyProcess({{0.5, 0.5, 1.0}}, {true, false}));
}

}
