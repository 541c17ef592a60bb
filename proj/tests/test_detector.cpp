#include <doctest.h>

#include <cmath>

#include "osa/detector.hpp"
#include "oracles.hpp"

using namespace osa;

TEST_SUITE("detector") {

TEST_CASE("perfect and degenerate detectors") {
    Rng rng(1);
    for (int k = 0; k < 1000; ++k) {
        CHECK(sense(true, 0, 0, rng) == Observation::idle);
        CHECK(sense(false, 0, 0, rng) == Observation::busy);
        CHECK(sense(true, 1, 0, rng) == Observation::busy);
    }
}

TEST_CASE("sense frequencies") {
    Rng rng(42);
    const int n = 1000000;
    int busy = 0;
    int idle = 0;
    for (int k = 0; k < n; ++k) {
        busy += sense(true, 0.1, 0.2, rng) == Observation::busy ? 1 : 0;
        idle += sense(false, 0.1, 0.2, rng) == Observation::idle ? 1 : 0;
    }
    CHECK(std::abs(busy / double(n) - 0.1) < 0.001);
    CHECK(std::abs(idle / double(n) - 0.2) < 3 * std::sqrt(0.16 / n));
}

TEST_CASE("sense consumes one draw") {
    Rng a(5);
    Rng b(5);
    sense(true, 0.3, 0.3, a);
    b();
    CHECK(a() == b());
}

TEST_CASE("Q function") {
    CHECK(q_function(0) == doctest::Approx(0.5));
    CHECK(q_function(1.2815515655446004) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(q_inverse(0.1) == doctest::Approx(1.2815515655446004).epsilon(1e-12));
    CHECK(q_inverse(0.5) == doctest::Approx(0.0));
    for (double p : {1e-6, 0.01, 0.3, 0.77, 0.999}) {
        CHECK(q_function(q_inverse(p)) == doctest::Approx(p).epsilon(1e-10));
    }
}

TEST_CASE("roc curve interpolation") {
    const RocCurve c({{0, 1}, {0.1, 0.5}, {0.5, 0.1}, {1, 0}});
    CHECK(c.delta_at(0.05) == doctest::Approx(0.75));
    CHECK(c.power_at(0.3) == doctest::Approx(0.7));
    CHECK(c.epsilon_at(0.5) == doctest::Approx(0.1));
    CHECK(c.epsilon_at(0.3) == doctest::Approx(0.3));
    CHECK(c.is_concave());
    CHECK_FALSE(RocCurve({{0, 1}, {0.5, 0.9}, {1, 0}}).is_concave());
}

TEST_CASE("roc curve validation") {
    CHECK_THROWS(RocCurve({{0.1, 0.5}, {0.1, 0.4}}));
    CHECK_THROWS(RocCurve({{0.1, 0.5}, {0.2, 0.6}}));
    CHECK_THROWS(RocCurve({{0.1, 1.5}, {0.2, 0.6}}));
    CHECK_THROWS(RocCurve({}));
    CHECK_THROWS(RocCurve::parse("0 1\n0.5 x\n"));
}

TEST_CASE("roc text round trip") {
    const RocCurve c({{0, 1}, {0.123456789012345, 0.3}, {1, 0}});
    const RocCurve d = RocCurve::parse(c.to_text());
    REQUIRE(d.points().size() == c.points().size());
    for (std::size_t i = 0; i < c.points().size(); ++i) {
        CHECK(d.points()[i].epsilon == c.points()[i].epsilon);
        CHECK(d.points()[i].delta == c.points()[i].delta);
    }
    CHECK(RocCurve::parse("# comment\n0 1\n1 0 # tail\n").points().size() == 2);
}

TEST_CASE("energy operating point limits") {
    EnergyDetectorSpec s{0.5, 20, 1e-6};
    CHECK(energy_operating_point(s).epsilon > 0.99);
    s.threshold = 100;
    const auto p = energy_operating_point(s);
    CHECK(p.epsilon < 1e-12);
    CHECK(p.delta > 1 - 1e-12);
}

TEST_CASE("energy detector parameter validation") {
    CHECK_THROWS(EnergyDetectorSpec{0, 10, 1}.validate());
    CHECK_THROWS(EnergyDetectorSpec{1, 0, 1}.validate());
    CHECK_THROWS(EnergyDetectorSpec{1, 10, 0}.validate());
}

TEST_CASE("generated ROCs are monotone and above chance") {
    Rng rng(8);
    for (double snr : {0.05, 0.2, 1.0, 3.0}) {
        for (int ns : {1, 10, 100}) {
            const EnergyDetectorSpec spec{snr, ns, 1.0};
            const int trials = 20000;
            for (const auto& [roc, mc] : {std::pair{energy_roc_analytic(spec), false},
                                          std::pair{energy_roc_monte_carlo(spec, trials, rng), true}}) {
                const auto& pts = roc.points();
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    // Monte-Carlo points may dip below chance by sampling noise.
                    const double e = pts[i].epsilon;
                    const double slack = mc ? 5 * std::sqrt(2 * e * (1 - e) / trials) + 2.0 / trials : 0.0;
                    CHECK(1 - pts[i].delta >= e - slack - 1e-12);
                    if (i > 0) {
                        CHECK(pts[i].epsilon > pts[i - 1].epsilon);
                        CHECK(pts[i].delta <= pts[i - 1].delta);
                    }
                }
                CHECK(pts.front().epsilon == 0.0);
                CHECK(pts.back().epsilon == 1.0);
            }
        }
    }
}

TEST_CASE("chance-level targets need one sample") {
    CHECK(samples_required(0.1, 0.5, 0.5).energy_samples == 1);
}

TEST_CASE("infeasible targets") {
    CHECK_THROWS(samples_required(0.1, 0.6, 0.4));
    CHECK_THROWS(samples_required(0.1, 0.0, 0.9));
    CHECK_THROWS(samples_required(0.1, 0.1, 1.0));
    CHECK_THROWS(samples_required(0.0, 0.1, 0.9));
}

TEST_CASE("halving the SNR quadruples the sample count") {
    const double r = double(samples_required(0.05, 0.1, 0.9).energy_samples) /
                     double(samples_required(0.1, 0.1, 0.9).energy_samples);
    CHECK(r == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("sample requirement meets the targets on the analytic curve") {
    const auto req = samples_required(0.2, 0.1, 0.9);
    auto power_at = [](double snr, long long ns) {
        const double tau = 1 + q_inverse(0.1) / std::sqrt(ns / 2.0);
        return q_function((tau - 1 - snr) * std::sqrt(ns / 2.0) / (1 + snr));
    };
    CHECK(power_at(0.2, req.energy_samples) >= 0.9);
    CHECK(power_at(0.2, req.energy_samples - 1) < 0.9);
}

TEST_CASE("matched filter reference scales as 1/snr") {
    const auto a = samples_required(0.1, 0.1, 0.9);
    const auto b = samples_required(0.05, 0.1, 0.9);
    CHECK(b.matched_filter_samples == doctest::Approx(2 * a.matched_filter_samples));
    CHECK(a.matched_filter_constant == doctest::Approx(std::pow(2 * 1.2815515655446004, 2)));
}

TEST_CASE("snr 1 needs few samples and agrees with Monte-Carlo") {
    const long long ns = samples_required(1.0, 0.1, 0.9).energy_samples;
    CHECK(ns <= 30);
    const long long mc = oracle::monte_carlo_samples(1.0, 0.1, 0.9, 100000, 3);
    CHECK(std::abs(double(ns) - double(mc)) / double(mc) <= 0.3);
}

TEST_CASE("snr 0.1 analytic vs Monte-Carlo within 20%") {
    const long long ns = samples_required(0.1, 0.1, 0.9).energy_samples;
    const long long mc = oracle::monte_carlo_samples(0.1, 0.1, 0.9, 100000, 4);
    CHECK(std::abs(double(ns) - double(mc)) / double(mc) <= 0.2);
}

}
