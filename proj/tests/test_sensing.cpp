#include <doctest.h>

#include <cmath>
#include <random>

#include "crcap/queue_sim.hpp"
#include "crcap/sensing.hpp"

using namespace crcap;

namespace {

SensingConfig with_samples(double nb, double noise = 1.0, double primary = 1.0) {
    // B = 100 kHz, N = NB / B.
    return {nb / 1e5, 1e5, noise, primary};
}

double poisson_upper(int a, double x) {
    double term = std::exp(-x), sum = 0.0;
    for (int k = 0; k < a; ++k) {
        sum += term;
        term *= x / (k + 1);
    }
    return sum;
}

}  // namespace

TEST_CASE("false alarm anchors") {
    const SensingConfig c = with_samples(10);
    CHECK(c.sample_count() == 10);
    CHECK(false_alarm_prob(c, 0.0) == 1.0);
    CHECK(false_alarm_prob(c, 1.0) == doctest::Approx(poisson_upper(10, 10.0)).epsilon(1e-12));
    CHECK(false_alarm_prob(c, 1.0) == doctest::Approx(0.4579).epsilon(1e-4));
    CHECK(false_alarm_prob(c, 100.0) < 1e-6);
}

TEST_CASE("false alarm matches chi-square draws") {
    // 1e6 draws of Y = (1/NB) sum of NB unit exponentials.
    const SensingConfig c = with_samples(10);
    std::mt19937_64 rng(3);
    std::gamma_distribution<double> g(10.0, 1.0);
    const int n = 1000000;
    int over = 0;
    for (int k = 0; k < n; ++k) over += g(rng) / 10.0 > 1.0;
    const double p = false_alarm_prob(c, 1.0);
    CHECK(std::abs(over / double(n) - p) <= 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("detection anchors") {
    const SensingConfig c = with_samples(10);
    CHECK(detection_prob(c, 1.0) == doctest::Approx(poisson_upper(10, 5.0)).epsilon(1e-12));
    CHECK(detection_prob(c, 1.0) == doctest::Approx(0.9682).epsilon(1e-4));
    CHECK(detection_prob(c, 0.0) == 1.0);
    const SensingConfig quiet = with_samples(40, 1.0, 0.0);
    for (double lam : {0.2, 0.9, 1.0, 1.3, 2.0}) CHECK(detection_prob(quiet, lam) == false_alarm_prob(quiet, lam));
}

TEST_CASE("monotone and dominant on a threshold grid") {
    for (double nb : {10.0, 50.0, 250.0}) {
        const SensingConfig c = with_samples(nb);
        double pf_prev = 2.0, pd_prev = 2.0;
        for (int k = 0; k < 100; ++k) {
            // Start where P_d is still distinguishable from 1 in double precision.
            const double lam = (nb > 100 ? 1.4 : 0.8) + 1.2 * k / 99.0;
            const SensingPerformance p = sensing_performance(c, lam);
            CAPTURE(nb);
            CAPTURE(lam);
            CHECK(p.p_f < pf_prev);
            CHECK(p.p_d < pd_prev);
            CHECK(p.p_d >= p.p_f);
            pf_prev = p.p_f;
            pd_prev = p.p_d;
        }
    }
}

TEST_CASE("gaussian approximation") {
    const SensingConfig c1000 = with_samples(1000);
    CHECK(sensing_performance_gaussian(c1000, 1.0).p_f == doctest::Approx(0.5));
    const SensingConfig quiet = with_samples(1000, 1.0, 0.0);
    CHECK(sensing_performance_gaussian(quiet, 1.2).p_f == sensing_performance_gaussian(quiet, 1.2).p_d);
    const SensingPerformance g = sensing_performance_gaussian(c1000, 1.5);
    const SensingPerformance e = sensing_performance(c1000, 1.5);
    CHECK(std::abs(g.p_f - e.p_f) < 0.01);
    CHECK(std::abs(g.p_d - e.p_d) < 0.01);

    const SensingConfig big = with_samples(1e4);
    double worst = 0.0;
    for (int k = 0; k <= 200; ++k) {
        const double lam = 0.9 + 1.3 * k / 200.0;
        const SensingPerformance a = sensing_performance_gaussian(big, lam);
        const SensingPerformance b = sensing_performance(big, lam);
        worst = std::max({worst, std::abs(a.p_f - b.p_f), std::abs(a.p_d - b.p_d)});
    }
    CHECK(worst < 0.005);
}

TEST_CASE("waveform detector agrees with the chi-square rates") {
    for (double nb : {10.0, 50.0}) {
        const SensingConfig c = with_samples(nb);
        const WaveformDetector det(c);
        std::mt19937_64 rng(static_cast<std::uint64_t>(nb));
        const int n = 20000;
        for (double lam : {0.8, 1.2, 1.8}) {
            int fa = 0, hit = 0;
            for (int k = 0; k < n; ++k) {
                fa += det.statistic(rng, false) > lam;
                hit += det.statistic(rng, true) > lam;
            }
            const SensingPerformance p = sensing_performance(c, lam);
            CAPTURE(nb);
            CAPTURE(lam);
            CHECK(std::abs(fa / double(n) - p.p_f) <= 3.0 * std::sqrt(p.p_f * (1 - p.p_f) / n) + 0.5 / n);
            CHECK(std::abs(hit / double(n) - p.p_d) <= 3.0 * std::sqrt(p.p_d * (1 - p.p_d) / n) + 0.5 / n);
        }
    }
}

TEST_CASE("sensing validation") {
    CHECK(with_samples(0.3).sample_count() == 1);
    CHECK(with_samples(10.4).sample_count() == 10);
    CHECK(with_samples(10.6).sample_count() == 11);
    CHECK_THROWS_AS(false_alarm_prob(with_samples(2e7), 1.0), ConfigError);
    CHECK_THROWS_AS(false_alarm_prob(with_samples(10), -1.0), ConfigError);
    CHECK_THROWS_AS(false_alarm_prob({0.0, 1e5, 1.0, 1.0}, 1.0), ConfigError);
    CHECK_THROWS_AS(false_alarm_prob(with_samples(10, 0.0), 1.0), ConfigError);
    CHECK_THROWS_AS((SensingPerformance{1.0, 1.5, 0.5}.validate()), ConfigError);
}
