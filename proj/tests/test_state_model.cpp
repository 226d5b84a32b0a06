#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "crcap/state_model.hpp"

using namespace crcap;

namespace {

ScenarioConfig fig2_config() { return ScenarioConfig::from_snr_db(0.1, 0.0025, 1e5, 0.01, 0.1, 0.0, 10.0, 1.0); }

StateModel random_model(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    ScenarioConfig c = fig2_config();
    c.rho = U(rng);
    c.theta = std::pow(10.0, -3 + 3 * U(rng));
    const double pf = 0.5 * U(rng), pd = pf + (1 - pf) * U(rng);
    return transition_probs(c, {1.0, pf, pd}, 2e4 * U(rng), 4e4 * U(rng));
}

Eigen::MatrixXd phi_r(const StateModel& sm, const MgfDiag& phi) {
    Eigen::MatrixXd m(kStateCount, kStateCount);
    const StateModel::Matrix r = sm.transition_matrix();
    for (int i = 0; i < kStateCount; ++i) {
        for (int j = 0; j < kStateCount; ++j) m(i, j) = phi.phi[std::size_t(i)] * r[std::size_t(i)][std::size_t(j)];
    }
    return m;
}

}  // namespace

TEST_CASE("transition probabilities") {
    const ScenarioConfig c = fig2_config();
    const SnrQuad s = derive_snrs(c);
    // Rates that put alpha1 and alpha4 at ln 2.
    const double r1 = c.bandwidth_hz * std::log2(1 + std::log(2.0) * s.snr1);
    const double r2 = c.bandwidth_hz * std::log2(1 + std::log(2.0) * s.snr4);
    const StateModel sm = transition_probs(c, SensingPerformance::perfect(), r1, r2);
    CHECK(sm.p[0] == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(sm.p[1] == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(sm.p[6] == doctest::Approx(0.45).epsilon(1e-12));
    CHECK(sm.p[7] == doctest::Approx(0.45).epsilon(1e-12));
    for (int k : {2, 3, 4, 5}) CHECK(sm.p[std::size_t(k)] == 0.0);
    CHECK(sm.service_bits[0] == doctest::Approx(r1 * c.transmit_s()));
    CHECK(sm.service_bits[6] == doctest::Approx(r2 * c.transmit_s()));
}

TEST_CASE("probabilities sum to one and OFF states carry nothing") {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 200; ++k) {
        const StateModel sm = random_model(rng);
        double sum = 0.0;
        for (double p : sm.p) {
            CHECK(p >= 0.0);
            sum += p;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        for (int s = 2; s <= 8; s += 2) CHECK(sm.service_bits[std::size_t(s - 1)] == 0.0);
        CHECK_NOTHROW(sm.validate());
    }
}

TEST_CASE("adaptive chain") {
    ScenarioConfig c = fig2_config();
    c.rho = 0.3;
    const StateModel sm = adaptive_state_probs(c, {1.0, 0.2, 0.9});
    CHECK(sm.p[0] == doctest::Approx(0.27));
    CHECK(sm.p[3] == doctest::Approx(0.03));
    CHECK(sm.p[4] == doctest::Approx(0.14));
    CHECK(sm.p[6] == doctest::Approx(0.56));
    for (int k : {1, 2, 5, 7}) CHECK(sm.p[std::size_t(k)] == 0.0);
}

TEST_CASE("spectral radius anchors") {
    std::mt19937_64 rng(1);
    const StateModel sm = random_model(rng);
    MgfDiag one;
    one.phi.fill(1.0);
    CHECK(spectral_radius_rank1(sm, one) == doctest::Approx(1.0).epsilon(1e-14));
    MgfDiag c;
    c.phi.fill(0.37);
    CHECK(spectral_radius_rank1(sm, c) == doctest::Approx(0.37).epsilon(1e-14));
}

TEST_CASE("rank one and dominant eigenvalue against a dense solver") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const StateModel sm = random_model(rng);
        MgfDiag phi;
        for (double& v : phi.phi) v = U(rng);
        const Eigen::MatrixXd m = phi_r(sm, phi);

        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
        const auto sv = svd.singularValues();
        CHECK(sv(1) < 1e-12 * sv(0));

        const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(m).eigenvalues();
        double dominant = 0.0;
        for (int i = 0; i < ev.size(); ++i) dominant = std::max(dominant, std::abs(ev(i)));
        const double trace = spectral_radius_rank1(sm, phi);
        CHECK(std::abs(trace - dominant) <= 1e-10 * dominant);
    }
}

TEST_CASE("discounted MGF is below one for positive service") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        ScenarioConfig c = fig2_config();
        c.rho = U(rng);
        c.theta = std::pow(10.0, -4 + 4 * U(rng));
        const StateModel sm = transition_probs(c, {1.0, 0.1, 0.9}, 1e3 + 1e4 * U(rng), 1e3 + 2e4 * U(rng));
        const MgfDiag phi = fixed_rate_mgf(sm, c.theta);
        for (int s = 2; s <= 8; s += 2) CHECK(phi.phi[std::size_t(s - 1)] == 1.0);
        CHECK(spectral_radius_rank1(sm, phi) < 1.0);
    }
}

TEST_CASE("state model validation") {
    StateModel sm;
    sm.p.fill(0.125);
    CHECK_NOTHROW(sm.validate());
    sm.p[0] = 0.2;
    CHECK_THROWS_AS(sm.validate(), ConfigError);
    sm.p[0] = 0.125;
    sm.service_bits[1] = 3.0;
    CHECK_THROWS_AS(sm.validate(), ConfigError);
    CHECK_THROWS_AS(transition_probs(fig2_config(), {1.0, 1.2, 0.5}, 1e3, 1e3), ConfigError);
    CHECK_THROWS_AS(transition_probs(fig2_config(), SensingPerformance::perfect(), -1.0, 1e3), ConfigError);
    MgfDiag bad;
    bad.phi.fill(-0.1);
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(is_on_state(1));
    CHECK(!is_on_state(8));
}
