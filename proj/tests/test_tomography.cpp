#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "ionlink/tomography.hpp"

using namespace ionlink;

namespace {

Scenario noiseless_scenario() {
    Scenario sc;
    sc.name = "noiseless";
    sc.seed = 11;
    sc.has_seed = true;
    return sc;
}

Scenario lab_scenario() {
    Scenario sc;
    sc.name = "lab";
    sc.p_leak = 0.0197;
    sc.t2_ms = 1.36;
    sc.wait_us = 46.0;
    sc.pol_mixing_depol = 0.0349;
    sc.photon_path_depol = 0.0058;
    sc.pi2_depol = 0.00267;
    sc.readout = ReadoutErrors{0.0159, 0.005, 0.0, 0.0092, 0.001};
    sc.timing = TimingBudget{1.636, 0.5, 0.0, 50, 0.0, 0.0197};
    sc.seed = 12;
    sc.has_seed = true;
    return sc;
}

// Test-side oracle: retained weights of a setting computed straight from
// projector arithmetic on an arbitrary joint state, zero readout errors.
std::array<double, 4> projector_weights(const Mat& rho, const MeasurementSetting& setting) {
    const Mat2 a = analysis_unitary(setting.photon);
    const Mat2 u = ion_basis_rotation(setting.ion);
    std::array<double, 4> w{};
    for (int q = 0; q < 2; ++q) {
        Vec2 e = Vec2::Zero();
        e(q) = 1.0;
        const Vec2 port_vec = a.adjoint() * e;
        for (int cls = 0; cls < 2; ++cls) {
            Vec2 o = Vec2::Zero();
            o(cls) = 1.0;
            const Vec2 ion_vec = u.adjoint() * o;
            Vec joint(4);
            joint << port_vec(0) * ion_vec(0), port_vec(0) * ion_vec(1),
                port_vec(1) * ion_vec(0), port_vec(1) * ion_vec(1);
            w[static_cast<std::size_t>(2 * q + cls)] =
                (joint.adjoint() * rho * joint)(0, 0).real();
        }
    }
    return w;
}

DensityMatrix random_state(RandomStream& rng) {
    Mat g(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) g(i, j) = cxd(rng.gaussian(), rng.gaussian());
    Mat m = g * g.adjoint();
    m /= m.trace().real();
    return DensityMatrix(m);
}

TomographyDataset dataset_from_state(const Mat& rho, double scale = 1e7) {
    TomographyDataset d;
    d.shots_per_setting = static_cast<std::int64_t>(scale);
    for (const auto& setting : all_settings()) {
        SettingCounts s;
        s.setting = setting;
        const auto w = projector_weights(rho, setting);
        for (int i = 0; i < 4; ++i) s.counts[i] = std::llround(scale * w[i]);
        s.heralds = static_cast<std::int64_t>(scale);
        d.settings.push_back(s);
    }
    return d;
}

}  // namespace

TEST_CASE("noiseless setting distributions match the generator state") {
    const auto sc = noiseless_scenario();
    // straight basis: diagonal weights 3/4 and 1/4 split across the passes
    const auto hz = setting_distribution(sc, {PhotonBasis::H, IonBasis::Z});
    CHECK(hz.retained[0][0] == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(hz.retained[0][1] == doctest::Approx(0.0));
    CHECK(hz.retained[1][0] == doctest::Approx(0.0));
    CHECK(hz.retained[1][1] == doctest::Approx(0.25).epsilon(1e-9));

    // diagonal basis pair: correlations of the pure target state
    const auto dx = setting_distribution(sc, {PhotonBasis::D, IonBasis::X});
    const double strong = (4.0 + 2.0 * std::sqrt(3.0)) / 16.0;
    const double weak = (4.0 - 2.0 * std::sqrt(3.0)) / 16.0;
    CHECK(dx.retained[0][0] == doctest::Approx(strong).epsilon(1e-9));
    CHECK(dx.retained[0][1] == doctest::Approx(weak).epsilon(1e-9));
    CHECK(dx.retained[1][0] == doctest::Approx(weak).epsilon(1e-9));
    CHECK(dx.retained[1][1] == doctest::Approx(strong).epsilon(1e-9));

    // full leakage retains nothing
    Scenario leaky = sc;
    leaky.p_leak = 1.0;
    const auto gone = setting_distribution(leaky, {PhotonBasis::H, IonBasis::Z});
    CHECK(gone.retained_total(0) == doctest::Approx(0.0));
    CHECK(gone.retained_total(1) == doctest::Approx(0.0));
}

TEST_CASE("sampled heralds follow the exact distribution") {
    const auto sc = lab_scenario();
    const std::int64_t shots = 60000;
    const auto d = simulate_dataset(sc, shots, sc.seed);
    for (const auto& s : d.settings) {
        const auto dist = setting_distribution(sc, s.setting);
        for (int pass = 0; pass < 2; ++pass) {
            const auto trials = static_cast<double>(s.pass_trials[pass]);
            for (int q = 0; q < 2; ++q) {
                const double expect = trials * dist.retained[pass][q];
                const double sigma = std::sqrt(
                    std::max(1.0, trials * dist.retained[pass][q] *
                                      (1.0 - dist.retained[pass][q])));
                CHECK(std::abs(static_cast<double>(s.counts[2 * q + pass]) - expect) <
                      5.0 * sigma);
            }
        }
        CHECK(s.retained() + s.darks_pass1[0] + s.darks_pass1[1] + s.darks_pass2[0] +
                  s.darks_pass2[1] ==
              s.heralds);
    }
}

TEST_CASE("dataset simulation is reproducible and thread-invariant") {
    const auto sc = lab_scenario();
    const auto a = simulate_dataset(sc, 5000, 77, 1);
    const auto b = simulate_dataset(sc, 5000, 77, 1);
    const auto c = simulate_dataset(sc, 5000, 77, 3);
    CHECK(a.to_json() == b.to_json());
    CHECK(a.to_json() == c.to_json());
    const auto other = simulate_dataset(sc, 5000, 78, 1);
    CHECK(a.to_json() != other.to_json());
}

TEST_CASE("linear inversion is exact on exact probabilities") {
    // generator state
    const Mat target = DensityMatrix::pure(PureState::link_target()).matrix();
    const Mat rec = linear_inversion(dataset_from_state(target, 4e9));
    CHECK(max_abs(rec - target) < 1e-7);  // rounding of the scaled counts

    // a maximally mixed state maps to itself
    const Mat mixed = Mat::Identity(4, 4) / 4.0;
    CHECK(max_abs(linear_inversion(dataset_from_state(mixed, 4e9)) - mixed) < 1e-7);

    // brute-force equivalence over random states
    RandomStream rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const auto rho = random_state(rng);
        const Mat rec2 = linear_inversion(dataset_from_state(rho.matrix(), 4e9));
        CHECK(max_abs(rec2 - rho.matrix()) < 2e-7);
        CHECK(is_hermitian(rec2, 1e-12));
        CHECK(std::abs(rec2.trace().real() - 1.0) < 1e-9);
    }

    // finite counts stay Hermitian with unit trace
    const auto sc = lab_scenario();
    const auto d = simulate_dataset(sc, 2000, 5);
    const Mat noisy = linear_inversion(d);
    CHECK(is_hermitian(noisy, 1e-12));
    CHECK(std::abs(noisy.trace().real() - 1.0) < 1e-9);

    auto broken = d;
    broken.settings.pop_back();
    CHECK_THROWS(linear_inversion(broken));
}

TEST_CASE("likelihood maximization recovers the generator state") {
    // exact probabilities, no sampling noise
    const auto sc = noiseless_scenario();
    const auto exact = exact_dataset(sc, 1e9);
    auto init = psd_project(linear_inversion(exact));
    const auto res = mle_reconstruct(exact, init);
    CHECK(res.fidelity_value >= 1.0 - 1e-6);

    // sampled at 1e5 heralds per setting
    const auto d = simulate_dataset(sc, 100000, sc.seed);
    auto init2 = psd_project(linear_inversion(d));
    const auto res2 = mle_reconstruct(d, init2);
    CHECK(res2.fidelity_value >= 0.995);
    CHECK(res2.log_likelihood >= dataset_log_likelihood(d, init2) - 1e-9);
}

TEST_CASE("likelihood never drops below the seed and respects the purity bound") {
    const auto sc = lab_scenario();
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        const auto d = simulate_dataset(sc, 4000, seed);
        auto init = psd_project(linear_inversion(d));
        const auto res = mle_reconstruct(d, init);
        CHECK(res.log_likelihood >= dataset_log_likelihood(d, init) - 1e-9);
        CHECK(res.fidelity_value <= max_fidelity_bound(res.purity_value) + 1e-9);
        const Mat& m = res.rho.matrix();
        CHECK(is_hermitian(m, 1e-10));
        CHECK(std::abs(m.trace().real() - 1.0) < 1e-9);
    }
}

TEST_CASE("no nearby physical state beats the reconstruction") {
    const auto sc = lab_scenario();
    const auto d = simulate_dataset(sc, 20000, 19);
    const auto res = mle_reconstruct(d, psd_project(linear_inversion(d)));
    const double best = dataset_log_likelihood(d, res.rho);
    RandomStream rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        Mat g(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) g(i, j) = cxd(rng.gaussian(), rng.gaussian());
        Mat other = g * g.adjoint();
        other /= other.trace().real();
        const double eps = trial % 2 == 0 ? 1e-3 : 1e-2;
        const DensityMatrix nearby((1.0 - eps) * res.rho.matrix() + eps * other);
        CHECK(dataset_log_likelihood(d, nearby) <= best + 1e-7);
    }
}

TEST_CASE("reconstruction is invariant under setting order") {
    const auto sc = lab_scenario();
    auto d = simulate_dataset(sc, 4000, 9);
    auto shuffled = d;
    std::reverse(shuffled.settings.begin(), shuffled.settings.end());
    const auto r1 = mle_reconstruct(d, psd_project(linear_inversion(d)));
    const auto r2 = mle_reconstruct(shuffled, psd_project(linear_inversion(shuffled)));
    CHECK(max_abs(r1.rho.matrix() - r2.rho.matrix()) < 1e-7);
    CHECK(r1.fidelity_value == doctest::Approx(r2.fidelity_value).epsilon(1e-9));
}

TEST_CASE("readout correction shifts the fidelity up by the budget amount") {
    const auto sc = lab_scenario();
    const auto d = exact_dataset(sc, 4e8);
    auto init = psd_project(linear_inversion(d));
    const auto plain = mle_reconstruct(d, init);
    MleOptions counts_mode;
    counts_mode.correction = ReadoutCorrection::counts;
    const auto corrected = mle_reconstruct(d, init, counts_mode);
    const double shift = corrected.fidelity_value - plain.fidelity_value;
    CHECK(shift > 0.004);
    CHECK(shift < 0.009);

    MleOptions lik_mode;
    lik_mode.correction = ReadoutCorrection::likelihood;
    const auto modeled = mle_reconstruct(d, init, lik_mode);
    const double shift2 = modeled.fidelity_value - plain.fidelity_value;
    CHECK(shift2 > 0.004);
    CHECK(shift2 < 0.009);
}

TEST_CASE("bootstrap error bars behave statistically") {
    const auto sc = noiseless_scenario();
    // a few thousand retained heralds per setting
    const auto d = simulate_dataset(sc, 4000, 31);
    const auto errs = bootstrap(d, 120, 31);
    CHECK(errs.first > 0.001);
    CHECK(errs.first < 0.012);

    // scaling check away from the unit-fidelity boundary
    const auto lab = lab_scenario();
    const auto small = simulate_dataset(lab, 4000, 32);
    const auto big4 = simulate_dataset(lab, 16000, 32);
    const auto errs_small = bootstrap(small, 120, 32);
    const auto errs_big = bootstrap(big4, 120, 32);
    const double ratio = errs_small.first / errs_big.first;
    CHECK(ratio > 1.35);
    CHECK(ratio < 3.0);

    // huge exact-probability counts: resampling noise vanishes
    const auto bigexact = exact_dataset(sc, 4e12);
    const auto tiny = bootstrap(bigexact, 100, 33);
    CHECK(tiny.first < 1e-6);
    CHECK_THROWS(bootstrap(d, 10, 31));

    // worker count never changes the numbers
    const auto one = bootstrap(small, 100, 40, {}, 1);
    const auto three = bootstrap(small, 100, 40, {}, 3);
    CHECK(one.first == doctest::Approx(three.first).epsilon(1e-15));
    CHECK(one.second == doctest::Approx(three.second).epsilon(1e-15));
}

TEST_CASE("likelihood-mode reconstruction works on sampled counts") {
    const auto sc = lab_scenario();
    const auto d = simulate_dataset(sc, 20000, 55);
    const auto init = psd_project(linear_inversion(d));
    MleOptions opts;
    opts.correction = ReadoutCorrection::likelihood;
    const auto res = mle_reconstruct(d, init, opts);
    CHECK(res.converged);
    // modeling the readout response recovers a higher fidelity than the
    // uncorrected reconstruction of the same data
    const auto plain = mle_reconstruct(d, init);
    CHECK(res.fidelity_value > plain.fidelity_value);
    CHECK(res.log_likelihood >= dataset_log_likelihood(d, init, opts) - 1e-9);
}

TEST_CASE("error budget isolates each mechanism") {
    const auto rows = error_budget_report(lab_scenario());
    auto find = [&](const std::string& name) {
        for (const auto& r : rows)
            if (r.mechanism == name) return r;
        REQUIRE(false);
        return rows.front();
    };
    const auto deph = find("ion-dephasing-wait");
    CHECK(deph.delta_only_on == doctest::Approx(1.25e-2).epsilon(0.16));
    const auto ro = find("readout");
    CHECK(ro.delta_only_on > 4e-3);
    CHECK(ro.delta_only_on < 8e-3);

    // deltas nearly add up to the total infidelity
    Scenario sc = lab_scenario();
    const auto d = exact_dataset(sc, 1e9);
    const auto total = mle_reconstruct(d, psd_project(linear_inversion(d)));
    double sum = 0.0;
    for (const auto& r : rows) sum += r.delta_only_on;
    CHECK(std::abs(sum - (1.0 - total.fidelity_value)) < 0.005);

    // all mechanisms off: no infidelity at all
    Scenario off = lab_scenario();
    off.toggles = NoiseToggles{false, false, false, false, false, false, false};
    const auto clean = exact_dataset(off, 1e9);
    const auto perfect = mle_reconstruct(clean, psd_project(linear_inversion(clean)));
    CHECK(perfect.fidelity_value >= 1.0 - 1e-6);

    // deployed scenario: the travel wait costs the closed-form coherence loss
    Scenario deployed = lab_scenario();
    deployed.p_leak = 0.0234;
    deployed.timing.travel_us = 13.613;
    deployed.timing.leakage_fraction = 0.0234;
    deployed.residual_rotation_rad = 0.2576;
    const auto drows = error_budget_report(deployed);
    for (const auto& r : drows)
        if (r.mechanism == "ion-dephasing-travel") {
            const double closed_form =
                0.375 * (1.0 - std::exp(-13.613e-6 / 1.36e-3));
            CHECK(r.delta_only_on == doctest::Approx(closed_form).epsilon(0.12));
            CHECK(r.delta_only_on == doctest::Approx(3.5e-3).epsilon(0.29));
        }
}

TEST_CASE("dataset JSON round trip") {
    const auto sc = lab_scenario();
    const auto d = simulate_dataset(sc, 1000, 3);
    const auto back = TomographyDataset::from_json(d.to_json());
    CHECK(back.to_json() == d.to_json());
}
