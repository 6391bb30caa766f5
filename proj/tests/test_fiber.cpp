#include "doctest.h"

#include <cmath>

#include "ionlink/fiber.hpp"

using namespace ionlink;

namespace {

EmissionTimePDF uniform_pdf(double t_max_ns, int n) {
    EmissionTimePDF pdf;
    const double density = 1.0 / t_max_ns;
    for (int i = 0; i <= n; ++i) {
        pdf.t_ns.push_back(t_max_ns * i / n);
        pdf.psi_minus.push_back(density);
        pdf.psi_plus.push_back(0.0);
    }
    pdf.validate();
    return pdf;
}

}  // namespace

TEST_CASE("fiber survival") {
    CHECK(fiber_survival(2.8, 1.31) == doctest::Approx(0.430).epsilon(0.007));
    CHECK(fiber_survival(0.0, 1.31) == doctest::Approx(1.0));
    CHECK(fiber_survival(3.0, 0.77) == doctest::Approx(0.588).epsilon(1e-3));
    // multiplicative over concatenated segments
    for (double a : {0.4, 1.0, 2.2})
        for (double b : {0.3, 1.7})
            CHECK(fiber_survival(a + b, 0.9) ==
                  doctest::Approx(fiber_survival(a, 0.9) * fiber_survival(b, 0.9)).epsilon(1e-12));
    CHECK_THROWS(fiber_survival(-1.0, 0.5));
}

TEST_CASE("fiber latency") {
    CHECK(fiber_latency_us(2.8, 1.4575267) == doctest::Approx(13.613).epsilon(8e-5));
    CHECK(fiber_latency_us(0.0, 1.4575267) == doctest::Approx(0.0));
    CHECK(fiber_latency_us(5.6, 1.4575267) ==
          doctest::Approx(2.0 * fiber_latency_us(2.8, 1.4575267)).epsilon(1e-12));
}

TEST_CASE("fiber transform on the joint state") {
    const auto state = ideal_state();

    FiberModel identity_model;
    auto [same, survival] = apply_fiber(state, identity_model, 0.0);
    CHECK(survival == doctest::Approx(1.0));
    CHECK(max_abs(same.rho.matrix() - state.rho.matrix()) < 1e-12);

    FiberModel depol_model;
    depol_model.depolarization = 0.2;
    auto [mixed, s2] = apply_fiber(state, depol_model, 0.0);
    CHECK(s2 == doctest::Approx(1.0));
    CHECK(purity(mixed.rho) < purity(state.rho));
    CHECK(std::abs(mixed.rho.matrix().trace().real() - 1.0) < 1e-12);

    // small drift rotation: fidelity drop is quadratic in the angle
    const auto psi = PureState::link_target();
    double prev_ratio = 0.0;
    for (double eps : {2e-2, 1e-2, 5e-3}) {
        FiberModel drift_model;
        drift_model.drift.rate_rad_per_s = eps;
        auto [drifted, s3] = apply_fiber(state, drift_model, 1.0);
        const double drop = 1.0 - fidelity(drifted.rho, psi);
        const double ratio = drop / (eps * eps);
        if (prev_ratio != 0.0) CHECK(ratio == doctest::Approx(prev_ratio).epsilon(1e-3));
        prev_ratio = ratio;
    }
    // drift at time zero is the identity
    FiberModel drift_model;
    drift_model.drift.rate_rad_per_s = 0.7;
    auto [still, s4] = apply_fiber(state, drift_model, 0.0);
    CHECK(max_abs(still.rho.matrix() - state.rho.matrix()) < 1e-12);
}

TEST_CASE("window capture") {
    const auto pdf = uniform_pdf(40.0, 800);
    DetectorModel det;
    det.window_start_ns = 0.0;
    det.window_end_ns = 40.0;
    CHECK(window_capture(pdf, det) == doctest::Approx(1.0).epsilon(1e-9));
    det.window_start_ns = 10.0;
    det.window_end_ns = 20.0;
    CHECK(window_capture(pdf, det) == doctest::Approx(0.25).epsilon(1e-9));
    det.window_end_ns = 10.0;
    CHECK_THROWS(window_capture(pdf, det));
}

TEST_CASE("dark counts expose a per-window false-herald probability") {
    DetectorModel det;
    det.dark_rate_hz = 100.0;
    det.window_start_ns = 5.0;
    det.window_end_ns = 25.0;
    CHECK(det.false_herald_probability() == doctest::Approx(100.0 * 20e-9).epsilon(1e-12));
    det.dark_rate_hz = 0.0;
    CHECK(det.false_herald_probability() == 0.0);
}

TEST_CASE("arrival phase coherence") {
    const auto pdf = uniform_pdf(40.0, 4000);
    DetectorModel det;
    det.window_start_ns = 5.0;
    det.window_end_ns = 25.0;
    CHECK(arrival_phase_coherence(pdf, det, 0.0) == doctest::Approx(1.0));

    // uniform density over a window T: |sinc(pi f T)|
    for (double f_mhz : {5.0, 11.2, 20.0}) {
        const double x = kPi * f_mhz * 1e-3 * 20.0;
        const double expected = std::abs(std::sin(x) / x);
        CHECK(arrival_phase_coherence(pdf, det, f_mhz) ==
              doctest::Approx(expected).epsilon(1e-4));
    }

    // a delta-like density keeps full coherence at any splitting
    EmissionTimePDF spike;
    for (int i = 0; i <= 400; ++i) {
        const double t = 0.05 * i;
        spike.t_ns.push_back(t);
        const double x = (t - 10.0) / 0.05;
        spike.psi_minus.push_back(std::exp(-0.5 * x * x) / (0.05 * std::sqrt(2.0 * kPi)));
        spike.psi_plus.push_back(0.0);
    }
    spike.validate(1e-4);
    DetectorModel wide;
    wide.window_start_ns = 0.0;
    wide.window_end_ns = 20.0;
    CHECK(arrival_phase_coherence(spike, wide, 30.0) > 0.999);
}
