#include "doctest.h"

#include <cmath>

#include "ionlink/lindblad.hpp"

using namespace ionlink;

namespace {

// Bare two-level atom: one ground and one excited manifold coupled by a
// single unit-amplitude pi transition.
LevelSystem two_level(double gamma_per_us) {
    LevelSystem sys;
    sys.add_manifold(Manifold{"g", 0, 0.0, 0.0});
    sys.add_manifold(Manifold{"e", 0, 0.0, 0.0});
    TransitionChannel ch;
    ch.label = "drive";
    ch.upper_manifold = 1;
    ch.lower_manifold = 0;
    ch.rate_per_us = gamma_per_us;
    ch.couplings = {Coupling{0, 0, 0, 1.0}};
    sys.add_custom_channel(ch);
    return sys;
}

LaserBeam pi_beam(double rabi_mhz, double detuning_mhz) {
    LaserBeam b;
    b.channel = 0;
    b.rabi_mhz = rabi_mhz;
    b.detuning_mhz = detuning_mhz;
    b.f_pi = 1.0;
    return b;
}

Mat ground_state() {
    Mat rho = Mat::Zero(2, 2);
    rho(0, 0) = 1.0;
    return rho;
}

Mat excited_state() {
    Mat rho = Mat::Zero(2, 2);
    rho(1, 1) = 1.0;
    return rho;
}

}  // namespace

TEST_CASE("Clebsch-Gordan coefficients") {
    // J=1/2 upper decaying to J=3/2: squared weights 1/2, 1/3, 1/6
    CHECK(std::pow(clebsch_gordan(3, -3, 2, 2, 1, -1), 2) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::pow(clebsch_gordan(3, -1, 2, 0, 1, -1), 2) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(std::pow(clebsch_gordan(3, 1, 2, -2, 1, -1), 2) ==
          doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    // J=1/2 to J=1/2
    CHECK(std::pow(clebsch_gordan(1, 1, 2, -2, 1, -1), 2) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(std::pow(clebsch_gordan(1, 1, 2, 0, 1, 1), 2) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    // selection rules
    CHECK(clebsch_gordan(3, -3, 2, -2, 1, -1) == 0.0);
    CHECK(clebsch_gordan(3, 3, 2, 2, 1, 1) == 0.0);

    // orthonormality of the 3/2 (x) 1 coupling across J = 1/2, 3/2, 5/2
    for (int two_j_a : {1, 3, 5})
        for (int two_j_b : {1, 3, 5})
            for (int two_m = -1; two_m <= 1; two_m += 2) {
                double acc = 0.0;
                for (int two_m1 = -3; two_m1 <= 3; two_m1 += 2)
                    acc += clebsch_gordan(3, two_m1, 2, two_m - two_m1, two_j_a, two_m) *
                           clebsch_gordan(3, two_m1, 2, two_m - two_m1, two_j_b, two_m);
                CHECK(acc == doctest::Approx(two_j_a == two_j_b ? 1.0 : 0.0).epsilon(1e-12));
            }
}

TEST_CASE("no drive and no decay leaves the state alone") {
    auto sys = two_level(0.0);
    Mat rho0 = Mat::Zero(2, 2);
    rho0(0, 0) = 0.7;
    rho0(1, 1) = 0.3;
    rho0(0, 1) = rho0(1, 0) = 0.2;
    auto run = evolve(rho0, sys, {}, 0.0, 1.0, 1e-3);
    CHECK(max_abs(run.rho.back() - rho0) < 1e-12);
}

TEST_CASE("resonant Rabi oscillation and pi pulse") {
    auto sys = two_level(0.0);
    const double rabi_mhz = 5.0;
    const double omega = 2.0 * kPi * rabi_mhz;
    const double t_pi = kPi / omega;
    auto run = evolve(ground_state(), sys, {pi_beam(rabi_mhz, 0.0)}, 0.0, t_pi, 2e-4);
    CHECK(run.rho.back()(1, 1).real() == doctest::Approx(1.0).epsilon(1e-6));

    // population follows sin^2(omega t / 2) along the way
    auto half = evolve(ground_state(), sys, {pi_beam(rabi_mhz, 0.0)}, 0.0, 0.37 * t_pi, 2e-4);
    const double expected = std::pow(std::sin(0.5 * omega * 0.37 * t_pi), 2);
    CHECK(half.rho.back()(1, 1).real() == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("free decay is exponential") {
    const double gamma = 8.0;
    auto sys = two_level(gamma);
    auto run = evolve(excited_state(), sys, {}, 0.0, 0.5, 1e-3 / 0.8);
    for (std::size_t i = 0; i < run.t_us.size(); i += 100) {
        const double expected = std::exp(-gamma * run.t_us[i]);
        CHECK(std::abs(run.population(i, 1) - expected) < 1e-6);
    }
}

TEST_CASE("driven-damped steady state") {
    const double gamma = 20.0;
    auto sys = two_level(gamma);
    for (double detuning_mhz : {0.0, 3.0}) {
        for (double rabi_mhz : {2.0, 6.0}) {
            const double omega = 2.0 * kPi * rabi_mhz;
            const double delta = 2.0 * kPi * detuning_mhz;
            const double expected = (omega * omega / 4.0) /
                                    (delta * delta + gamma * gamma / 4.0 + omega * omega / 2.0);
            auto run = propagate_constant(ground_state(), sys,
                                          {pi_beam(rabi_mhz, detuning_mhz)}, {0.0, 2.0, 4.0});
            CHECK(std::abs(run.rho.back()(1, 1).real() - expected) < 1e-4);
        }
    }
}

TEST_CASE("trace and positivity over a hundred lifetimes") {
    const double gamma = 1.0;
    auto sys = two_level(gamma);
    auto run = evolve(excited_state(), sys, {pi_beam(0.5, 0.0)}, 0.0, 100.0, 2e-3, 100);
    CHECK(run.max_trace_error() < 1e-6);
    CHECK(run.min_eigenvalue() > -1e-7);
}

TEST_CASE("halving the step changes the endpoint by less than 1e-6") {
    auto sys = two_level(12.0);
    const auto beams = std::vector<LaserBeam>{pi_beam(4.0, 1.5)};
    auto coarse = evolve(ground_state(), sys, beams, 0.0, 1.0, 1.3e-4);
    auto fine = evolve(ground_state(), sys, beams, 0.0, 1.0, 0.65e-4);
    CHECK(max_abs(coarse.rho.back() - fine.rho.back()) < 1e-6);
}

TEST_CASE("step-size precondition is enforced") {
    auto sys = two_level(100.0);
    CHECK_THROWS(evolve(ground_state(), sys, {pi_beam(30.0, 0.0)}, 0.0, 1.0, 1e-3));
}

TEST_CASE("matrix-exponential propagation matches the integrator") {
    auto sys = two_level(15.0);
    const auto beams = std::vector<LaserBeam>{pi_beam(3.0, 2.0)};
    Mat rho0 = Mat::Zero(2, 2);
    rho0(0, 0) = 0.6;
    rho0(1, 1) = 0.4;
    rho0(0, 1) = rho0(1, 0) = cxd(0.1, 0.05);
    rho0(1, 0) = std::conj(rho0(0, 1));
    auto exact = propagate_constant(rho0, sys, beams, {0.0, 0.25, 0.5, 0.75, 1.0});
    auto rk4 = evolve(rho0, sys, beams, 0.0, 1.0, 5e-5);
    CHECK(max_abs(exact.rho.back() - rk4.rho.back()) < 1e-8);
    CHECK(exact.max_trace_error() < 1e-10);
}

TEST_CASE("inconsistent rotating frames are rejected") {
    LevelSystem sys;
    sys.add_manifold(Manifold{"g", 0, 0.0, 0.0});
    sys.add_manifold(Manifold{"e", 0, 0.0, 0.0});
    TransitionChannel ch;
    ch.label = "t";
    ch.upper_manifold = 1;
    ch.lower_manifold = 0;
    ch.rate_per_us = 0.0;
    ch.couplings = {Coupling{0, 0, 0, 1.0}};
    sys.add_custom_channel(ch);
    auto b1 = pi_beam(1.0, 0.0);
    auto b2 = pi_beam(1.0, 5.0);  // same line, different frequency
    CHECK_THROWS(evolve(ground_state(), sys, {b1, b2}, 0.0, 0.1, 1e-4));

    LaserBeam bad = pi_beam(1.0, 0.0);
    bad.channel = 7;
    CHECK_THROWS(evolve(ground_state(), sys, {bad}, 0.0, 0.1, 1e-4));
}
