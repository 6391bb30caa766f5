#include "doctest.h"

#include <cmath>

#include "ionlink/density_matrix.hpp"
#include "ionlink/rng.hpp"

using namespace ionlink;

namespace {

// Random full-rank density matrix for property checks.
DensityMatrix random_density(int dim, RandomStream& rng) {
    Mat g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = cxd(rng.gaussian(), rng.gaussian());
    Mat m = g * g.adjoint();
    m /= m.trace().real();
    return DensityMatrix(m);
}

PureState random_pure(int dim, RandomStream& rng) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = cxd(rng.gaussian(), rng.gaussian());
    v.normalize();
    return PureState(v);
}

void check_valid(const DensityMatrix& rho) {
    const Mat& m = rho.matrix();
    CHECK(is_hermitian(m, 1e-10));
    CHECK(std::abs(m.trace().real() - 1.0) < 1e-9);
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-9);
}

}  // namespace

TEST_CASE("type invariants are enforced") {
    Mat bad = Mat::Identity(2, 2);
    bad(0, 1) = cxd(0.0, 0.3);  // not Hermitian
    CHECK_THROWS(DensityMatrix(bad));
    CHECK_THROWS(DensityMatrix(Mat::Identity(2, 2)));  // trace 2
    Mat neg = Mat::Zero(2, 2);
    neg(0, 0) = 1.2;
    neg(1, 1) = -0.2;
    CHECK_THROWS(DensityMatrix(neg));
    CHECK_THROWS(PureState(Vec::Ones(2)));
}

TEST_CASE("tensor products") {
    const auto half = DensityMatrix::maximally_mixed(2);
    const auto quarter = tensor(half, half);
    check_valid(quarter);
    CHECK(max_abs(quarter.matrix() - Mat::Identity(4, 4) / 4.0) < 1e-14);

    Mat zero = Mat::Zero(2, 2), one = Mat::Zero(2, 2);
    zero(0, 0) = 1.0;
    one(1, 1) = 1.0;
    const auto ket01 = tensor(DensityMatrix(zero), DensityMatrix(one));
    CHECK(ket01(1, 1).real() == doctest::Approx(1.0));
    CHECK(std::abs(ket01(0, 0)) < 1e-15);

    RandomStream rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_density(2, rng);
        const auto b = random_density(2, rng);
        const auto ab = tensor(a, b);
        check_valid(ab);
        CHECK(purity(ab) == doctest::Approx(purity(a) * purity(b)).epsilon(1e-12));
    }
}

TEST_CASE("partial trace") {
    // Tracing the photon out of the target state leaves diag(3/4, 1/4);
    // expanding |psi><psi| by hand gives the same blocks.
    const auto target = DensityMatrix::pure(PureState::link_target());
    const auto ion = partial_trace(target, 1);
    check_valid(ion);
    CHECK(ion(0, 0).real() == doctest::Approx(0.75));
    CHECK(ion(1, 1).real() == doctest::Approx(0.25));
    CHECK(std::abs(ion(0, 1)) < 1e-14);

    const auto mixed = partial_trace(DensityMatrix::maximally_mixed(4), 0);
    CHECK(max_abs(mixed.matrix() - Mat::Identity(2, 2) / 2.0) < 1e-14);

    RandomStream rng(11);
    const auto a = random_density(2, rng);
    const auto b = random_density(2, rng);
    CHECK(max_abs(partial_trace(tensor(a, b), 0).matrix() - a.matrix()) < 1e-12);
    CHECK(max_abs(partial_trace(tensor(a, b), 1).matrix() - b.matrix()) < 1e-12);

    CHECK_THROWS(partial_trace(DensityMatrix::maximally_mixed(2), 0));
}

TEST_CASE("fidelity against a pure target") {
    const auto psi = PureState::link_target();
    const auto rho = DensityMatrix::pure(psi);
    CHECK(fidelity(rho, psi) == doctest::Approx(1.0));
    CHECK(fidelity(DensityMatrix::maximally_mixed(4), psi) == doctest::Approx(0.25));
    // depolarizing-channel fidelity F(lambda) = (lambda (d-1) + 1) / d
    CHECK(fidelity(depolarize(rho, 0.9), psi) == doctest::Approx(0.925).epsilon(1e-12));
    for (int step = 0; step <= 20; ++step) {
        const double lambda = 0.05 * step;
        CHECK(std::abs(fidelity(depolarize(rho, lambda), psi) - (3.0 * lambda + 1.0) / 4.0) <
              1e-12);
    }
    CHECK_THROWS(fidelity(DensityMatrix::maximally_mixed(2), psi));
}

TEST_CASE("purity and the depolarizing channel") {
    const auto psi = PureState::link_target();
    const auto rho = DensityMatrix::pure(psi);
    CHECK(purity(rho) == doctest::Approx(1.0));
    CHECK(purity(DensityMatrix::maximally_mixed(4)) == doctest::Approx(0.25));

    // P(lambda) = (lambda + (1-lambda)/d)^2 + (d-1)((1-lambda)/d)^2
    for (double lambda : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
        const double rest = (1.0 - lambda) / 4.0;
        const double expected = (lambda + rest) * (lambda + rest) + 3.0 * rest * rest;
        CHECK(purity(depolarize(rho, lambda)) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(purity(depolarize(rho, lambda)) < 1.0);
    }

    Mat zz = Mat::Zero(4, 4);
    zz(0, 0) = 1.0;
    const auto d5 = depolarize(DensityMatrix(zz), 0.5);
    CHECK(d5(0, 0).real() == doctest::Approx(0.625));
    CHECK(d5(1, 1).real() == doctest::Approx(0.125));
    CHECK(d5(2, 2).real() == doctest::Approx(0.125));
    CHECK(d5(3, 3).real() == doctest::Approx(0.125));

    CHECK(max_abs(depolarize(rho, 1.0).matrix() - rho.matrix()) < 1e-14);
    CHECK(max_abs(depolarize(rho, 0.0).matrix() - Mat::Identity(4, 4) / 4.0) < 1e-14);
    CHECK_THROWS(depolarize(rho, 1.5));
}

TEST_CASE("block dephasing") {
    const auto psi = PureState::link_target();
    const auto rho = DensityMatrix::pure(psi);

    CHECK(max_abs(dephase(rho, {0, 2}, 1.0).matrix() - rho.matrix()) < 1e-14);

    Mat plus = Mat::Constant(2, 2, 0.5);
    const auto diag = dephase(DensityMatrix(plus), {0}, 0.0);
    CHECK(std::abs(diag(0, 1)) < 1e-15);
    CHECK(diag(0, 0).real() == doctest::Approx(0.5));

    // coherence decay over the long-fiber wait: F = 10/16 + (3/8) gamma
    const double gamma = std::exp(-13.613e-6 / 1.36e-3);
    const auto faded = dephase(rho, {0, 2}, gamma);
    check_valid(faded);
    const double loss = 1.0 - fidelity(faded, psi);
    CHECK(loss == doctest::Approx(0.375 * (1.0 - gamma)).epsilon(1e-12));
    CHECK(loss == doctest::Approx(0.0037).epsilon(0.02));

    // dephasing never increases purity
    RandomStream rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto r = random_density(4, rng);
        const double g = rng.uniform();
        const auto d = dephase(r, {0, 2}, g);
        check_valid(d);
        CHECK(purity(d) <= purity(r) + 1e-12);
    }
    CHECK_THROWS(dephase(rho, {0}, -0.1));
}

TEST_CASE("purity-fidelity bound") {
    CHECK(max_fidelity_bound(1.0) == doctest::Approx(1.0));
    CHECK(max_fidelity_bound(0.908) == doctest::Approx(0.952).epsilon(6e-4));
    CHECK(max_fidelity_bound(0.899) == doctest::Approx(0.948).epsilon(6e-4));
    CHECK_THROWS(max_fidelity_bound(0.2));

    // the bound is tight exactly on depolarized pure states
    RandomStream rng(19);
    const auto psi = PureState::link_target();
    const auto rho = DensityMatrix::pure(psi);
    for (double lambda = 0.0; lambda <= 1.0; lambda += 0.05) {
        const auto d = depolarize(rho, lambda);
        CHECK(max_fidelity_bound(purity(d)) ==
              doctest::Approx(fidelity(d, psi)).epsilon(1e-10));
    }
    // and an upper bound everywhere
    for (int trial = 0; trial < 30; ++trial) {
        const auto r = random_density(4, rng);
        const auto target = random_pure(4, rng);
        CHECK(fidelity(r, target) <= max_fidelity_bound(purity(r)) + 1e-9);
    }
}

TEST_CASE("psd projection") {
    const auto rho = DensityMatrix::pure(PureState::link_target());
    CHECK(max_abs(psd_project(rho.matrix()).matrix() - rho.matrix()) < 1e-12);

    Mat clip = Mat::Zero(2, 2);
    clip(0, 0) = 1.2;
    clip(1, 1) = -0.2;
    const auto projected = psd_project(clip);
    CHECK(projected(0, 0).real() == doctest::Approx(1.0));
    CHECK(std::abs(projected(1, 1)) < 1e-14);

    RandomStream rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        Mat perturb(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) perturb(i, j) = cxd(rng.gaussian(), rng.gaussian());
        const Mat h = DensityMatrix::pure(PureState::link_target()).matrix() +
                      0.05 * hermitize(perturb);
        check_valid(psd_project(h));
    }
    CHECK_THROWS(psd_project(-Mat::Identity(2, 2)));
}

TEST_CASE("Kraus channels resolve the identity") {
    CHECK_THROWS(KrausChannel({Mat::Identity(2, 2) * 0.5}));
    const auto depol = KrausChannel::depolarizing(4, 0.7);
    const auto rho = DensityMatrix::pure(PureState::link_target());
    CHECK(max_abs(depol.apply(rho).matrix() - depolarize(rho, 0.7).matrix()) < 1e-12);

    // photon-side depolarization equals mixing with I/2 (x) rho_ion
    const auto photon = KrausChannel::photon_depolarizing(0.3);
    const Mat expected = 0.7 * rho.matrix() +
                         0.3 * kron(Mat::Identity(2, 2) / 2.0, partial_trace(rho, 1).matrix());
    CHECK(max_abs(photon.apply(rho).matrix() - expected) < 1e-12);
}

TEST_CASE("density matrix JSON round trip") {
    RandomStream rng(31);
    const auto rho = random_density(4, rng);
    const auto back = DensityMatrix::from_json(rho.to_json());
    CHECK(max_abs(back.matrix() - rho.matrix()) < 1e-15);
}
