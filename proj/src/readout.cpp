#include "ionlink/readout.hpp"

#include <cmath>
#include <stdexcept>

namespace ionlink {

void ReadoutErrors::validate() const {
    for (double v : {eps_b, eps_d, eps_d2, eps_s, eps_pi})
        if (v < 0.0 || v > 1.0) throw std::invalid_argument("readout error outside [0, 1]");
}

nlohmann::json ReadoutErrors::to_json() const {
    return {{"eps_b", eps_b}, {"eps_d", eps_d}, {"eps_d2", eps_d2},
            {"eps_s", eps_s}, {"eps_pi", eps_pi}};
}

ReadoutErrors ReadoutErrors::from_json(const nlohmann::json& j) {
    ReadoutErrors e;
    e.eps_b = j.value("eps_b", 0.0);
    e.eps_d = j.value("eps_d", 0.0);
    e.eps_d2 = j.value("eps_d2", 0.0);
    e.eps_s = j.value("eps_s", 0.0);
    e.eps_pi = j.value("eps_pi", 0.0);
    e.validate();
    return e;
}

Eigen::Matrix3d forward_matrix(int pass, const ReadoutErrors& e) {
    e.validate();
    Eigen::Matrix3d m;
    if (pass == 1) {
        m << 1.0 - e.eps_b, e.eps_d, e.eps_d2,
             e.eps_b, 1.0 - e.eps_d, 1.0 - e.eps_d2,
             1.0, 1.0, 1.0;
        return m;
    }
    if (pass == 2) {
        const double b0 =
            (e.eps_d * (1.0 - e.eps_pi) + e.eps_pi * (1.0 - e.eps_b)) * (1.0 - e.eps_s);
        const double b1 =
            ((1.0 - e.eps_b) * (1.0 - e.eps_pi) + e.eps_d * e.eps_pi) * (1.0 - e.eps_s);
        m << b0, b1, e.eps_d2,
             1.0 - b0, 1.0 - b1, 1.0 - e.eps_d2,
             1.0, 1.0, 1.0;
        return m;
    }
    throw std::invalid_argument("pass must be 1 or 2");
}

TrialCounts simulate_trials(double p0, double p1, double p2, const ReadoutErrors& e,
                            std::int64_t k, RandomStream& rng) {
    if (p0 < 0 || p1 < 0 || p2 < 0 || std::abs(p0 + p1 + p2 - 1.0) > 1e-9)
        throw std::invalid_argument("populations must form a probability simplex");
    if (k <= 0) throw std::invalid_argument("trial count must be positive");
    TrialCounts counts;
    counts.k = k;
    const Eigen::Matrix3d m1 = forward_matrix(1, e);
    const Eigen::Matrix3d m2 = forward_matrix(2, e);
    const std::vector<double> pops = {p0, p1, p2};
    for (std::int64_t t = 0; t < k; ++t) {
        const auto s1 = rng.discrete(pops);
        if (rng.bernoulli(m1(0, static_cast<int>(s1)))) ++counts.n_b1;
        const auto s2 = rng.discrete(pops);
        if (rng.bernoulli(m2(0, static_cast<int>(s2)))) ++counts.n_b2;
    }
    counts.n_d1 = k - counts.n_b1;
    counts.n_d2 = k - counts.n_b2;
    return counts;
}

PopulationEstimate correct_counts(const TrialCounts& c, const ReadoutErrors& e) {
    if (c.k <= 0 || c.n_b1 + c.n_d1 != c.k || c.n_b2 + c.n_d2 != c.k)
        throw std::invalid_argument("trial counts are inconsistent");
    Eigen::Matrix3d m;
    m.row(0) = forward_matrix(1, e).row(0);
    m.row(1) = forward_matrix(2, e).row(0);
    m.row(2) = Eigen::RowVector3d::Ones();
    const double det = m.determinant();
    if (std::abs(det) < 1e-12)
        throw std::invalid_argument("readout system is singular for these errors");
    const Eigen::Matrix3d inv = m.inverse();

    PopulationEstimate est;
    const Eigen::Vector3d observed(static_cast<double>(c.n_b1), static_cast<double>(c.n_b2),
                                   static_cast<double>(c.k));
    est.n = inv * observed;

    // The inversion drops the eps_d2 * eps_s cross term, which is only valid
    // while leaked bright counts stay negligible.
    if (e.eps_d2 * std::max(est.n(2), 0.0) > 1e-3 * static_cast<double>(c.k))
        throw std::invalid_argument(
            "eps_d2 times the leaked population is too large for the dropped cross term");

    // Each pass is k independent trials whose marginal bright probability is
    // q = n_b / k, so Var(n_b) = k q (1 - q); the two passes are separate
    // experiments and uncorrelated.
    const double k = static_cast<double>(c.k);
    const double q1 = static_cast<double>(c.n_b1) / k;
    const double q2 = static_cast<double>(c.n_b2) / k;
    Eigen::Matrix3d obs_cov = Eigen::Matrix3d::Zero();
    obs_cov(0, 0) = k * q1 * (1.0 - q1);
    obs_cov(1, 1) = k * q2 * (1.0 - q2);
    est.covariance = inv * obs_cov * inv.transpose();
    return est;
}

const char* ion_basis_name(IonBasis b) {
    switch (b) {
        case IonBasis::Z: return "Z";
        case IonBasis::X: return "X";
        case IonBasis::Y: return "Y";
    }
    throw std::logic_error("unknown ion basis");
}

IonBasis ion_basis_from_name(const std::string& s) {
    if (s == "Z") return IonBasis::Z;
    if (s == "X") return IonBasis::X;
    if (s == "Y") return IonBasis::Y;
    throw std::invalid_argument("ion basis must be Z, X or Y");
}

Mat2 ion_basis_rotation(IonBasis basis) {
    Mat2 u;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    switch (basis) {
        case IonBasis::Z:
            return Mat2::Identity();
        case IonBasis::X:
            u << inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2;
            return u;
        case IonBasis::Y:
            u << inv_sqrt2, -kI * inv_sqrt2, -kI * inv_sqrt2, inv_sqrt2;
            return u;
    }
    throw std::logic_error("unknown ion basis");
}

bool ion_outcome(const Mat2& rho_ion, IonBasis basis, const ReadoutErrors& e, bool leaked,
                 int pass, RandomStream& rng) {
    e.validate();
    const Eigen::Matrix3d m = forward_matrix(pass, e);
    if (!leaked && basis != IonBasis::Z && rng.bernoulli(e.eps_s)) leaked = true;
    int column = 2;
    if (!leaked) {
        const Mat2 u = ion_basis_rotation(basis);
        const Mat2 rotated = u * rho_ion * u.adjoint();
        const double p0 = std::min(1.0, std::max(0.0, rotated(0, 0).real()));
        column = rng.bernoulli(p0) ? 0 : 1;
    }
    return rng.bernoulli(m(0, column));
}

}  // namespace ionlink
