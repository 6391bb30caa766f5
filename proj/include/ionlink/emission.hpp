#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ionlink/density_matrix.hpp"
#include "ionlink/rng.hpp"

namespace ionlink {

// Decay amplitudes of the two collected emission branches, set by the
// angular-momentum coupling of the transition.
struct EmissionAmplitudes {
    double amp_h0 = std::sqrt(3.0) / 2.0;
    double amp_v1 = 0.5;

    void validate() const;
};

// Photon-emission probability density over time, on a uniform grid in ns.
// psi_minus is the desired decay branch, psi_plus the wrong-sublevel branch;
// together they integrate to one over the grid.
struct EmissionTimePDF {
    std::vector<double> t_ns;
    std::vector<double> psi_minus;
    std::vector<double> psi_plus;

    void validate(double tol = 1e-6) const;
    double step_ns() const;
    // Trapezoidal integrals over [t0, t1] clipped to the grid.
    double integral_minus(double t0, double t1) const;
    double integral_plus(double t0, double t1) const;
    double integral_total(double t0, double t1) const;
    double total() const;

    void write_csv(std::ostream& os) const;
    static EmissionTimePDF read_csv(std::istream& is);
};

// Photon (x) ion qubit state at emission plus the probability that the ion
// left the qubit manifold (retained separately: leaked trials still herald
// but read dark in both measurement passes and drop out in post-selection).
struct JointLinkState {
    DensityMatrix rho;
    double p_leak = 0.0;
};

JointLinkState ideal_state();

// Fraction of windowed emission that came from the desired branch,
// conditioned on detection inside [t_i, t_f].
double window_success_S(const EmissionTimePDF& pdf, double t_i_ns, double t_f_ns);

JointLinkState prepared_state(double s, const KrausChannel* extra_mix = nullptr);

struct EmissionSample {
    double t_ns = 0.0;
    bool desired = true;
};

EmissionSample sample_emission(const EmissionTimePDF& pdf, RandomStream& rng);

}  // namespace ionlink
