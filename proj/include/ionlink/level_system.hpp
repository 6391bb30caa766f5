#pragma once

#include <array>
#include <string>
#include <vector>

#include "ionlink/linalg.hpp"

namespace ionlink {

// Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> with doubled arguments
// (two_j = 2j etc.) so half-integer momenta stay exact.
double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_j, int two_m);

struct Manifold {
    std::string label;
    int two_j = 1;
    double zeeman_mhz_per_mj = 0.0;  // linear Zeeman shift per unit m_j
    double energy_offset_mhz = 0.0;

    int sublevels() const { return two_j + 1; }
    // m_j of sublevel s, doubled: runs -two_j, -two_j + 2, ..., two_j.
    int two_m(int s) const { return -two_j + 2 * s; }
};

// One coupling matrix element within a transition: upper/lower sublevel
// indices, photon polarization q (-1, 0, +1) and the angular factor.
struct Coupling {
    int upper_sublevel = 0;
    int lower_sublevel = 0;
    int q = 0;
    double amplitude = 1.0;
};

struct TransitionChannel {
    std::string label;
    int upper_manifold = 0;
    int lower_manifold = 0;
    double rate_per_us = 0.0;  // total decay rate through this channel
    std::vector<Coupling> couplings;
};

// Smoothstep rise / hold / fall pulse envelope in [0, 1]. A default
// constructed envelope is constant 1.
struct Envelope {
    double t_on_us = 0.0;
    double rise_us = 0.0;
    double hold_us = -1.0;  // negative hold means stay on forever
    double fall_us = 0.0;

    bool is_constant() const { return rise_us == 0.0 && fall_us == 0.0 && hold_us < 0.0; }
    double value(double t_us) const;
};

struct LaserBeam {
    int channel = 0;          // index into LevelSystem::channels
    double rabi_mhz = 0.0;    // peak Rabi frequency on a unit-amplitude coupling
    double detuning_mhz = 0.0;
    // Intensity fractions by polarization, summing to one.
    double f_sigma_plus = 0.0;
    double f_pi = 0.0;
    double f_sigma_minus = 0.0;
    Envelope envelope;

    void validate() const;
    double amplitude(int q) const;  // sqrt of the fraction for polarization q
};

class LevelSystem {
public:
    int add_manifold(Manifold m);
    // Decay/drive channel with angular factors from Clebsch-Gordan coupling
    // of the two manifolds' J values.
    int add_dipole_channel(const std::string& upper_label, const std::string& lower_label,
                           double rate_per_us, const std::string& label = "");
    int add_custom_channel(TransitionChannel ch);

    const std::vector<Manifold>& manifolds() const { return manifolds_; }
    const std::vector<TransitionChannel>& channels() const { return channels_; }

    int total_levels() const;
    int manifold_offset(int manifold) const;
    int level_index(int manifold, int sublevel) const;
    int find_manifold(const std::string& label) const;
    int find_channel(const std::string& label) const;
    std::string level_label(int level) const;

    // Per-upper-sublevel coupling completeness of every channel.
    void validate() const;

private:
    std::vector<Manifold> manifolds_;
    std::vector<TransitionChannel> channels_;
};

}  // namespace ionlink
