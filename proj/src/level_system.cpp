#include "ionlink/level_system.hpp"

#include <cmath>
#include <stdexcept>

namespace ionlink {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// Factorial of a doubled-integer argument that must be a whole number.
double fact2(int two_n) {
    if (two_n < 0 || two_n % 2 != 0) return -1.0;
    return factorial(two_n / 2);
}

}  // namespace

double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_j, int two_m) {
    if (two_m1 + two_m2 != two_m) return 0.0;
    if (two_j < std::abs(two_j1 - two_j2) || two_j > two_j1 + two_j2) return 0.0;
    if (std::abs(two_m1) > two_j1 || std::abs(two_m2) > two_j2 || std::abs(two_m) > two_j)
        return 0.0;
    if ((two_j1 + two_m1) % 2 != 0 || (two_j2 + two_m2) % 2 != 0 || (two_j + two_m) % 2 != 0)
        return 0.0;

    // Racah's closed form, evaluated in doubles (all factorials are small here).
    const double pref =
        std::sqrt((two_j + 1.0) * fact2(two_j + two_j1 - two_j2) * fact2(two_j - two_j1 + two_j2) *
                  fact2(two_j1 + two_j2 - two_j) / fact2(two_j1 + two_j2 + two_j + 2)) *
        std::sqrt(fact2(two_j + two_m) * fact2(two_j - two_m) * fact2(two_j1 - two_m1) *
                  fact2(two_j1 + two_m1) * fact2(two_j2 - two_m2) * fact2(two_j2 + two_m2));

    double sum = 0.0;
    for (int two_k = 0; two_k <= two_j1 + two_j2 + two_j; two_k += 2) {
        const double d1 = fact2(two_k);
        const double d2 = fact2(two_j1 + two_j2 - two_j - two_k);
        const double d3 = fact2(two_j1 - two_m1 - two_k);
        const double d4 = fact2(two_j2 + two_m2 - two_k);
        const double d5 = fact2(two_j - two_j2 + two_m1 + two_k);
        const double d6 = fact2(two_j - two_j1 - two_m2 + two_k);
        if (d1 < 0 || d2 < 0 || d3 < 0 || d4 < 0 || d5 < 0 || d6 < 0) continue;
        const double term = 1.0 / (d1 * d2 * d3 * d4 * d5 * d6);
        sum += (two_k / 2) % 2 == 0 ? term : -term;
    }
    return pref * sum;
}

double Envelope::value(double t_us) const {
    auto smooth = [](double x) { return x * x * (3.0 - 2.0 * x); };
    if (is_constant()) return 1.0;
    const double t = t_us - t_on_us;
    if (t < 0.0) return 0.0;
    if (t < rise_us) return smooth(t / rise_us);
    if (hold_us < 0.0) return 1.0;
    if (t < rise_us + hold_us) return 1.0;
    const double tf = t - rise_us - hold_us;
    if (fall_us > 0.0 && tf < fall_us) return smooth(1.0 - tf / fall_us);
    return 0.0;
}

void LaserBeam::validate() const {
    if (rabi_mhz < 0.0) throw std::invalid_argument("Rabi frequency must be nonnegative");
    if (f_sigma_plus < 0.0 || f_pi < 0.0 || f_sigma_minus < 0.0)
        throw std::invalid_argument("polarization fractions must be nonnegative");
    if (std::abs(f_sigma_plus + f_pi + f_sigma_minus - 1.0) > 1e-9)
        throw std::invalid_argument("polarization fractions must sum to one");
}

double LaserBeam::amplitude(int q) const {
    switch (q) {
        case -1: return std::sqrt(f_sigma_minus);
        case 0: return std::sqrt(f_pi);
        case 1: return std::sqrt(f_sigma_plus);
        default: throw std::invalid_argument("polarization q must be -1, 0 or +1");
    }
}

int LevelSystem::add_manifold(Manifold m) {
    if (m.two_j < 0) throw std::invalid_argument("negative angular momentum");
    manifolds_.push_back(std::move(m));
    return static_cast<int>(manifolds_.size()) - 1;
}

int LevelSystem::add_dipole_channel(const std::string& upper_label, const std::string& lower_label,
                                    double rate_per_us, const std::string& label) {
    const int u = find_manifold(upper_label);
    const int l = find_manifold(lower_label);
    const Manifold& mu = manifolds_[u];
    const Manifold& ml = manifolds_[l];
    TransitionChannel ch;
    ch.label = label.empty() ? upper_label + "-" + lower_label : label;
    ch.upper_manifold = u;
    ch.lower_manifold = l;
    ch.rate_per_us = rate_per_us;
    for (int su = 0; su < mu.sublevels(); ++su) {
        for (int sl = 0; sl < ml.sublevels(); ++sl) {
            const int two_q = mu.two_m(su) - ml.two_m(sl);
            if (std::abs(two_q) > 2 || two_q % 2 != 0) continue;
            const double cg =
                clebsch_gordan(ml.two_j, ml.two_m(sl), 2, two_q, mu.two_j, mu.two_m(su));
            if (cg == 0.0) continue;
            ch.couplings.push_back(Coupling{su, sl, two_q / 2, cg});
        }
    }
    return add_custom_channel(std::move(ch));
}

int LevelSystem::add_custom_channel(TransitionChannel ch) {
    if (ch.rate_per_us < 0.0) throw std::invalid_argument("decay rate must be nonnegative");
    if (ch.upper_manifold < 0 || ch.upper_manifold >= static_cast<int>(manifolds_.size()) ||
        ch.lower_manifold < 0 || ch.lower_manifold >= static_cast<int>(manifolds_.size()))
        throw std::invalid_argument("channel references unknown manifold");
    channels_.push_back(std::move(ch));
    return static_cast<int>(channels_.size()) - 1;
}

int LevelSystem::total_levels() const {
    int n = 0;
    for (const auto& m : manifolds_) n += m.sublevels();
    return n;
}

int LevelSystem::manifold_offset(int manifold) const {
    int n = 0;
    for (int i = 0; i < manifold; ++i) n += manifolds_[i].sublevels();
    return n;
}

int LevelSystem::level_index(int manifold, int sublevel) const {
    return manifold_offset(manifold) + sublevel;
}

int LevelSystem::find_manifold(const std::string& label) const {
    for (std::size_t i = 0; i < manifolds_.size(); ++i)
        if (manifolds_[i].label == label) return static_cast<int>(i);
    throw std::invalid_argument("unknown manifold: " + label);
}

int LevelSystem::find_channel(const std::string& label) const {
    for (std::size_t i = 0; i < channels_.size(); ++i)
        if (channels_[i].label == label) return static_cast<int>(i);
    throw std::invalid_argument("unknown transition: " + label);
}

std::string LevelSystem::level_label(int level) const {
    for (std::size_t i = 0; i < manifolds_.size(); ++i) {
        const int off = manifold_offset(static_cast<int>(i));
        if (level < off + manifolds_[i].sublevels()) {
            const int two_m = manifolds_[i].two_m(level - off);
            std::string m = two_m % 2 == 0 ? std::to_string(two_m / 2)
                                           : std::to_string(two_m) + "/2";
            if (two_m > 0) m = "+" + m;
            return manifolds_[i].label + "(m=" + m + ")";
        }
    }
    throw std::invalid_argument("level index out of range");
}

void LevelSystem::validate() const {
    for (const auto& ch : channels_) {
        const Manifold& mu = manifolds_[ch.upper_manifold];
        for (int su = 0; su < mu.sublevels(); ++su) {
            double total = 0.0;
            for (const auto& c : ch.couplings)
                if (c.upper_sublevel == su) total += c.amplitude * c.amplitude;
            if (std::abs(total - 1.0) > 1e-9)
                throw std::invalid_argument("channel " + ch.label +
                                            " branching does not close for an upper sublevel");
        }
    }
}

}  // namespace ionlink
