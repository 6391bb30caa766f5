#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ionlink/fiber.hpp"
#include "ionlink/rate.hpp"
#include "ionlink/readout.hpp"
#include "ionlink/sr88.hpp"

namespace ionlink {

// Independent noise mechanisms of the link pipeline. Each can be disabled to
// isolate its fidelity cost.
struct NoiseToggles {
    bool dephasing_wait = true;
    bool dephasing_travel = true;
    bool pol_mixing = true;
    bool photon_path = true;
    bool pi2_error = true;
    bool residual_rotation = true;
    bool readout = true;
};

struct Scenario {
    std::string name;

    // source
    double p_leak = 0.0;

    // ion-qubit dephasing: coherence time plus the effective wait between
    // herald and ion rotation (photon travel time is added on top)
    double t2_ms = 1.36;
    double wait_us = 0.0;

    // photon-space noise
    double pol_mixing_depol = 0.0;
    double photon_path_depol = 0.0;
    double residual_rotation_rad = 0.0;  // uncompensated rotation, about sigma_y

    // ion pi/2-pulse error, as a depolarizing probability on X/Y settings
    double pi2_depol = 0.0;

    ReadoutErrors readout;
    FiberModel fiber;
    DetectorModel detector;
    TimingBudget timing;
    RateFactors factors;     // p_w left as 0 here; windows supply it
    double p_ent_measured = 0.0;

    std::optional<double> qubit_splitting_mhz;
    std::int64_t shots_per_setting = 10000;
    std::uint64_t seed = 0;
    bool has_seed = false;

    NoiseToggles toggles;
    ExcitationConfig excitation;

    static Scenario load(const std::string& path);
    static Scenario from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    // All violations found, empty when the scenario is usable.
    std::vector<std::string> violations() const;
    void require_valid() const;
    void require_seed() const;

    double total_wait_us() const;
    double dephasing_gamma() const;
};

}  // namespace ionlink
