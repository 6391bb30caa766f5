#pragma once

#include "ionlink/lindblad.hpp"

#include "json.hpp"

namespace ionlink {

// Atomic defaults for the Sr+ level structure. Lifetimes and branching
// fractions are literature-scale values; Rabi frequencies, detunings and the
// field are apparatus settings and carry no authority beyond "plausible".
struct Sr88Params {
    double b_gauss = 5.0;
    double tau_p12_ns = 7.9;
    double branch_p12_d32 = 0.056;  // infrared decay branch of P1/2
    double tau_p32_ns = 6.55;
    double branch_p32_s12 = 0.9239;
    double branch_p32_d32 = 0.0066;
    double branch_p32_d52 = 0.0695;

    void validate() const;
};

// S1/2, P1/2, D3/2 space for optical pumping and the excitation pulse.
LevelSystem sr88_excitation_system(const Sr88Params& p);

// Full 18-level space adding P3/2 and D5/2 for the shelving sequence.
// Metastable D-level radiative decay is slow enough to be handled outside
// the integrator and is not included here.
LevelSystem sr88_shelving_system(const Sr88Params& p);

struct ExcitationConfig {
    Sr88Params atom;
    // optical pumping stage (sigma+ beam plus repump, constant drives)
    double pump_rabi_422_mhz = 10.0;
    double pump_rabi_1092_mhz = 8.0;
    double pump_pol_error_422 = 0.016;  // off-polarization intensity fraction
    double pump_us = 3.0;
    // excitation pulse (sigma- beam, shaped by the modulator rise time)
    double pulse_rabi_mhz = 60.0;
    double pulse_detuning_mhz = 0.0;
    double pulse_pol_error = 0.0088;
    double pulse_rise_ns = 6.0;
    double pulse_hold_ns = 6.0;
    double pulse_fall_ns = 6.0;
    // output grid
    double grid_step_ns = 0.05;
    double grid_max_ns = 60.0;

    void validate() const;
    nlohmann::json to_json() const;
    static ExcitationConfig from_json(const nlohmann::json& j);
};

struct ExcitationResult {
    EmissionTimePDF pdf;
    double total_emission_prob = 0.0;
    double excitation_prob = 0.0;
    Mat rho_pumped;
    LindbladRun pulse_run;
};

// Pump, pulse, and collect the emission-time density of the infrared channel.
ExcitationResult run_excitation(const ExcitationConfig& cfg);

// Pulse stage alone, from a caller-supplied initial state.
ExcitationResult run_excitation_pulse(const ExcitationConfig& cfg, const Mat& rho0);

// Calibration curve for one pump beam: prepare with the beam plus repump,
// then drive with the beam alone and record the normalized infrared arrival
// density at the requested times. Sensitive to the beam's polarization error.
struct PumpPatternConfig {
    Sr88Params atom;
    double rabi_mhz = 10.0;
    double repump_rabi_mhz = 8.0;
    double detuning_mhz = 0.0;
    double pump_us = 3.0;
    bool sigma_plus = true;  // false characterizes the sigma- beam
};

std::vector<double> pump_pattern_curve(const PumpPatternConfig& cfg, double pol_error,
                                       const std::vector<double>& t_ns);

}  // namespace ionlink
