#include "ionlink/sr88.hpp"

#include <cmath>

#include "ionlink/errors.hpp"

namespace ionlink {

namespace {

constexpr double kBohrMhzPerGauss = 1.3996245;

// Lande g factors of the five lowest fine-structure levels.
constexpr double kGS12 = 2.0;
constexpr double kGP12 = 2.0 / 3.0;
constexpr double kGP32 = 4.0 / 3.0;
constexpr double kGD32 = 4.0 / 5.0;
constexpr double kGD52 = 6.0 / 5.0;

Manifold make_manifold(const char* label, int two_j, double g, double b_gauss) {
    return Manifold{label, two_j, g * kBohrMhzPerGauss * b_gauss, 0.0};
}

}  // namespace

void Sr88Params::validate() const {
    if (b_gauss < 0.0) throw ConfigError("magnetic field must be nonnegative");
    if (tau_p12_ns <= 0.0 || tau_p32_ns <= 0.0) throw ConfigError("lifetimes must be positive");
    if (branch_p12_d32 <= 0.0 || branch_p12_d32 >= 1.0)
        throw ConfigError("P1/2 infrared branching must lie in (0, 1)");
    if (std::abs(branch_p32_s12 + branch_p32_d32 + branch_p32_d52 - 1.0) > 1e-9)
        throw ConfigError("P3/2 branching fractions must sum to one");
}

LevelSystem sr88_excitation_system(const Sr88Params& p) {
    p.validate();
    LevelSystem sys;
    sys.add_manifold(make_manifold("S12", 1, kGS12, p.b_gauss));
    sys.add_manifold(make_manifold("P12", 1, kGP12, p.b_gauss));
    sys.add_manifold(make_manifold("D32", 3, kGD32, p.b_gauss));
    const double gamma = 1e3 / p.tau_p12_ns;  // 1/us
    sys.add_dipole_channel("P12", "S12", gamma * (1.0 - p.branch_p12_d32), "422");
    sys.add_dipole_channel("P12", "D32", gamma * p.branch_p12_d32, "1092");
    return sys;
}

LevelSystem sr88_shelving_system(const Sr88Params& p) {
    p.validate();
    LevelSystem sys;
    sys.add_manifold(make_manifold("S12", 1, kGS12, p.b_gauss));
    sys.add_manifold(make_manifold("P12", 1, kGP12, p.b_gauss));
    sys.add_manifold(make_manifold("P32", 3, kGP32, p.b_gauss));
    sys.add_manifold(make_manifold("D32", 3, kGD32, p.b_gauss));
    sys.add_manifold(make_manifold("D52", 5, kGD52, p.b_gauss));
    const double g12 = 1e3 / p.tau_p12_ns;
    sys.add_dipole_channel("P12", "S12", g12 * (1.0 - p.branch_p12_d32), "422");
    sys.add_dipole_channel("P12", "D32", g12 * p.branch_p12_d32, "1092");
    const double g32 = 1e3 / p.tau_p32_ns;
    sys.add_dipole_channel("P32", "S12", g32 * p.branch_p32_s12, "408");
    sys.add_dipole_channel("P32", "D32", g32 * p.branch_p32_d32, "1004");
    sys.add_dipole_channel("P32", "D52", g32 * p.branch_p32_d52, "1033");
    return sys;
}

void ExcitationConfig::validate() const {
    atom.validate();
    if (pump_rabi_422_mhz < 0 || pump_rabi_1092_mhz < 0 || pulse_rabi_mhz < 0)
        throw ConfigError("Rabi frequencies must be nonnegative");
    if (pump_pol_error_422 < 0 || pump_pol_error_422 > 0.5 || pulse_pol_error < 0 ||
        pulse_pol_error > 0.5)
        throw ConfigError("polarization error fractions must lie in [0, 0.5]");
    if (pump_us <= 0) throw ConfigError("pump duration must be positive");
    if (pulse_rise_ns < 0 || pulse_hold_ns < 0 || pulse_fall_ns < 0)
        throw ConfigError("pulse segments must be nonnegative");
    if (grid_step_ns <= 0 || grid_max_ns <= pulse_rise_ns + pulse_hold_ns + pulse_fall_ns)
        throw ConfigError("output grid must cover the pulse and its decay tail");
}

nlohmann::json ExcitationConfig::to_json() const {
    return {
        {"atom",
         {{"b_gauss", atom.b_gauss},
          {"tau_p12_ns", atom.tau_p12_ns},
          {"branch_p12_d32", atom.branch_p12_d32},
          {"tau_p32_ns", atom.tau_p32_ns},
          {"branch_p32_s12", atom.branch_p32_s12},
          {"branch_p32_d32", atom.branch_p32_d32},
          {"branch_p32_d52", atom.branch_p32_d52}}},
        {"pump_rabi_422_mhz", pump_rabi_422_mhz},
        {"pump_rabi_1092_mhz", pump_rabi_1092_mhz},
        {"pump_pol_error_422", pump_pol_error_422},
        {"pump_us", pump_us},
        {"pulse_rabi_mhz", pulse_rabi_mhz},
        {"pulse_detuning_mhz", pulse_detuning_mhz},
        {"pulse_pol_error", pulse_pol_error},
        {"pulse_rise_ns", pulse_rise_ns},
        {"pulse_hold_ns", pulse_hold_ns},
        {"pulse_fall_ns", pulse_fall_ns},
        {"grid_step_ns", grid_step_ns},
        {"grid_max_ns", grid_max_ns},
    };
}

ExcitationConfig ExcitationConfig::from_json(const nlohmann::json& j) {
    ExcitationConfig c;
    if (j.contains("atom")) {
        const auto& a = j.at("atom");
        c.atom.b_gauss = a.value("b_gauss", c.atom.b_gauss);
        c.atom.tau_p12_ns = a.value("tau_p12_ns", c.atom.tau_p12_ns);
        c.atom.branch_p12_d32 = a.value("branch_p12_d32", c.atom.branch_p12_d32);
        c.atom.tau_p32_ns = a.value("tau_p32_ns", c.atom.tau_p32_ns);
        c.atom.branch_p32_s12 = a.value("branch_p32_s12", c.atom.branch_p32_s12);
        c.atom.branch_p32_d32 = a.value("branch_p32_d32", c.atom.branch_p32_d32);
        c.atom.branch_p32_d52 = a.value("branch_p32_d52", c.atom.branch_p32_d52);
    }
    c.pump_rabi_422_mhz = j.value("pump_rabi_422_mhz", c.pump_rabi_422_mhz);
    c.pump_rabi_1092_mhz = j.value("pump_rabi_1092_mhz", c.pump_rabi_1092_mhz);
    c.pump_pol_error_422 = j.value("pump_pol_error_422", c.pump_pol_error_422);
    c.pump_us = j.value("pump_us", c.pump_us);
    c.pulse_rabi_mhz = j.value("pulse_rabi_mhz", c.pulse_rabi_mhz);
    c.pulse_detuning_mhz = j.value("pulse_detuning_mhz", c.pulse_detuning_mhz);
    c.pulse_pol_error = j.value("pulse_pol_error", c.pulse_pol_error);
    c.pulse_rise_ns = j.value("pulse_rise_ns", c.pulse_rise_ns);
    c.pulse_hold_ns = j.value("pulse_hold_ns", c.pulse_hold_ns);
    c.pulse_fall_ns = j.value("pulse_fall_ns", c.pulse_fall_ns);
    c.grid_step_ns = j.value("grid_step_ns", c.grid_step_ns);
    c.grid_max_ns = j.value("grid_max_ns", c.grid_max_ns);
    c.validate();
    return c;
}

namespace {

Mat pump_stage(const LevelSystem& sys, const ExcitationConfig& cfg) {
    std::vector<LaserBeam> beams;
    LaserBeam pump;
    pump.channel = sys.find_channel("422");
    pump.rabi_mhz = cfg.pump_rabi_422_mhz;
    pump.f_sigma_plus = 1.0 - cfg.pump_pol_error_422;
    pump.f_pi = cfg.pump_pol_error_422;
    beams.push_back(pump);
    LaserBeam repump;
    repump.channel = sys.find_channel("1092");
    repump.rabi_mhz = cfg.pump_rabi_1092_mhz;
    repump.f_sigma_plus = repump.f_pi = repump.f_sigma_minus = 1.0 / 3.0;
    beams.push_back(repump);

    // Start from an even mix over the long-lived levels.
    const int d = sys.total_levels();
    Mat rho0 = Mat::Zero(d, d);
    const int s_off = sys.manifold_offset(sys.find_manifold("S12"));
    const int d_off = sys.manifold_offset(sys.find_manifold("D32"));
    for (int i = 0; i < 2; ++i) rho0(s_off + i, s_off + i) = 1.0 / 6.0;
    for (int i = 0; i < 4; ++i) rho0(d_off + i, d_off + i) = 1.0 / 6.0;

    auto run = propagate_constant(rho0, sys, beams, {0.0, cfg.pump_us});
    return run.rho.back();
}

}  // namespace

ExcitationResult run_excitation_pulse(const ExcitationConfig& cfg, const Mat& rho0) {
    cfg.validate();
    LevelSystem sys = sr88_excitation_system(cfg.atom);

    LaserBeam pulse;
    pulse.channel = sys.find_channel("422");
    pulse.rabi_mhz = cfg.pulse_rabi_mhz;
    pulse.detuning_mhz = cfg.pulse_detuning_mhz;
    pulse.f_sigma_minus = 1.0 - cfg.pulse_pol_error;
    pulse.f_pi = cfg.pulse_pol_error;
    pulse.envelope = Envelope{0.0, cfg.pulse_rise_ns * 1e-3, cfg.pulse_hold_ns * 1e-3,
                              cfg.pulse_fall_ns * 1e-3};

    // Integrate at half the output step so the stored grid matches exactly.
    auto run = evolve(rho0, sys, {pulse}, 0.0, cfg.grid_max_ns * 1e-3,
                      cfg.grid_step_ns * 0.5e-3, 2);
    auto pdf_result = emission_pdf(run, sys, "1092");

    ExcitationResult out;
    out.pdf = std::move(pdf_result.pdf);
    out.total_emission_prob = pdf_result.total_emission_prob;
    out.excitation_prob = pdf_result.excitation_prob;
    out.rho_pumped = rho0;
    out.pulse_run = std::move(run);
    return out;
}

ExcitationResult run_excitation(const ExcitationConfig& cfg) {
    cfg.validate();
    LevelSystem sys = sr88_excitation_system(cfg.atom);
    return run_excitation_pulse(cfg, pump_stage(sys, cfg));
}

std::vector<double> pump_pattern_curve(const PumpPatternConfig& cfg, double pol_error,
                                       const std::vector<double>& t_ns) {
    if (pol_error < 0.0 || pol_error > 0.5)
        throw ConfigError("polarization error fraction outside [0, 0.5]");
    LevelSystem sys = sr88_excitation_system(cfg.atom);

    LaserBeam probe;
    probe.channel = sys.find_channel("422");
    probe.rabi_mhz = cfg.rabi_mhz;
    probe.detuning_mhz = cfg.detuning_mhz;
    if (cfg.sigma_plus) {
        probe.f_sigma_plus = 1.0 - pol_error;
        probe.f_pi = pol_error;
    } else {
        probe.f_sigma_minus = 1.0 - pol_error;
        probe.f_pi = pol_error;
    }

    LaserBeam repump;
    repump.channel = sys.find_channel("1092");
    repump.rabi_mhz = cfg.repump_rabi_mhz;
    repump.f_sigma_plus = repump.f_pi = repump.f_sigma_minus = 1.0 / 3.0;

    const int d = sys.total_levels();
    Mat rho0 = Mat::Zero(d, d);
    const int s_off = sys.manifold_offset(sys.find_manifold("S12"));
    const int d_off = sys.manifold_offset(sys.find_manifold("D32"));
    for (int i = 0; i < 2; ++i) rho0(s_off + i, s_off + i) = 1.0 / 6.0;
    for (int i = 0; i < 4; ++i) rho0(d_off + i, d_off + i) = 1.0 / 6.0;
    auto pumped = propagate_constant(rho0, sys, {probe, repump}, {0.0, cfg.pump_us});

    // Same beam alone; arrivals stem from its polarization imperfection.
    std::vector<double> grid_us;
    grid_us.reserve(t_ns.size() + 1);
    if (t_ns.empty() || t_ns.front() > 0.0) grid_us.push_back(0.0);
    for (double t : t_ns) grid_us.push_back(t * 1e-3);
    auto run = propagate_constant(pumped.rho.back(), sys, {probe}, grid_us);

    const auto& ch = sys.channels()[sys.find_channel("1092")];
    const int p_off = sys.manifold_offset(ch.upper_manifold);
    std::vector<double> density;
    density.reserve(t_ns.size());
    const std::size_t skip = grid_us.size() - t_ns.size();
    for (std::size_t i = skip; i < run.t_us.size(); ++i)
        density.push_back(ch.rate_per_us *
                          (run.population(i, p_off) + run.population(i, p_off + 1)));
    double total = 0.0;
    for (double v : density) total += v;
    if (total <= 1e-30) return std::vector<double>(t_ns.size(), 0.0);
    for (double& v : density) v /= total;
    return density;
}

}  // namespace ionlink
