#include "ionlink/scenario.hpp"

#include <cmath>
#include <fstream>

#include "ionlink/errors.hpp"

namespace ionlink {

Scenario Scenario::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("scenario JSON parse error: ") + e.what());
    }
    return from_json(j);
}

Scenario Scenario::from_json(const nlohmann::json& j) {
    Scenario s;
    try {
        s.name = j.value("name", "");
        if (j.contains("seed")) {
            s.seed = j.at("seed").get<std::uint64_t>();
            s.has_seed = true;
        }
        s.shots_per_setting = j.value("shots_per_setting", std::int64_t{10000});
        if (j.contains("source")) s.p_leak = j.at("source").value("p_leak", 0.0);
        if (j.contains("dephasing")) {
            s.t2_ms = j.at("dephasing").value("t2_ms", s.t2_ms);
            s.wait_us = j.at("dephasing").value("wait_us", s.wait_us);
        }
        if (j.contains("photon_noise")) {
            const auto& p = j.at("photon_noise");
            s.pol_mixing_depol = p.value("pol_mixing_depol", 0.0);
            s.photon_path_depol = p.value("photon_path_depol", 0.0);
            s.residual_rotation_rad = p.value("residual_rotation_rad", 0.0);
        }
        s.pi2_depol = j.value("pi2_depol", 0.0);
        if (j.contains("readout")) s.readout = ReadoutErrors::from_json(j.at("readout"));
        if (j.contains("fiber")) {
            const auto& f = j.at("fiber");
            s.fiber.length_km = f.value("length_km", 0.0);
            s.fiber.attenuation_db_per_km = f.value("attenuation_db_per_km", 0.0);
            s.fiber.extra_loss = f.value("extra_loss", 1.0);
            s.fiber.depolarization = f.value("depolarization", 0.0);
            s.fiber.group_index = f.value("group_index", s.fiber.group_index);
            s.fiber.drift.rate_rad_per_s = f.value("drift_rad_per_s", 0.0);
        }
        if (j.contains("detector")) {
            const auto& d = j.at("detector");
            s.detector.efficiency = d.value("efficiency", 1.0);
            s.detector.dark_rate_hz = d.value("dark_rate_hz", 0.0);
            s.detector.window_start_ns = d.value("window_start_ns", 0.0);
            s.detector.window_end_ns = d.value("window_end_ns", 0.0);
        }
        if (j.contains("timing")) s.timing = TimingBudget::from_json(j.at("timing"));
        if (j.contains("rate")) {
            const auto& r = j.at("rate");
            s.factors.p_p = r.value("p_p", 0.0);
            s.factors.p_c = r.value("p_c", 0.0);
            s.factors.p_q = r.value("p_q", 0.0);
            s.factors.p_w = r.value("p_w", 0.0);
            s.p_ent_measured = r.value("p_ent_measured", 0.0);
        }
        if (j.contains("qubit_splitting_mhz") && !j.at("qubit_splitting_mhz").is_null())
            s.qubit_splitting_mhz = j.at("qubit_splitting_mhz").get<double>();
        if (j.contains("toggles")) {
            const auto& t = j.at("toggles");
            s.toggles.dephasing_wait = t.value("dephasing_wait", true);
            s.toggles.dephasing_travel = t.value("dephasing_travel", true);
            s.toggles.pol_mixing = t.value("pol_mixing", true);
            s.toggles.photon_path = t.value("photon_path", true);
            s.toggles.pi2_error = t.value("pi2_error", true);
            s.toggles.residual_rotation = t.value("residual_rotation", true);
            s.toggles.readout = t.value("readout", true);
        }
        if (j.contains("excitation")) s.excitation = ExcitationConfig::from_json(j.at("excitation"));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("scenario JSON field error: ") + e.what());
    }
    return s;
}

nlohmann::json Scenario::to_json() const {
    nlohmann::json j{
        {"name", name},
        {"shots_per_setting", shots_per_setting},
        {"source", {{"p_leak", p_leak}}},
        {"dephasing", {{"t2_ms", t2_ms}, {"wait_us", wait_us}}},
        {"photon_noise",
         {{"pol_mixing_depol", pol_mixing_depol},
          {"photon_path_depol", photon_path_depol},
          {"residual_rotation_rad", residual_rotation_rad}}},
        {"pi2_depol", pi2_depol},
        {"readout", readout.to_json()},
        {"fiber",
         {{"length_km", fiber.length_km},
          {"attenuation_db_per_km", fiber.attenuation_db_per_km},
          {"extra_loss", fiber.extra_loss},
          {"depolarization", fiber.depolarization},
          {"group_index", fiber.group_index},
          {"drift_rad_per_s", fiber.drift.rate_rad_per_s}}},
        {"detector",
         {{"efficiency", detector.efficiency},
          {"dark_rate_hz", detector.dark_rate_hz},
          {"window_start_ns", detector.window_start_ns},
          {"window_end_ns", detector.window_end_ns}}},
        {"timing", timing.to_json()},
        {"rate",
         {{"p_p", factors.p_p},
          {"p_c", factors.p_c},
          {"p_q", factors.p_q},
          {"p_w", factors.p_w},
          {"p_ent_measured", p_ent_measured}}},
        {"excitation", excitation.to_json()},
    };
    if (has_seed) j["seed"] = seed;
    if (qubit_splitting_mhz) j["qubit_splitting_mhz"] = *qubit_splitting_mhz;
    j["toggles"] = {{"dephasing_wait", toggles.dephasing_wait},
                    {"dephasing_travel", toggles.dephasing_travel},
                    {"pol_mixing", toggles.pol_mixing},
                    {"photon_path", toggles.photon_path},
                    {"pi2_error", toggles.pi2_error},
                    {"residual_rotation", toggles.residual_rotation},
                    {"readout", toggles.readout}};
    return j;
}

std::vector<std::string> Scenario::violations() const {
    std::vector<std::string> out;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) out.push_back(msg);
    };
    check(p_leak >= 0.0 && p_leak <= 1.0, "source.p_leak outside [0, 1]");
    check(t2_ms > 0.0, "dephasing.t2_ms must be positive");
    check(wait_us >= 0.0, "dephasing.wait_us must be nonnegative");
    check(pol_mixing_depol >= 0.0 && pol_mixing_depol <= 1.0,
          "photon_noise.pol_mixing_depol outside [0, 1]");
    check(photon_path_depol >= 0.0 && photon_path_depol <= 1.0,
          "photon_noise.photon_path_depol outside [0, 1]");
    check(pi2_depol >= 0.0 && pi2_depol <= 1.0, "pi2_depol outside [0, 1]");
    check(shots_per_setting > 0, "shots_per_setting must be positive");
    check(has_seed, "seed is required for stochastic commands");
    check(p_ent_measured >= 0.0 && p_ent_measured <= 1.0, "rate.p_ent_measured outside [0, 1]");
    try {
        readout.validate();
    } catch (const std::exception& e) {
        out.push_back(std::string("readout: ") + e.what());
    }
    try {
        fiber.validate();
    } catch (const std::exception& e) {
        out.push_back(std::string("fiber: ") + e.what());
    }
    try {
        detector.validate();
    } catch (const std::exception& e) {
        out.push_back(std::string("detector: ") + e.what());
    }
    try {
        timing.validate();
    } catch (const std::exception& e) {
        out.push_back(std::string("timing: ") + e.what());
    }
    try {
        factors.validate();
    } catch (const std::exception& e) {
        out.push_back(std::string("rate factors: ") + e.what());
    }
    try {
        excitation.validate();
    } catch (const std::exception& e) {
        out.push_back(std::string("excitation: ") + e.what());
    }
    // Photon travel time and fiber length must tell the same story for
    // kilometer-scale links.
    if (fiber.length_km > 1.0) {
        const double latency = fiber_latency_us(fiber.length_km, fiber.group_index);
        check(std::abs(latency - timing.travel_us) < 0.05,
              "timing.travel_us inconsistent with fiber latency");
    }
    return out;
}

void Scenario::require_valid() const {
    auto v = violations();
    if (!v.empty()) throw ConfigError("invalid scenario: " + v.front());
}

void Scenario::require_seed() const {
    if (!has_seed) throw ConfigError("scenario has no seed; stochastic commands require one");
}

double Scenario::total_wait_us() const {
    double w = 0.0;
    if (toggles.dephasing_wait) w += wait_us;
    if (toggles.dephasing_travel) w += timing.travel_us;
    return w;
}

double Scenario::dephasing_gamma() const {
    return std::exp(-total_wait_us() / (t2_ms * 1e3));
}

}  // namespace ionlink
