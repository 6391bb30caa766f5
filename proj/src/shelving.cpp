#include "ionlink/shelving.hpp"

#include <algorithm>
#include <cmath>

#include "ionlink/errors.hpp"
#include "ionlink/optimize.hpp"

namespace ionlink {

void ShelvingConfig::validate() const {
    atom.validate();
    if (rabi_408_mhz < 0 || rabi_1004_mhz < 0) throw ConfigError("Rabi frequencies must be nonnegative");
    if (pol_error_408 < 0 || pol_error_408 > 0.5)
        throw ConfigError("polarization error fraction outside [0, 0.5]");
    if (grid_step_us <= 0 || grid_max_us <= grid_step_us)
        throw ConfigError("bad shelving time grid");
    if (detection_ms < 0 || tau_d52_ms <= 0) throw ConfigError("bad detection correction");
}

nlohmann::json ShelvingConfig::to_json() const {
    return {
        {"atom",
         {{"b_gauss", atom.b_gauss},
          {"tau_p12_ns", atom.tau_p12_ns},
          {"branch_p12_d32", atom.branch_p12_d32},
          {"tau_p32_ns", atom.tau_p32_ns},
          {"branch_p32_s12", atom.branch_p32_s12},
          {"branch_p32_d32", atom.branch_p32_d32},
          {"branch_p32_d52", atom.branch_p32_d52}}},
        {"rabi_408_mhz", rabi_408_mhz},
        {"rabi_1004_mhz", rabi_1004_mhz},
        {"detuning_408_mhz", detuning_408_mhz},
        {"pol_error_408", pol_error_408},
        {"grid_max_us", grid_max_us},
        {"grid_step_us", grid_step_us},
        {"detection_ms", detection_ms},
        {"tau_d52_ms", tau_d52_ms},
    };
}

ShelvingConfig ShelvingConfig::from_json(const nlohmann::json& j) {
    ShelvingConfig c;
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
    c.rabi_408_mhz = j.value("rabi_408_mhz", c.rabi_408_mhz);
    c.rabi_1004_mhz = j.value("rabi_1004_mhz", c.rabi_1004_mhz);
    c.detuning_408_mhz = j.value("detuning_408_mhz", c.detuning_408_mhz);
    c.pol_error_408 = j.value("pol_error_408", c.pol_error_408);
    c.grid_max_us = j.value("grid_max_us", c.grid_max_us);
    c.grid_step_us = j.value("grid_step_us", c.grid_step_us);
    c.detection_ms = j.value("detection_ms", c.detection_ms);
    c.tau_d52_ms = j.value("tau_d52_ms", c.tau_d52_ms);
    c.validate();
    return c;
}

namespace {

std::vector<LaserBeam> shelving_beams(const LevelSystem& sys, const ShelvingConfig& cfg,
                                      double detuning_1004, double pol_error_1004) {
    LaserBeam b408;
    b408.channel = sys.find_channel("408");
    b408.rabi_mhz = cfg.rabi_408_mhz;
    b408.detuning_mhz = cfg.detuning_408_mhz;
    b408.f_sigma_plus = 1.0 - cfg.pol_error_408;
    b408.f_pi = cfg.pol_error_408;
    LaserBeam b1004;
    b1004.channel = sys.find_channel("1004");
    b1004.rabi_mhz = cfg.rabi_1004_mhz;
    b1004.detuning_mhz = detuning_1004;
    b1004.f_sigma_minus = 1.0 - pol_error_1004;
    b1004.f_pi = pol_error_1004;
    return {b408, b1004};
}

Mat initial_qubit_state(const LevelSystem& sys, bool initial_one) {
    const int d = sys.total_levels();
    Mat rho = Mat::Zero(d, d);
    const int d32 = sys.find_manifold("D32");
    // sublevel 0 is m=-3/2 (qubit |0>), sublevel 2 is m=+1/2 (qubit |1>)
    const int idx = sys.level_index(d32, initial_one ? 2 : 0);
    rho(idx, idx) = 1.0;
    return rho;
}

double bright_probability(const LindbladRun& run, std::size_t t_index, const LevelSystem& sys,
                          const ShelvingConfig& cfg) {
    const int d52 = sys.find_manifold("D52");
    const int off = sys.manifold_offset(d52);
    double shelved = 0.0;
    for (int s = 0; s < sys.manifolds()[d52].sublevels(); ++s)
        shelved += run.population(t_index, off + s);
    // Shelved population that decays during fluorescence detection shows up
    // as a bright read.
    const double survive = std::exp(-cfg.detection_ms / cfg.tau_d52_ms);
    return 1.0 - shelved * survive;
}

}  // namespace

ShelveTimeScan shelve_time_scan(const ShelvingConfig& cfg, double detuning_1004_mhz,
                                double pol_error_1004) {
    cfg.validate();
    if (pol_error_1004 < 0 || pol_error_1004 > 0.5)
        throw ConfigError("polarization error fraction outside [0, 0.5]");
    LevelSystem sys = sr88_shelving_system(cfg.atom);
    auto beams = shelving_beams(sys, cfg, detuning_1004_mhz, pol_error_1004);

    ShelveTimeScan scan;
    for (double t = 0.0; t <= cfg.grid_max_us + 1e-12; t += cfg.grid_step_us)
        scan.t_us.push_back(t);
    for (bool one : {false, true}) {
        auto run = propagate_constant(initial_qubit_state(sys, one), sys, beams, scan.t_us);
        auto& dest = one ? scan.p_bright_one : scan.p_bright_zero;
        dest.resize(scan.t_us.size());
        for (std::size_t i = 0; i < scan.t_us.size(); ++i)
            dest[i] = bright_probability(run, i, sys, cfg);
    }
    return scan;
}

double shelving_outcome(const ShelvingConfig& cfg, double detuning_1004_mhz,
                        double pol_error_1004, double shelve_time_us, bool initial_one) {
    cfg.validate();
    if (pol_error_1004 < 0 || pol_error_1004 > 0.5)
        throw ConfigError("polarization error fraction outside [0, 0.5]");
    if (shelve_time_us < 0) throw ConfigError("negative shelving time");
    LevelSystem sys = sr88_shelving_system(cfg.atom);
    auto beams = shelving_beams(sys, cfg, detuning_1004_mhz, pol_error_1004);
    if (shelve_time_us == 0.0) return 1.0;
    auto run = propagate_constant(initial_qubit_state(sys, initial_one), sys, beams,
                                  {0.0, shelve_time_us});
    return bright_probability(run, run.t_us.size() - 1, sys, cfg);
}

double optimize_shelve_time(const ShelvingConfig& cfg, double detuning_1004_mhz,
                            double pol_error_1004) {
    auto scan = shelve_time_scan(cfg, detuning_1004_mhz, pol_error_1004);
    std::size_t best = 0;
    for (std::size_t i = 1; i < scan.t_us.size(); ++i)
        if (scan.contrast(i) > scan.contrast(best)) best = i;
    return scan.t_us[best];
}

double shelving_contrast_at_optimum(const ShelvingConfig& cfg, double detuning_1004_mhz,
                                    double pol_error_1004) {
    auto scan = shelve_time_scan(cfg, detuning_1004_mhz, pol_error_1004);
    double best = scan.contrast(0);
    for (std::size_t i = 1; i < scan.t_us.size(); ++i) best = std::max(best, scan.contrast(i));
    return best;
}

std::vector<double> ShelvingContrastModel::predict(double pol_error,
                                                   const std::vector<double>& xs) const {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double detuning : xs)
        out.push_back(shelving_contrast_at_optimum(cfg_, detuning, pol_error));
    return out;
}

std::vector<double> PumpPatternModel::predict(double pol_error,
                                              const std::vector<double>& xs) const {
    return pump_pattern_curve(cfg_, pol_error, xs);
}

PolarizationFit fit_polarization_error(const std::vector<ScanPoint>& scan, const ScanModel& model,
                                       double eps_init, int max_iter) {
    if (scan.size() < 5) throw ConfigError("need at least five scan points to fit");
    std::vector<double> xs, ys;
    for (const auto& p : scan) {
        xs.push_back(p.x);
        ys.push_back(p.y);
    }
    auto rss_of = [&](double eps) {
        if (eps < 0.0 || eps > 0.5) return 1e9 * (1.0 + std::abs(eps));
        const auto pred = model.predict(eps, xs);
        double rss = 0.0;
        for (std::size_t i = 0; i < ys.size(); ++i) {
            const double r = pred[i] - ys[i];
            rss += r * r;
        }
        return rss;
    };

    auto nm = nelder_mead([&](const std::vector<double>& v) { return rss_of(v[0]); }, {eps_init},
                          std::max(eps_init * 0.5, 1e-4), 1e-7, 1e-14, max_iter);
    if (!nm.converged)
        throw ConvergenceError("polarization-error fit did not converge");

    PolarizationFit fit;
    fit.epsilon = std::max(0.0, nm.x[0]);
    fit.rss = nm.value;
    fit.iterations = nm.iterations;
    fit.converged = nm.converged;

    // Curvature-based standard error: chi''(eps) from a symmetric second
    // difference, residual variance from the fit itself.
    const double h = std::max(2e-4, 0.05 * fit.epsilon);
    const double lo = rss_of(std::max(0.0, fit.epsilon - h));
    const double hi = rss_of(fit.epsilon + h);
    const double curvature = (hi + lo - 2.0 * fit.rss) / (h * h);
    const double sigma2 = fit.rss / static_cast<double>(scan.size() > 1 ? scan.size() - 1 : 1);
    fit.std_error = curvature > 0.0 ? std::sqrt(std::max(0.0, 2.0 * sigma2 / curvature)) : 0.0;
    return fit;
}

}  // namespace ionlink
