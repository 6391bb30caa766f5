// Command-line front end: scenario validation, tomography runs, rate
// calculations, emission/shelving simulations and polarization-error fits.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ionlink/errors.hpp"
#include "ionlink/rate.hpp"
#include "ionlink/scenario.hpp"
#include "ionlink/shelving.hpp"
#include "ionlink/tomography.hpp"

namespace {

using namespace ionlink;

int thread_count() {
    const char* env = std::getenv("IONLINK_THREADS");
    if (env == nullptr) return 1;
    const int n = std::atoi(env);
    return n >= 1 ? n : 1;
}

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    if (out.empty()) throw ConfigError("empty numeric list");
    return out;
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("JSON parse error in ") + path + ": " + e.what());
    }
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("failed writing " + path);
}

int cmd_validate(const std::string& path) {
    const Scenario sc = Scenario::load(path);
    const auto violations = sc.violations();
    if (violations.empty()) {
        std::cout << "scenario " << (sc.name.empty() ? path : sc.name) << ": no violations\n";
        return 0;
    }
    std::cout << "scenario " << (sc.name.empty() ? path : sc.name) << ": "
              << violations.size() << " violation(s)\n";
    for (const auto& v : violations) std::cout << "  - " << v << "\n";
    return 1;
}

int cmd_tomography(const std::string& path, std::int64_t shots, const std::string& out_dir,
                   const std::string& correction, std::uint64_t seed_override, bool has_seed_flag,
                   int bootstrap_resamples) {
    Scenario sc = Scenario::load(path);
    if (has_seed_flag) {
        sc.seed = seed_override;
        sc.has_seed = true;
    }
    sc.require_valid();
    sc.require_seed();
    if (shots <= 0) throw ConfigError("--shots must be positive");

    MleOptions opts;
    if (correction == "none") opts.correction = ReadoutCorrection::none;
    else if (correction == "counts") opts.correction = ReadoutCorrection::counts;
    else if (correction == "likelihood") opts.correction = ReadoutCorrection::likelihood;
    else throw ConfigError("--correct must be none, counts or likelihood");

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir);

    const int threads = thread_count();
    const auto dataset = simulate_dataset(sc, shots, sc.seed, threads);
    auto init = psd_project(linear_inversion(dataset));
    auto result = mle_reconstruct(dataset, init, opts);
    if (bootstrap_resamples > 0) {
        auto errs = bootstrap(dataset, bootstrap_resamples, sc.seed, opts, threads);
        result.stderr_fidelity = errs.first;
        result.stderr_purity = errs.second;
    }

    write_text(out_dir + "/dataset.json", dataset.to_json().dump(2) + "\n");
    write_text(out_dir + "/result.json", result.to_json().dump(2) + "\n");

    std::cout << "settings: 9, shots/setting: " << shots << "\n";
    std::cout << "fidelity: " << fmt("%.4f", result.fidelity_value)
              << "  purity: " << fmt("%.4f", result.purity_value)
              << "  bound: " << fmt("%.4f", result.f_max_bound) << "\n";
    if (bootstrap_resamples > 0)
        std::cout << "stderr(fidelity): " << fmt("%.4f", result.stderr_fidelity)
                  << "  stderr(purity): " << fmt("%.4f", result.stderr_purity) << "\n";
    if (!result.converged) throw ConvergenceError("likelihood maximization hit iteration cap");
    return 0;
}

int cmd_rate(const std::string& path, double mc_seconds) {
    Scenario sc = Scenario::load(path);
    sc.require_valid();
    const double attempts = attempt_rate_hz(sc.timing);
    const double rate =
        entanglement_rate_hz(attempts, sc.p_ent_measured, sc.timing.leakage_fraction);
    std::cout << "attempt rate: " << std::llround(attempts) << "/s\n";
    std::cout << "entanglement rate (analytic): " << fmt("%.1f", rate) << "/s\n";
    if (mc_seconds > 0.0) {
        sc.require_seed();
        auto rng = RandomStream::derive(sc.seed, {0x4Cu});
        const auto mc = monte_carlo_rate(sc.timing, sc.p_ent_measured, 0.0, mc_seconds, rng);
        std::cout << "entanglement rate (monte-carlo " << fmt("%.0f", mc_seconds)
                  << " s): " << fmt("%.1f", mc.rate_hz) << " +- " << fmt("%.1f", mc.stderr_hz)
                  << "/s over " << mc.successes << " events\n";
    }
    return 0;
}

int cmd_obe_excitation(const std::string& config_path, const std::string& out_csv,
                       const std::string& trajectory_csv) {
    const auto cfg = ExcitationConfig::from_json(load_json(config_path));
    const auto result = run_excitation(cfg);
    std::ostringstream csv;
    result.pdf.write_csv(csv);
    if (!out_csv.empty()) write_text(out_csv, csv.str());
    if (!trajectory_csv.empty()) {
        std::ostringstream traj;
        result.pulse_run.write_csv(traj);
        write_text(trajectory_csv, traj.str());
    }
    std::cout << "emission probability: " << fmt("%.6f", result.total_emission_prob) << "\n";
    std::cout << "expected decays: " << fmt("%.6f", result.excitation_prob) << "\n";
    for (double w : {3.0, 20.0}) {
        double best_cap = 0.0, best_start = 0.0;
        for (double start = result.pdf.t_ns.front();
             start + w <= result.pdf.t_ns.back() + 1e-9; start += result.pdf.step_ns()) {
            const double cap = result.pdf.integral_total(start, start + w);
            if (cap > best_cap) {
                best_cap = cap;
                best_start = start;
            }
        }
        const double s = window_success_S(result.pdf, best_start, best_start + w);
        std::cout << "window " << fmt("%.0f", w) << " ns: capture " << fmt("%.4f", best_cap)
                  << ", branch error " << fmt("%.4f", 1.0 - s) << "\n";
    }
    return 0;
}

int cmd_obe_shelving(const std::string& config_path, const std::string& detunings_csv,
                     double pol_error, const std::string& out_csv) {
    const auto cfg = ShelvingConfig::from_json(load_json(config_path));
    const auto detunings = parse_list(detunings_csv);
    std::ostringstream csv;
    csv << "detuning_mhz,optimal_time_us,contrast\n";
    for (double det : detunings) {
        const double t_opt = optimize_shelve_time(cfg, det, pol_error);
        const double c = shelving_contrast_at_optimum(cfg, det, pol_error);
        char buf[128];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", det, t_opt, c);
        csv << buf;
        std::cout << "detuning " << fmt("%+.2f", det) << " MHz: t_opt " << fmt("%.2f", t_opt)
                  << " us, contrast " << fmt("%.5f", c) << "\n";
    }
    if (!out_csv.empty()) write_text(out_csv, csv.str());
    return 0;
}

int cmd_fit_polarization(const std::string& data_csv, const std::string& config_path) {
    std::ifstream in(data_csv);
    if (!in) throw IoError("cannot open " + data_csv);
    std::vector<ScanPoint> scan;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
            throw ConfigError("scan CSV rows need two columns");
        scan.push_back(ScanPoint{std::stod(a), std::stod(b)});
    }

    const auto j = load_json(config_path);
    const std::string model_name = j.value("model", "shelving-contrast");
    std::unique_ptr<ScanModel> model;
    if (model_name == "shelving-contrast") {
        model = std::make_unique<ShelvingContrastModel>(
            ShelvingConfig::from_json(j.value("shelving", nlohmann::json::object())));
    } else if (model_name == "pump-pattern") {
        PumpPatternConfig cfg;
        const auto p = j.value("pump_pattern", nlohmann::json::object());
        cfg.rabi_mhz = p.value("rabi_mhz", cfg.rabi_mhz);
        cfg.repump_rabi_mhz = p.value("repump_rabi_mhz", cfg.repump_rabi_mhz);
        cfg.detuning_mhz = p.value("detuning_mhz", cfg.detuning_mhz);
        cfg.pump_us = p.value("pump_us", cfg.pump_us);
        cfg.sigma_plus = p.value("sigma_plus", cfg.sigma_plus);
        model = std::make_unique<PumpPatternModel>(cfg);
    } else {
        throw ConfigError("model must be shelving-contrast or pump-pattern");
    }

    const auto fit = fit_polarization_error(scan, *model, j.value("eps_init", 5e-3));
    std::cout << "polarization error: " << fmt("%.6f", fit.epsilon) << " +- "
              << fmt("%.6f", fit.std_error) << "  (rss " << fmt("%.3e", fit.rss) << ", "
              << fit.iterations << " iterations)\n";
    return 0;
}

int cmd_sweep_window(const std::string& path, const std::string& windows_csv,
                     const std::string& out_csv) {
    Scenario sc = Scenario::load(path);
    sc.require_valid();
    const auto windows = parse_list(windows_csv);
    const auto exc = run_excitation(sc.excitation);
    const double splitting = sc.qubit_splitting_mhz.value_or(0.0);
    const auto rows = window_tradeoff(exc.pdf, splitting, sc.timing, sc.factors.p_p,
                                      sc.factors.p_c, sc.factors.p_q, windows);
    std::ostringstream csv;
    write_window_table_csv(csv, rows);
    if (!out_csv.empty()) write_text(out_csv, csv.str());
    std::cout << csv.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"heralded ion-photon link simulator"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = ".", correction = "none";
    std::int64_t shots = 0;
    std::uint64_t seed_override = 0;
    int bootstrap_n = 0;
    auto* tomo = app.add_subcommand("tomography", "simulate a dataset and reconstruct the state");
    tomo->add_option("scenario", scenario_path)->required();
    auto* shots_opt = tomo->add_option("--shots", shots, "heralds per setting");
    auto* seed_opt = tomo->add_option("--seed", seed_override, "override the scenario seed");
    tomo->add_option("--out", out_dir, "output directory");
    tomo->add_option("--correct", correction, "readout correction: none|counts|likelihood");
    tomo->add_option("--bootstrap", bootstrap_n, "bootstrap resamples for error bars");

    std::string rate_path;
    double mc_seconds = 0.0;
    auto* rate_cmd = app.add_subcommand("rate", "analytic and Monte Carlo entanglement rates");
    rate_cmd->add_option("scenario", rate_path)->required();
    rate_cmd->add_option("--mc", mc_seconds, "simulated wall-clock seconds");

    auto* obe = app.add_subcommand("obe", "master-equation simulations");
    obe->require_subcommand(1);
    std::string exc_config, exc_out, exc_traj;
    auto* exc_cmd = obe->add_subcommand("excitation", "emission-time density of the pulse");
    exc_cmd->add_option("config", exc_config)->required();
    exc_cmd->add_option("--out", exc_out, "pdf CSV path");
    exc_cmd->add_option("--trajectory", exc_traj, "level-population trajectory CSV path");
    std::string shelve_config, detunings, shelve_out;
    double shelve_pol_error = 0.0;
    auto* shelve_cmd = obe->add_subcommand("shelving-scan", "contrast versus detuning");
    shelve_cmd->add_option("config", shelve_config)->required();
    shelve_cmd->add_option("--detunings", detunings, "comma-separated MHz list")->required();
    shelve_cmd->add_option("--pol-error", shelve_pol_error, "planted polarization error");
    shelve_cmd->add_option("--out", shelve_out, "scan CSV path");

    std::string fit_data, fit_config;
    auto* fit_cmd = app.add_subcommand("fit-polarization", "fit a scan for the polarization error");
    fit_cmd->add_option("data", fit_data)->required();
    fit_cmd->add_option("config", fit_config)->required();

    std::string sweep_path, sweep_windows, sweep_out;
    auto* sweep_cmd = app.add_subcommand("sweep-window", "window-length tradeoff table");
    sweep_cmd->add_option("scenario", sweep_path)->required();
    sweep_cmd->add_option("--windows", sweep_windows, "comma-separated ns list")->required();
    sweep_cmd->add_option("--out", sweep_out, "table CSV path");

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "schema and invariant report");
    validate_cmd->add_option("scenario", validate_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (tomo->parsed()) {
            Scenario sc = Scenario::load(scenario_path);
            const std::int64_t n = shots_opt->count() > 0 ? shots : sc.shots_per_setting;
            return cmd_tomography(scenario_path, n, out_dir, correction, seed_override,
                                  seed_opt->count() > 0, bootstrap_n);
        }
        if (rate_cmd->parsed()) return cmd_rate(rate_path, mc_seconds);
        if (exc_cmd->parsed()) return cmd_obe_excitation(exc_config, exc_out, exc_traj);
        if (shelve_cmd->parsed())
            return cmd_obe_shelving(shelve_config, detunings, shelve_pol_error, shelve_out);
        if (fit_cmd->parsed()) return cmd_fit_polarization(fit_data, fit_config);
        if (sweep_cmd->parsed()) return cmd_sweep_window(sweep_path, sweep_windows, sweep_out);
        if (validate_cmd->parsed()) return cmd_validate(validate_path);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
