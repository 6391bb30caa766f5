#pragma once

#include <memory>

#include "ionlink/sr88.hpp"

namespace ionlink {

// Shelving stage: a sigma+ beam on the S-P3/2 line and a sigma- beam on the
// D3/2-P3/2 line pump everything except |D3/2, m=-3/2> into D5/2. The dark
// qubit state |1> = |D3/2, m=+1/2> reads dark afterwards; |0> = |D3/2, -3/2>
// stays bright. Polarization leakage of the 1004 nm beam is the error knob.
struct ShelvingConfig {
    Sr88Params atom;
    double rabi_408_mhz = 10.0;
    double rabi_1004_mhz = 7.0;
    double detuning_408_mhz = 0.0;
    double pol_error_408 = 0.0;
    double grid_max_us = 80.0;
    double grid_step_us = 0.5;
    double detection_ms = 0.0;   // optional D5/2 decay correction window
    double tau_d52_ms = 395.0;

    void validate() const;
    nlohmann::json to_json() const;
    static ShelvingConfig from_json(const nlohmann::json& j);
};

// Probability that the fluorescence stage reads bright after shelving for
// `shelve_time_us`, starting from |1> (initial_one) or |0>.
double shelving_outcome(const ShelvingConfig& cfg, double detuning_1004_mhz,
                        double pol_error_1004, double shelve_time_us, bool initial_one);

struct ShelveTimeScan {
    std::vector<double> t_us;
    std::vector<double> p_bright_zero;
    std::vector<double> p_bright_one;

    double contrast(std::size_t i) const { return p_bright_zero[i] - p_bright_one[i]; }
};

ShelveTimeScan shelve_time_scan(const ShelvingConfig& cfg, double detuning_1004_mhz,
                                double pol_error_1004);

// Argmax of the readout contrast over the configured time grid; ties go to
// the shorter time.
double optimize_shelve_time(const ShelvingConfig& cfg, double detuning_1004_mhz,
                            double pol_error_1004);

// Contrast with the shelving time recalibrated at this scan point.
double shelving_contrast_at_optimum(const ShelvingConfig& cfg, double detuning_1004_mhz,
                                    double pol_error_1004);

// ---- polarization-error fitting ----

struct ScanPoint {
    double x = 0.0;
    double y = 0.0;
};

class ScanModel {
public:
    virtual ~ScanModel() = default;
    virtual std::vector<double> predict(double pol_error, const std::vector<double>& xs) const = 0;
};

// Contrast versus 1004 nm detuning, shelve time recalibrated per point.
class ShelvingContrastModel : public ScanModel {
public:
    explicit ShelvingContrastModel(ShelvingConfig cfg) : cfg_(std::move(cfg)) {}
    std::vector<double> predict(double pol_error, const std::vector<double>& xs) const override;

private:
    ShelvingConfig cfg_;
};

// Normalized infrared arrival curve of a pump beam versus time (ns).
class PumpPatternModel : public ScanModel {
public:
    explicit PumpPatternModel(PumpPatternConfig cfg) : cfg_(std::move(cfg)) {}
    std::vector<double> predict(double pol_error, const std::vector<double>& xs) const override;

private:
    PumpPatternConfig cfg_;
};

struct PolarizationFit {
    double epsilon = 0.0;
    double std_error = 0.0;
    double rss = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Least-squares fit of a scan to the model over the polarization error, via
// a derivative-free simplex search; the standard error comes from the local
// curvature of the objective.
PolarizationFit fit_polarization_error(const std::vector<ScanPoint>& scan, const ScanModel& model,
                                       double eps_init = 5e-3, int max_iter = 200);

}  // namespace ionlink
