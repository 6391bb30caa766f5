#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ionlink/density_matrix.hpp"
#include "ionlink/polarization.hpp"
#include "ionlink/readout.hpp"
#include "ionlink/scenario.hpp"

namespace ionlink {

struct MeasurementSetting {
    PhotonBasis photon = PhotonBasis::H;
    IonBasis ion = IonBasis::Z;
};

// The nine photon (x) ion basis combinations, in a fixed canonical order.
std::array<MeasurementSetting, 9> all_settings();

// Retained-outcome counts for one setting. Outcome index is port * 2 + cls:
// port 0 is the transmitted (analysis-basis) port, cls 0 means the herald was
// read in pass 1 (no swap pulse, bright = |0'>), cls 1 in pass 2.
struct SettingCounts {
    MeasurementSetting setting;
    std::array<std::int64_t, 4> counts{};
    std::array<std::int64_t, 2> darks_pass1{};  // per port, dropped by post-selection
    std::array<std::int64_t, 2> darks_pass2{};
    std::array<std::int64_t, 2> pass_trials{};
    std::int64_t heralds = 0;

    std::int64_t retained() const { return counts[0] + counts[1] + counts[2] + counts[3]; }
};

struct TomographyDataset {
    std::vector<SettingCounts> settings;
    ReadoutErrors errors;
    std::uint64_t seed = 0;
    std::int64_t shots_per_setting = 0;
    std::string scenario_name;

    nlohmann::json to_json() const;
    static TomographyDataset from_json(const nlohmann::json& j);
};

// Exact retained-outcome distribution of one setting under a scenario:
// probability that a pass-p herald is retained at port q, and the per-pass
// dark probability. Used for closed-form checks, the error budget and as the
// sampling distribution cross-check.
struct SettingDistribution {
    std::array<std::array<double, 2>, 2> retained{};  // [pass][port]
    std::array<std::array<double, 2>, 2> dark{};      // [pass][port]

    double retained_total(int pass) const { return retained[pass][0] + retained[pass][1]; }
};

SettingDistribution setting_distribution(const Scenario& sc, const MeasurementSetting& setting);

// Heralded-trial simulation of all nine settings; each herald walks the full
// pipeline (leak branch, analysis optics, port click, basis rotation, one
// readout pass). Substreams are derived per setting so results do not depend
// on scheduling.
TomographyDataset simulate_dataset(const Scenario& sc, std::int64_t shots_per_setting,
                                   std::uint64_t seed, int threads = 1);

// Direct Pauli-frame inversion of retained counts. Hermitian and unit trace
// by construction; not necessarily positive.
Mat linear_inversion(const TomographyDataset& d);

enum class ReadoutCorrection {
    none,        // ideal-projector likelihood (readout bias stays in)
    counts,      // invert the readout system per port before the fit
    likelihood,  // build the readout response into the outcome model
};

struct MleOptions {
    ReadoutCorrection correction = ReadoutCorrection::none;
    int max_iter = 100000;
    double grad_tol = 1e-8;
    double step_tol = 1e-12;
};

struct TomographyResult {
    DensityMatrix rho;
    double fidelity_value = 0.0;
    double purity_value = 0.0;
    double f_max_bound = 0.0;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
    double stderr_fidelity = 0.0;
    double stderr_purity = 0.0;

    nlohmann::json to_json() const;
};

// Multinomial log-likelihood of a state given the dataset, under the same
// outcome model the MLE uses.
double dataset_log_likelihood(const TomographyDataset& d, const DensityMatrix& rho,
                              const MleOptions& opts = {});

// Likelihood maximization over trace-one PSD matrices through a triangular
// factor parameterization. Never returns an iterate worse than `init`.
TomographyResult mle_reconstruct(const TomographyDataset& d, const DensityMatrix& init,
                                 const MleOptions& opts = {});

// Multinomial resampling of retained counts; returns (stderr_fidelity,
// stderr_purity) over the resampled reconstructions.
std::pair<double, double> bootstrap(const TomographyDataset& d, int resamples, std::uint64_t seed,
                                    const MleOptions& opts = {}, int threads = 1);

struct BudgetRow {
    std::string mechanism;
    double delta_only_on = 0.0;    // 1 - fidelity with only this mechanism active
    double delta_leave_out = 0.0;  // fidelity gain from disabling it in the full scenario
};

// Per-mechanism fidelity costs from exact-probability reconstructions
// (no sampling noise).
std::vector<BudgetRow> error_budget_report(const Scenario& sc);

// Exact-probability dataset (expected counts scaled to `scale` heralds per
// setting), useful for noise-free closure tests.
TomographyDataset exact_dataset(const Scenario& sc, double scale = 1e6);

}  // namespace ionlink
