#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ionlink/emission.hpp"
#include "ionlink/rng.hpp"

#include "json.hpp"

namespace ionlink {

// Per-attempt success factors: emission branching, collection/transmission,
// detector efficiency and window capture.
struct RateFactors {
    double p_p = 0.0;
    double p_c = 0.0;
    double p_q = 0.0;
    double p_w = 0.0;

    void validate() const;
};

double success_probability(const RateFactors& f);

struct TimingBudget {
    double body_us = 0.0;     // pump + excite + margins
    double latency_us = 0.0;  // control-system latency per attempt
    double travel_us = 0.0;   // photon time of flight
    int cooling_period = 50;  // attempts between cooling breaks
    double cooling_us = 0.0;
    double leakage_fraction = 0.0;

    void validate() const;
    nlohmann::json to_json() const;
    static TimingBudget from_json(const nlohmann::json& j);
};

// Reciprocal of the per-attempt period. Cooling breaks are excluded here and
// only enter the Monte Carlo duty cycle.
double attempt_rate_hz(const TimingBudget& t);

// Successes per second counted only when the ion stayed in the qubit manifold.
double entanglement_rate_hz(double attempts_per_s, double p_ent, double leakage_fraction);

struct WindowRow {
    double window_ns = 0.0;
    double p_w = 0.0;
    double gamma = 0.0;
    double rate_hz = 0.0;
};

// One row per requested window length. Each window is placed on the pdf grid
// where it captures the most emission; gamma is the residual phase coherence
// for the given qubit splitting.
std::vector<WindowRow> window_tradeoff(const EmissionTimePDF& pdf, double qubit_splitting_mhz,
                                       const TimingBudget& timing, double p_p, double p_c,
                                       double p_q, const std::vector<double>& windows_ns);

void write_window_table_csv(std::ostream& os, const std::vector<WindowRow>& rows);

struct MonteCarloRate {
    double rate_hz = 0.0;
    double stderr_hz = 0.0;
    std::int64_t successes = 0;
    std::int64_t attempts = 0;
    double wall_seconds = 0.0;
};

// Event-driven attempt loop with cooling breaks every `cooling_period`
// attempts and an optional readout pause after each herald.
MonteCarloRate monte_carlo_rate(const TimingBudget& t, double p_ent, double readout_overhead_us,
                                double wall_duration_s, RandomStream& rng);

}  // namespace ionlink
