#include "ionlink/rate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "ionlink/fiber.hpp"

namespace ionlink {

void RateFactors::validate() const {
    for (double v : {p_p, p_c, p_q, p_w})
        if (v < 0.0 || v > 1.0) throw std::invalid_argument("rate factor outside [0, 1]");
}

double success_probability(const RateFactors& f) {
    f.validate();
    return f.p_p * f.p_c * f.p_q * f.p_w;
}

void TimingBudget::validate() const {
    if (body_us < 0 || latency_us < 0 || travel_us < 0 || cooling_us < 0)
        throw std::invalid_argument("timing entries must be nonnegative");
    if (cooling_period < 1) throw std::invalid_argument("cooling period must be >= 1 attempt");
    if (leakage_fraction < 0 || leakage_fraction > 1)
        throw std::invalid_argument("leakage fraction outside [0, 1]");
}

nlohmann::json TimingBudget::to_json() const {
    return {{"body_us", body_us},
            {"latency_us", latency_us},
            {"travel_us", travel_us},
            {"cooling_period", cooling_period},
            {"cooling_us", cooling_us},
            {"leakage_fraction", leakage_fraction}};
}

TimingBudget TimingBudget::from_json(const nlohmann::json& j) {
    TimingBudget t;
    t.body_us = j.value("body_us", 0.0);
    t.latency_us = j.value("latency_us", 0.0);
    t.travel_us = j.value("travel_us", 0.0);
    t.cooling_period = j.value("cooling_period", 50);
    t.cooling_us = j.value("cooling_us", 0.0);
    t.leakage_fraction = j.value("leakage_fraction", 0.0);
    t.validate();
    return t;
}

double attempt_rate_hz(const TimingBudget& t) {
    t.validate();
    const double loop_us = t.body_us + t.latency_us + t.travel_us;
    if (loop_us <= 0.0) throw std::invalid_argument("attempt loop time must be positive");
    return 1e6 / loop_us;
}

double entanglement_rate_hz(double attempts_per_s, double p_ent, double leakage_fraction) {
    if (attempts_per_s < 0 || p_ent < 0 || p_ent > 1 || leakage_fraction < 0 ||
        leakage_fraction > 1)
        throw std::invalid_argument("bad entanglement-rate inputs");
    return attempts_per_s * p_ent * (1.0 - leakage_fraction);
}

std::vector<WindowRow> window_tradeoff(const EmissionTimePDF& pdf, double qubit_splitting_mhz,
                                       const TimingBudget& timing, double p_p, double p_c,
                                       double p_q, const std::vector<double>& windows_ns) {
    pdf.validate(1e-3);
    const double attempts = attempt_rate_hz(timing);
    std::vector<WindowRow> rows;
    for (double w : windows_ns) {
        WindowRow row;
        row.window_ns = w;
        if (w > 0.0) {
            // slide the window across the grid to the best capture position
            double best_start = pdf.t_ns.front();
            double best_cap = -1.0;
            for (double start = pdf.t_ns.front(); start + w <= pdf.t_ns.back() + 1e-9;
                 start += pdf.step_ns()) {
                const double cap = pdf.integral_total(start, start + w);
                if (cap > best_cap) {
                    best_cap = cap;
                    best_start = start;
                }
            }
            if (best_cap < 0.0) {  // window longer than the grid
                best_start = pdf.t_ns.front();
                best_cap = pdf.total();
            }
            row.p_w = best_cap / pdf.total();
            DetectorModel det;
            det.window_start_ns = best_start;
            det.window_end_ns = std::min(best_start + w, pdf.t_ns.back());
            row.gamma = arrival_phase_coherence(pdf, det, qubit_splitting_mhz);
        } else {
            row.p_w = 0.0;
            row.gamma = 1.0;
        }
        RateFactors f{p_p, p_c, p_q, row.p_w};
        row.rate_hz =
            entanglement_rate_hz(attempts, success_probability(f), timing.leakage_fraction);
        rows.push_back(row);
    }
    return rows;
}

void write_window_table_csv(std::ostream& os, const std::vector<WindowRow>& rows) {
    os << "window_ns,p_w,gamma,rate_per_s\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.window_ns, r.p_w, r.gamma,
                      r.rate_hz);
        os << buf;
    }
}

MonteCarloRate monte_carlo_rate(const TimingBudget& t, double p_ent, double readout_overhead_us,
                                double wall_duration_s, RandomStream& rng) {
    t.validate();
    if (p_ent < 0 || p_ent > 1) throw std::invalid_argument("p_ent outside [0, 1]");
    if (wall_duration_s <= 0) throw std::invalid_argument("duration must be positive");
    const double attempt_us = t.body_us + t.latency_us + t.travel_us;
    if (attempt_us <= 0.0) throw std::invalid_argument("attempt loop time must be positive");

    MonteCarloRate out;
    double clock_us = 0.0;
    const double end_us = wall_duration_s * 1e6;
    int since_cooling = 0;
    while (clock_us < end_us) {
        clock_us += attempt_us;
        ++out.attempts;
        ++since_cooling;
        if (rng.bernoulli(p_ent)) {
            // herald: the loop breaks for ion readout, then restarts
            if (!rng.bernoulli(t.leakage_fraction)) ++out.successes;
            clock_us += readout_overhead_us;
            since_cooling = 0;
        } else if (since_cooling >= t.cooling_period) {
            clock_us += t.cooling_us;
            since_cooling = 0;
        }
    }
    out.wall_seconds = clock_us * 1e-6;
    out.rate_hz = static_cast<double>(out.successes) / out.wall_seconds;
    out.stderr_hz = std::sqrt(static_cast<double>(std::max<std::int64_t>(out.successes, 1))) /
                    out.wall_seconds;
    return out;
}

}  // namespace ionlink
