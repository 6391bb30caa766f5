#pragma once

#include <utility>

#include "ionlink/emission.hpp"
#include "ionlink/polarization.hpp"

namespace ionlink {

// Slow polarization drift: rotation about a fixed Bloch axis whose angle
// grows linearly with wall-clock time, so drift(0) is the identity.
struct PolarizationDrift {
    double axis_x = 0.0, axis_y = 1.0, axis_z = 0.0;
    double rate_rad_per_s = 0.0;

    Mat2 unitary(double wall_time_s) const;
};

struct FiberModel {
    double length_km = 0.0;
    double attenuation_db_per_km = 0.0;
    double extra_loss = 1.0;  // multiplicative transmission of splices etc.
    Mat2 static_rotation = Mat2::Identity();
    PolarizationDrift drift;
    double depolarization = 0.0;  // per-photon depolarizing probability
    double group_index = 1.4575267;

    void validate() const;
};

struct DetectorModel {
    double efficiency = 1.0;
    double dark_rate_hz = 0.0;
    double window_start_ns = 0.0;
    double window_end_ns = 0.0;

    void validate() const;
    // Bernoulli probability of a dark-count herald inside one window.
    double false_herald_probability() const {
        return dark_rate_hz * (window_end_ns - window_start_ns) * 1e-9;
    }
};

double fiber_survival(double length_km, double attenuation_db_per_km, double extra_loss = 1.0);

double fiber_latency_us(double length_km, double group_index);

// Transforms the photon half of the joint state (static rotation, drift at
// the given wall time, then depolarization) and reports the survival
// probability separately; the state stays normalized.
std::pair<JointLinkState, double> apply_fiber(const JointLinkState& state, const FiberModel& model,
                                              double wall_time_s);

// Fraction of the total emission density inside the detection window.
double window_capture(const EmissionTimePDF& pdf, const DetectorModel& det);

// Residual phase coherence of the ion qubit given the photon-arrival spread
// inside the window: |int p(t) e^{i 2 pi f t} dt| / int p(t) dt.
double arrival_phase_coherence(const EmissionTimePDF& pdf, const DetectorModel& det,
                               double qubit_splitting_mhz);

}  // namespace ionlink
