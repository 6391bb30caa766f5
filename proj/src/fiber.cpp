#include "ionlink/fiber.hpp"

#include <cmath>
#include <stdexcept>

namespace ionlink {

namespace {
constexpr double kSpeedOfLightKmPerUs = 0.299792458;
}

Mat2 PolarizationDrift::unitary(double wall_time_s) const {
    const double norm = std::sqrt(axis_x * axis_x + axis_y * axis_y + axis_z * axis_z);
    const double theta = rate_rad_per_s * wall_time_s;
    if (norm <= 0.0 || theta == 0.0) return Mat2::Identity();
    const double nx = axis_x / norm, ny = axis_y / norm, nz = axis_z / norm;
    Mat2 n_sigma;
    n_sigma << nz, cxd(nx, -ny), cxd(nx, ny), -nz;
    return std::cos(theta / 2.0) * Mat2::Identity() - kI * std::sin(theta / 2.0) * n_sigma;
}

void FiberModel::validate() const {
    if (length_km < 0.0) throw std::invalid_argument("fiber length must be nonnegative");
    if (attenuation_db_per_km < 0.0) throw std::invalid_argument("attenuation must be nonnegative");
    if (extra_loss < 0.0 || extra_loss > 1.0)
        throw std::invalid_argument("extra transmission factor outside [0, 1]");
    if (depolarization < 0.0 || depolarization > 1.0)
        throw std::invalid_argument("depolarization probability outside [0, 1]");
    if (group_index <= 0.0) throw std::invalid_argument("group index must be positive");
    if (max_abs(static_rotation * static_rotation.adjoint() - Mat2::Identity()) > 1e-10)
        throw std::invalid_argument("static fiber rotation is not unitary");
}

void DetectorModel::validate() const {
    if (efficiency < 0.0 || efficiency > 1.0)
        throw std::invalid_argument("detector efficiency outside [0, 1]");
    if (dark_rate_hz < 0.0) throw std::invalid_argument("dark-count rate must be nonnegative");
    if (window_end_ns <= window_start_ns)
        throw std::invalid_argument("detection window must have positive length");
}

double fiber_survival(double length_km, double attenuation_db_per_km, double extra_loss) {
    if (length_km < 0.0 || attenuation_db_per_km < 0.0 || extra_loss < 0.0)
        throw std::invalid_argument("fiber survival inputs must be nonnegative");
    return std::pow(10.0, -length_km * attenuation_db_per_km / 10.0) * extra_loss;
}

double fiber_latency_us(double length_km, double group_index) {
    if (length_km < 0.0 || group_index <= 0.0)
        throw std::invalid_argument("bad fiber latency inputs");
    return length_km * group_index / kSpeedOfLightKmPerUs;
}

std::pair<JointLinkState, double> apply_fiber(const JointLinkState& state, const FiberModel& model,
                                              double wall_time_s) {
    model.validate();
    const Mat2 u = model.static_rotation * model.drift.unitary(wall_time_s);
    const Mat u4 = kron(u, Mat::Identity(2, 2));
    DensityMatrix rho(u4 * state.rho.matrix() * u4.adjoint());
    if (model.depolarization > 0.0)
        rho = KrausChannel::photon_depolarizing(model.depolarization).apply(rho);
    const double survival =
        fiber_survival(model.length_km, model.attenuation_db_per_km, model.extra_loss);
    return {JointLinkState{std::move(rho), state.p_leak}, survival};
}

double window_capture(const EmissionTimePDF& pdf, const DetectorModel& det) {
    det.validate();
    const double captured = pdf.integral_total(det.window_start_ns, det.window_end_ns);
    if (captured <= 0.0) throw std::invalid_argument("detection window misses the emission pdf");
    return captured / pdf.total();
}

double arrival_phase_coherence(const EmissionTimePDF& pdf, const DetectorModel& det,
                               double qubit_splitting_mhz) {
    det.validate();
    const double t0 = std::max(det.window_start_ns, pdf.t_ns.front());
    const double t1 = std::min(det.window_end_ns, pdf.t_ns.back());
    if (t1 <= t0) throw std::invalid_argument("detection window misses the emission pdf");
    // 2 pi f t with f in MHz and t in ns gives phase in units of 1e-3 rad.
    const double omega = 2.0 * kPi * qubit_splitting_mhz * 1e-3;
    const double dt = pdf.step_ns();
    cxd acc(0.0, 0.0);
    double norm = 0.0;
    for (std::size_t i = 0; i + 1 < pdf.t_ns.size(); ++i) {
        const double ta = pdf.t_ns[i];
        const double tb = pdf.t_ns[i + 1];
        if (tb < t0 || ta > t1) continue;
        const double a = std::max(ta, t0);
        const double b = std::min(tb, t1);
        if (b <= a) continue;
        const double tm = 0.5 * (a + b);
        const double frac = (tm - ta) / dt;
        const double p = (pdf.psi_minus[i] + pdf.psi_plus[i]) * (1.0 - frac) +
                         (pdf.psi_minus[i + 1] + pdf.psi_plus[i + 1]) * frac;
        acc += p * (b - a) * std::exp(kI * omega * tm);
        norm += p * (b - a);
    }
    if (norm <= 0.0) throw std::invalid_argument("detection window has no emission density");
    return std::abs(acc) / norm;
}

}  // namespace ionlink
