#include "ionlink/emission.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ionlink {

void EmissionAmplitudes::validate() const {
    if (std::abs(amp_h0 * amp_h0 + amp_v1 * amp_v1 - 1.0) > 1e-12)
        throw std::invalid_argument("emission amplitudes not normalized");
    if (std::abs(amp_h0 * amp_h0 / (amp_v1 * amp_v1) - 3.0) > 1e-9)
        throw std::invalid_argument("emission amplitude ratio must be 3:1");
}

void EmissionTimePDF::validate(double tol) const {
    if (t_ns.size() < 2 || psi_minus.size() != t_ns.size() || psi_plus.size() != t_ns.size())
        throw std::invalid_argument("emission pdf arrays inconsistent");
    const double dt = t_ns[1] - t_ns[0];
    if (dt <= 0.0) throw std::invalid_argument("emission pdf grid must increase");
    for (std::size_t i = 1; i < t_ns.size(); ++i)
        if (std::abs((t_ns[i] - t_ns[i - 1]) - dt) > 1e-9)
            throw std::invalid_argument("emission pdf grid must be uniform");
    for (std::size_t i = 0; i < t_ns.size(); ++i)
        if (psi_minus[i] < 0.0 || psi_plus[i] < 0.0)
            throw std::invalid_argument("emission densities must be nonnegative");
    if (std::abs(total() - 1.0) > tol)
        throw std::invalid_argument("emission pdf does not integrate to one");
}

double EmissionTimePDF::step_ns() const { return t_ns[1] - t_ns[0]; }

namespace {

double trapz_window(const std::vector<double>& t, const std::vector<double>& y,
                    double t0, double t1) {
    if (t1 <= t0) return 0.0;
    t0 = std::max(t0, t.front());
    t1 = std::min(t1, t.back());
    if (t1 <= t0) return 0.0;
    const double dt = t[1] - t[0];
    auto value_at = [&](double x) {
        const double pos = (x - t.front()) / dt;
        const auto i = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(pos))),
                                t.size() - 2);
        const double frac = pos - static_cast<double>(i);
        return y[i] * (1.0 - frac) + y[i + 1] * frac;
    };
    const auto i0 = static_cast<std::size_t>(std::ceil((t0 - t.front()) / dt - 1e-12));
    const auto i1 = static_cast<std::size_t>(std::floor((t1 - t.front()) / dt + 1e-12));
    double acc = 0.0;
    if (i0 > i1) return 0.5 * (value_at(t0) + value_at(t1)) * (t1 - t0);
    // partial leading segment, full interior trapezoids, partial trailing one
    acc += 0.5 * (value_at(t0) + y[i0]) * (t[i0] - t0);
    for (std::size_t i = i0; i < i1; ++i) acc += 0.5 * (y[i] + y[i + 1]) * dt;
    acc += 0.5 * (y[i1] + value_at(t1)) * (t1 - t[i1]);
    return acc;
}

}  // namespace

double EmissionTimePDF::integral_minus(double t0, double t1) const {
    return trapz_window(t_ns, psi_minus, t0, t1);
}

double EmissionTimePDF::integral_plus(double t0, double t1) const {
    return trapz_window(t_ns, psi_plus, t0, t1);
}

double EmissionTimePDF::integral_total(double t0, double t1) const {
    return integral_minus(t0, t1) + integral_plus(t0, t1);
}

double EmissionTimePDF::total() const {
    return integral_total(t_ns.front(), t_ns.back());
}

void EmissionTimePDF::write_csv(std::ostream& os) const {
    os << "t_ns,psi_minus,psi_plus\n";
    char buf[96];
    for (std::size_t i = 0; i < t_ns.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t_ns[i], psi_minus[i], psi_plus[i]);
        os << buf;
    }
}

EmissionTimePDF EmissionTimePDF::read_csv(std::istream& is) {
    EmissionTimePDF pdf;
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        double vals[3] = {0, 0, 0};
        for (double& v : vals) {
            if (!std::getline(ss, field, ',')) throw std::invalid_argument("bad pdf CSV row");
            v = std::stod(field);
        }
        pdf.t_ns.push_back(vals[0]);
        pdf.psi_minus.push_back(vals[1]);
        pdf.psi_plus.push_back(vals[2]);
    }
    pdf.validate(1e-3);
    return pdf;
}

JointLinkState ideal_state() {
    EmissionAmplitudes amps;
    amps.validate();
    Vec psi = Vec::Zero(4);
    psi(0) = amps.amp_h0;
    psi(3) = amps.amp_v1;
    return JointLinkState{DensityMatrix::pure(PureState(psi)), 0.0};
}

double window_success_S(const EmissionTimePDF& pdf, double t_i_ns, double t_f_ns) {
    if (t_f_ns <= t_i_ns) throw std::invalid_argument("empty detection window");
    const double denom = pdf.integral_total(t_i_ns, t_f_ns);
    if (denom <= 0.0) throw std::invalid_argument("detection window has no emission density");
    return pdf.integral_minus(t_i_ns, t_f_ns) / denom;
}

JointLinkState prepared_state(double s, const KrausChannel* extra_mix) {
    if (s < 0.0 || s > 1.0) throw std::invalid_argument("branch probability outside [0, 1]");
    JointLinkState st = ideal_state();
    st.p_leak = 1.0 - s;
    if (extra_mix != nullptr) st.rho = extra_mix->apply(st.rho);
    return st;
}

EmissionSample sample_emission(const EmissionTimePDF& pdf, RandomStream& rng) {
    const std::size_t n = pdf.t_ns.size();
    const double dt = pdf.step_ns();
    // Cell masses via the trapezoid rule, matching the integral convention.
    std::vector<double> cell(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        cell[i] = 0.5 * dt *
                  (pdf.psi_minus[i] + pdf.psi_minus[i + 1] + pdf.psi_plus[i] + pdf.psi_plus[i + 1]);
    const std::size_t i = rng.discrete(cell);
    const double t = pdf.t_ns[i] + rng.uniform() * dt;
    const double minus_mass = 0.5 * dt * (pdf.psi_minus[i] + pdf.psi_minus[i + 1]);
    const bool desired = cell[i] <= 0.0 ? true : rng.bernoulli(minus_mass / cell[i]);
    return EmissionSample{t, desired};
}

}  // namespace ionlink
