#include "ionlink/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace ionlink {

namespace {

struct JumpTerm {
    // (lower level, upper level, amplitude) triplets of sqrt(rate) * cg.
    std::vector<std::tuple<int, int, double>> entries;
};

}  // namespace

Generator::Generator(const LevelSystem& system, std::vector<LaserBeam> beams)
    : dim_(system.total_levels()) {
    system.validate();
    for (const auto& b : beams) {
        b.validate();
        if (b.channel < 0 || b.channel >= static_cast<int>(system.channels().size()))
            throw std::invalid_argument("beam references unknown transition");
    }

    // Rotating-frame offsets per manifold: walking a beam from the lower to
    // the upper manifold subtracts that beam's detuning. A loop of beams must
    // agree on the offsets or there is no consistent frame.
    const auto& manifolds = system.manifolds();
    std::vector<double> phi(manifolds.size(), std::nan(""));
    std::vector<bool> assigned(manifolds.size(), false);
    auto try_assign = [&](int m, double value) {
        if (!assigned[m]) {
            phi[m] = value;
            assigned[m] = true;
            return true;
        }
        if (std::abs(phi[m] - value) > 1e-9)
            throw std::invalid_argument("beams define an inconsistent rotating frame");
        return false;
    };
    std::size_t remaining = beams.size();
    std::vector<bool> done(beams.size(), false);
    while (remaining > 0) {
        bool progress = false;
        for (std::size_t i = 0; i < beams.size(); ++i) {
            if (done[i]) continue;
            const auto& ch = system.channels()[beams[i].channel];
            const double delta = 2.0 * kPi * beams[i].detuning_mhz;
            const int lo = ch.lower_manifold, up = ch.upper_manifold;
            if (!assigned[lo] && !assigned[up]) continue;
            if (assigned[lo]) try_assign(up, phi[lo] - delta);
            else try_assign(lo, phi[up] + delta);
            try_assign(lo, phi[up] + delta);  // consistency check both ways
            done[i] = true;
            --remaining;
            progress = true;
        }
        if (!progress && remaining > 0) {
            // Seed a fresh connected component at zero offset.
            for (std::size_t i = 0; i < beams.size(); ++i)
                if (!done[i]) {
                    try_assign(system.channels()[beams[i].channel].lower_manifold, 0.0);
                    break;
                }
        }
    }
    for (std::size_t m = 0; m < manifolds.size(); ++m)
        if (!assigned[m]) phi[m] = 0.0;

    h_static_ = Mat::Zero(dim_, dim_);
    for (std::size_t m = 0; m < manifolds.size(); ++m) {
        const auto& man = manifolds[m];
        for (int s = 0; s < man.sublevels(); ++s) {
            const double mj = 0.5 * man.two_m(s);
            const double diag =
                2.0 * kPi * (man.zeeman_mhz_per_mj * mj + man.energy_offset_mhz) + phi[m];
            h_static_(system.level_index(static_cast<int>(m), s),
                      system.level_index(static_cast<int>(m), s)) = diag;
        }
    }

    for (const auto& b : beams) {
        const auto& ch = system.channels()[b.channel];
        const double omega = 2.0 * kPi * b.rabi_mhz;
        Mat d = Mat::Zero(dim_, dim_);
        for (const auto& c : ch.couplings) {
            const double a = b.amplitude(c.q);
            if (a == 0.0) continue;
            const int u = system.level_index(ch.upper_manifold, c.upper_sublevel);
            const int l = system.level_index(ch.lower_manifold, c.lower_sublevel);
            d(u, l) += 0.5 * omega * a * c.amplitude;
        }
        drive_.push_back(d + d.adjoint().eval());
        envelopes_.push_back(b.envelope);
        fastest_ = std::max({fastest_, omega, 2.0 * kPi * std::abs(b.detuning_mhz)});
    }

    decay_diag_ = Mat::Zero(dim_, dim_);
    for (const auto& ch : system.channels()) {
        if (ch.rate_per_us <= 0.0) continue;
        fastest_ = std::max(fastest_, ch.rate_per_us);
        const double root_rate = std::sqrt(ch.rate_per_us);
        for (int q = -1; q <= 1; ++q) {
            Mat c = Mat::Zero(dim_, dim_);
            bool any = false;
            for (const auto& cp : ch.couplings) {
                if (cp.q != q) continue;
                const int u = system.level_index(ch.upper_manifold, cp.upper_sublevel);
                const int l = system.level_index(ch.lower_manifold, cp.lower_sublevel);
                c(l, u) += root_rate * cp.amplitude;
                any = true;
            }
            if (any) jumps_.push_back(std::move(c));
        }
    }
    for (const auto& c : jumps_) decay_diag_ -= 0.5 * kI * (c.adjoint() * c);
}

Mat Generator::hamiltonian(double t_us) const {
    Mat h = h_static_;
    for (std::size_t i = 0; i < drive_.size(); ++i) {
        const double e = envelopes_[i].value(t_us);
        if (e != 0.0) h += e * drive_[i];
    }
    return h;
}

bool Generator::is_constant() const {
    return std::all_of(envelopes_.begin(), envelopes_.end(),
                       [](const Envelope& e) { return e.is_constant(); });
}

Mat Generator::effective_hamiltonian(double t_us) const {
    return hamiltonian(t_us) + decay_diag_;
}

void Generator::apply(double t_us, const Mat& rho, Mat& out) const {
    const Mat heff = effective_hamiltonian(t_us);
    const Mat t1 = heff * rho;
    out = -kI * (t1 - t1.adjoint().eval());
    for (const auto& c : jumps_) out += c * rho * c.adjoint();
}

Mat Generator::superoperator() const {
    if (!is_constant())
        throw std::invalid_argument("superoperator requires constant envelopes");
    const Mat heff = effective_hamiltonian(0.0);
    const Mat id = Mat::Identity(dim_, dim_);
    Mat l = -kI * kron(id, heff) + kI * kron(heff.conjugate(), id);
    for (const auto& c : jumps_) l += kron(c.conjugate(), c);
    return l;
}

double LindbladRun::population(std::size_t t_index, int level) const {
    return rho.at(t_index)(level, level).real();
}

double LindbladRun::max_trace_error() const {
    double err = 0.0;
    for (const auto& r : rho) err = std::max(err, std::abs(r.trace().real() - 1.0));
    return err;
}

double LindbladRun::min_eigenvalue() const {
    double lo = 0.0;
    for (const auto& r : rho) {
        Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(r), Eigen::EigenvaluesOnly);
        lo = std::min(lo, es.eigenvalues().minCoeff());
    }
    return lo;
}

void LindbladRun::write_csv(std::ostream& os) const {
    os << "t_us";
    for (const auto& l : level_labels) os << ",pop_" << l;
    os << "\n";
    char buf[64];
    for (std::size_t i = 0; i < t_us.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", t_us[i]);
        os << buf;
        for (int l = 0; l < rho[i].rows(); ++l) {
            std::snprintf(buf, sizeof buf, ",%.17g", population(i, l));
            os << buf;
        }
        os << "\n";
    }
}

LindbladRun evolve(const Mat& rho0, const LevelSystem& system, const std::vector<LaserBeam>& beams,
                   double t0_us, double t1_us, double dt_us, int store_every) {
    if (t1_us <= t0_us || dt_us <= 0.0 || store_every < 1)
        throw std::invalid_argument("bad time span for evolve");
    Generator gen(system, beams);
    if (gen.fastest_scale() > 0.0 && dt_us > 0.01 / gen.fastest_scale() * (1.0 + 1e-9))
        throw std::invalid_argument("time step too large for the fastest system scale");

    const auto n_steps = static_cast<std::size_t>(std::ceil((t1_us - t0_us) / dt_us - 1e-9));
    const double dt = (t1_us - t0_us) / static_cast<double>(n_steps);

    LindbladRun run;
    for (int l = 0; l < gen.dim(); ++l) run.level_labels.push_back(system.level_label(l));
    Mat rho = rho0;
    Mat k1(gen.dim(), gen.dim()), k2 = k1, k3 = k1, k4 = k1, tmp = k1;
    run.t_us.push_back(t0_us);
    run.rho.push_back(rho);
    for (std::size_t step = 0; step < n_steps; ++step) {
        const double t = t0_us + static_cast<double>(step) * dt;
        gen.apply(t, rho, k1);
        tmp = rho + 0.5 * dt * k1;
        gen.apply(t + 0.5 * dt, tmp, k2);
        tmp = rho + 0.5 * dt * k2;
        gen.apply(t + 0.5 * dt, tmp, k3);
        tmp = rho + dt * k3;
        gen.apply(t + dt, tmp, k4);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if ((step + 1) % static_cast<std::size_t>(store_every) == 0 || step + 1 == n_steps) {
            run.t_us.push_back(t0_us + static_cast<double>(step + 1) * dt);
            run.rho.push_back(rho);
        }
    }
    return run;
}

LindbladRun propagate_constant(const Mat& rho0, const LevelSystem& system,
                               const std::vector<LaserBeam>& beams,
                               const std::vector<double>& times_us) {
    if (times_us.size() < 2) throw std::invalid_argument("need at least two sample times");
    for (std::size_t i = 1; i < times_us.size(); ++i)
        if (times_us[i] <= times_us[i - 1])
            throw std::invalid_argument("sample times must increase");
    Generator gen(system, beams);
    if (!gen.is_constant())
        throw std::invalid_argument("propagate_constant needs constant beam envelopes");

    const int d = gen.dim();
    const Mat l_full = gen.superoperator();
    const Eigen::Index n = l_full.rows();

    // Restrict to the matrix units reachable from the initial support. Units
    // outside the closure stay exactly zero for all time.
    std::vector<std::vector<int>> feeds(n);  // column j -> rows it feeds
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            if (std::abs(l_full(i, j)) > 1e-14) feeds[j].push_back(static_cast<int>(i));

    const Vec v0_full = vectorize(rho0);
    std::vector<bool> reach(n, false);
    std::deque<int> queue;
    auto mark = [&](int idx) {
        if (!reach[idx]) {
            reach[idx] = true;
            queue.push_back(idx);
        }
    };
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(v0_full(i)) > 1e-14) mark(static_cast<int>(i));
    while (!queue.empty()) {
        const int j = queue.front();
        queue.pop_front();
        for (int i : feeds[j]) mark(i);
        // keep the set symmetric under (i,j) -> (j,i) so rho stays Hermitian
        const int r = j % d, c = j / d;
        mark(r * d + c);
    }
    std::vector<int> units;
    for (Eigen::Index i = 0; i < n; ++i)
        if (reach[i]) units.push_back(static_cast<int>(i));

    const auto m = static_cast<Eigen::Index>(units.size());
    Mat l_sub(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b) l_sub(a, b) = l_full(units[a], units[b]);
    Vec v(m);
    for (Eigen::Index a = 0; a < m; ++a) v(a) = v0_full(units[a]);

    LindbladRun run;
    for (int l = 0; l < d; ++l) run.level_labels.push_back(system.level_label(l));
    auto emit = [&](double t) {
        Mat rho = Mat::Zero(d, d);
        for (Eigen::Index a = 0; a < m; ++a) rho(units[a] % d, units[a] / d) = v(a);
        run.t_us.push_back(t);
        run.rho.push_back(hermitize(rho));
    };
    emit(times_us.front());

    double cached_gap = -1.0;
    Mat step_exp;
    for (std::size_t k = 1; k < times_us.size(); ++k) {
        const double gap = times_us[k] - times_us[k - 1];
        if (std::abs(gap - cached_gap) > 1e-15) {
            step_exp = (l_sub * gap).exp();
            cached_gap = gap;
        }
        v = step_exp * v;
        emit(times_us[k]);
    }
    return run;
}

EmissionPdfResult emission_pdf(const LindbladRun& run, const LevelSystem& system,
                               const std::string& channel_label) {
    const auto& ch = system.channels()[system.find_channel(channel_label)];
    const auto& upper = system.manifolds()[ch.upper_manifold];
    if (upper.two_j != 1)
        throw std::invalid_argument("emission splitting assumes a J=1/2 upper manifold");
    const int idx_minus = system.level_index(ch.upper_manifold, 0);  // m = -1/2
    const int idx_plus = system.level_index(ch.upper_manifold, 1);   // m = +1/2
    double rate_all = 0.0;
    for (const auto& other : system.channels())
        if (other.upper_manifold == ch.upper_manifold) rate_all += other.rate_per_us;

    EmissionPdfResult out;
    auto& pdf = out.pdf;
    const std::size_t nt = run.t_us.size();
    pdf.t_ns.resize(nt);
    pdf.psi_minus.resize(nt);
    pdf.psi_plus.resize(nt);
    std::vector<double> total_rate(nt);
    for (std::size_t i = 0; i < nt; ++i) {
        pdf.t_ns[i] = run.t_us[i] * 1e3;
        // channel rate (1/us) times population, converted to density per ns
        pdf.psi_minus[i] = ch.rate_per_us * run.population(i, idx_minus) * 1e-3;
        pdf.psi_plus[i] = ch.rate_per_us * run.population(i, idx_plus) * 1e-3;
        total_rate[i] =
            rate_all * (run.population(i, idx_minus) + run.population(i, idx_plus)) * 1e-3;
    }
    const double dt = pdf.t_ns[1] - pdf.t_ns[0];
    double emitted = 0.0, decays = 0.0;
    for (std::size_t i = 0; i + 1 < nt; ++i) {
        emitted += 0.5 * dt *
                   (pdf.psi_minus[i] + pdf.psi_plus[i] + pdf.psi_minus[i + 1] + pdf.psi_plus[i + 1]);
        decays += 0.5 * dt * (total_rate[i] + total_rate[i + 1]);
    }
    out.total_emission_prob = emitted;
    out.excitation_prob = decays;
    if (emitted <= 0.0) throw std::invalid_argument("no emission recorded on this channel");
    for (std::size_t i = 0; i < nt; ++i) {
        pdf.psi_minus[i] /= emitted;
        pdf.psi_plus[i] /= emitted;
    }
    return out;
}

}  // namespace ionlink
