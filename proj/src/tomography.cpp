#include "ionlink/tomography.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

#include "ionlink/emission.hpp"
#include "ionlink/errors.hpp"
#include "ionlink/optimize.hpp"

namespace ionlink {

std::array<MeasurementSetting, 9> all_settings() {
    std::array<MeasurementSetting, 9> out;
    const PhotonBasis ph[3] = {PhotonBasis::H, PhotonBasis::D, PhotonBasis::R};
    const IonBasis io[3] = {IonBasis::Z, IonBasis::X, IonBasis::Y};
    int k = 0;
    for (int p = 0; p < 3; ++p)
        for (int i = 0; i < 3; ++i) out[k++] = MeasurementSetting{ph[p], io[i]};
    return out;
}

nlohmann::json TomographyDataset::to_json() const {
    nlohmann::json js = nlohmann::json::array();
    for (const auto& s : settings) {
        js.push_back({{"photon", basis_name(s.setting.photon)},
                      {"ion", ion_basis_name(s.setting.ion)},
                      {"counts", s.counts},
                      {"darks_pass1", s.darks_pass1},
                      {"darks_pass2", s.darks_pass2},
                      {"pass_trials", s.pass_trials},
                      {"heralds", s.heralds},
                      {"retained", s.retained()}});
    }
    return {{"scenario", scenario_name},
            {"seed", seed},
            {"shots_per_setting", shots_per_setting},
            {"errors", errors.to_json()},
            {"settings", js}};
}

TomographyDataset TomographyDataset::from_json(const nlohmann::json& j) {
    TomographyDataset d;
    d.scenario_name = j.value("scenario", "");
    d.seed = j.value("seed", std::uint64_t{0});
    d.shots_per_setting = j.value("shots_per_setting", std::int64_t{0});
    d.errors = ReadoutErrors::from_json(j.at("errors"));
    for (const auto& js : j.at("settings")) {
        SettingCounts s;
        s.setting.photon = photon_basis_from_name(js.at("photon").get<std::string>());
        s.setting.ion = ion_basis_from_name(js.at("ion").get<std::string>());
        s.counts = js.at("counts").get<std::array<std::int64_t, 4>>();
        s.darks_pass1 = js.value("darks_pass1", std::array<std::int64_t, 2>{});
        s.darks_pass2 = js.value("darks_pass2", std::array<std::int64_t, 2>{});
        s.pass_trials = js.value("pass_trials", std::array<std::int64_t, 2>{});
        s.heralds = js.value("heralds", std::int64_t{0});
        d.settings.push_back(s);
    }
    return d;
}

namespace {

struct LinkEnsemble {
    Mat rho;           // joint 4x4 state after all channel noise
    Mat2 leak_photon;  // photon state of heralds from the leak branch
    double p_leak = 0.0;
};

LinkEnsemble build_link_ensemble(const Scenario& sc) {
    LinkEnsemble out;
    DensityMatrix rho = ideal_state().rho;
    // Wrong-branch decays carry the opposite port weighting of the target
    // state and no ion-qubit correlation.
    Mat2 leak;
    leak << 0.25, 0.0, 0.0, 0.75;

    auto apply_photon_unitary = [&](const Mat2& u) {
        const Mat u4 = kron(u, Mat::Identity(2, 2));
        rho = DensityMatrix(u4 * rho.matrix() * u4.adjoint());
        leak = u * leak * u.adjoint();
    };
    auto apply_photon_depol = [&](double p) {
        if (p <= 0.0) return;
        rho = KrausChannel::photon_depolarizing(p).apply(rho);
        leak = (1.0 - p) * leak + p * 0.5 * leak.trace() * Mat2::Identity();
    };

    if (max_abs(sc.fiber.static_rotation - Mat2::Identity()) > 0.0)
        apply_photon_unitary(sc.fiber.static_rotation);
    if (sc.toggles.residual_rotation && sc.residual_rotation_rad != 0.0) {
        const double half = 0.5 * sc.residual_rotation_rad;
        Mat2 u;
        u << std::cos(half), -std::sin(half), std::sin(half), std::cos(half);
        apply_photon_unitary(u);
    }
    apply_photon_depol(sc.fiber.depolarization);
    if (sc.toggles.pol_mixing) apply_photon_depol(sc.pol_mixing_depol);
    if (sc.toggles.photon_path) apply_photon_depol(sc.photon_path_depol);

    const double gamma = sc.dephasing_gamma();
    if (gamma < 1.0) rho = dephase(rho, {0, 2}, gamma);  // ion |0> rows of the joint space

    out.rho = std::move(rho.matrix());
    out.leak_photon = leak;
    out.p_leak = sc.p_leak;
    return out;
}

struct SettingContext {
    std::array<double, 2> p_port{};
    std::array<double, 2> leak_port{};
    std::array<Mat2, 2> sigma{};  // conditional ion state per port
    ReadoutErrors errors;         // effective (zeroed when readout noise is off)
    std::array<Eigen::Matrix3d, 2> forward{};
    double eps_s_eff = 0.0;
    IonBasis basis = IonBasis::Z;
};

SettingContext build_setting_context(const Scenario& sc, const LinkEnsemble& link,
                                     const MeasurementSetting& setting) {
    SettingContext ctx;
    ctx.basis = setting.ion;
    ctx.errors = sc.toggles.readout ? sc.readout : ReadoutErrors{};
    ctx.forward[0] = forward_matrix(1, ctx.errors);
    ctx.forward[1] = forward_matrix(2, ctx.errors);
    ctx.eps_s_eff = setting.ion == IonBasis::Z ? 0.0 : ctx.errors.eps_s;

    const Mat2 a = analysis_unitary(setting.photon);
    const Mat a4 = kron(a, Mat::Identity(2, 2));
    Mat rho_s = a4 * link.rho * a4.adjoint();
    if (sc.toggles.pi2_error && setting.ion != IonBasis::Z && sc.pi2_depol > 0.0)
        rho_s = KrausChannel::ion_depolarizing(sc.pi2_depol).apply(DensityMatrix(rho_s)).matrix();
    const Mat2 leak_s = a * link.leak_photon * a.adjoint();

    for (int q = 0; q < 2; ++q) {
        Mat2 block;
        block << rho_s(2 * q + 0, 2 * q + 0), rho_s(2 * q + 0, 2 * q + 1),
                 rho_s(2 * q + 1, 2 * q + 0), rho_s(2 * q + 1, 2 * q + 1);
        ctx.p_port[q] = std::max(0.0, block.trace().real());
        ctx.sigma[q] = ctx.p_port[q] > 0.0 ? Mat2((block / ctx.p_port[q]).eval())
                                           : Mat2(0.5 * Mat2::Identity());
        ctx.leak_port[q] = std::max(0.0, leak_s(q, q).real());
    }
    return ctx;
}

double bright_probability(const SettingContext& ctx, int pass, int port) {
    const Mat2 u = ion_basis_rotation(ctx.basis);
    const Mat2 rotated = u * ctx.sigma[port] * u.adjoint();
    const double p0 = std::clamp(rotated(0, 0).real(), 0.0, 1.0);
    const auto& m = ctx.forward[pass - 1];
    return (1.0 - ctx.eps_s_eff) * (p0 * m(0, 0) + (1.0 - p0) * m(0, 1)) +
           ctx.eps_s_eff * m(0, 2);
}

}  // namespace

SettingDistribution setting_distribution(const Scenario& sc, const MeasurementSetting& setting) {
    const LinkEnsemble link = build_link_ensemble(sc);
    const SettingContext ctx = build_setting_context(sc, link, setting);
    SettingDistribution dist;
    for (int pass = 1; pass <= 2; ++pass) {
        for (int q = 0; q < 2; ++q) {
            const double bright = bright_probability(ctx, pass, q);
            const double eps_d2 = ctx.forward[pass - 1](0, 2);
            dist.retained[pass - 1][q] = (1.0 - link.p_leak) * ctx.p_port[q] * bright +
                                         link.p_leak * ctx.leak_port[q] * eps_d2;
            dist.dark[pass - 1][q] = (1.0 - link.p_leak) * ctx.p_port[q] * (1.0 - bright) +
                                     link.p_leak * ctx.leak_port[q] * (1.0 - eps_d2);
        }
    }
    return dist;
}

namespace {

SettingCounts simulate_setting(const Scenario& sc, const LinkEnsemble& link,
                               const MeasurementSetting& setting, std::int64_t shots,
                               RandomStream rng) {
    const SettingContext ctx = build_setting_context(sc, link, setting);
    SettingCounts out;
    out.setting = setting;
    const std::vector<double> port_probs{ctx.p_port[0], ctx.p_port[1]};
    const std::vector<double> leak_probs{ctx.leak_port[0], ctx.leak_port[1]};
    for (std::int64_t i = 0; i < shots; ++i) {
        const int pass = static_cast<int>(i % 2) + 1;
        ++out.pass_trials[pass - 1];
        ++out.heralds;
        const bool leaked = rng.bernoulli(link.p_leak);
        const auto port = rng.discrete(leaked ? leak_probs : port_probs);
        const bool bright =
            ion_outcome(ctx.sigma[port], setting.ion, ctx.errors, leaked, pass, rng);
        if (bright) {
            ++out.counts[2 * port + (pass - 1)];
        } else {
            auto& darks = pass == 1 ? out.darks_pass1 : out.darks_pass2;
            ++darks[port];
        }
    }
    return out;
}

void run_partitioned(int units, int threads, const std::function<void(int)>& work) {
    threads = std::max(1, std::min(threads, units));
    if (threads == 1) {
        for (int u = 0; u < units; ++u) work(u);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&]() {
            for (int u = next.fetch_add(1); u < units; u = next.fetch_add(1)) work(u);
        });
    for (auto& th : pool) th.join();
}

}  // namespace

TomographyDataset simulate_dataset(const Scenario& sc, std::int64_t shots_per_setting,
                                   std::uint64_t seed, int threads) {
    if (shots_per_setting <= 0) throw ConfigError("shots per setting must be positive");
    const LinkEnsemble link = build_link_ensemble(sc);
    const auto settings = all_settings();
    TomographyDataset d;
    d.errors = sc.toggles.readout ? sc.readout : ReadoutErrors{};
    d.seed = seed;
    d.shots_per_setting = shots_per_setting;
    d.scenario_name = sc.name;
    d.settings.resize(settings.size());
    run_partitioned(static_cast<int>(settings.size()), threads, [&](int idx) {
        auto rng = RandomStream::derive(seed, {0x70u, static_cast<std::uint64_t>(idx)});
        d.settings[static_cast<std::size_t>(idx)] =
            simulate_setting(sc, link, settings[static_cast<std::size_t>(idx)],
                             shots_per_setting, std::move(rng));
    });
    return d;
}

namespace {

Mat2 photon_sign_operator(PhotonBasis p) {
    Vec2 plus = basis_state(p);
    Vec2 minus(-std::conj(plus(1)), std::conj(plus(0)));
    return plus * plus.adjoint() - minus * minus.adjoint();
}

Mat2 ion_sign_operator(IonBasis b) {
    const Mat2 u = ion_basis_rotation(b);
    Mat2 z;
    z << 1.0, 0.0, 0.0, -1.0;
    return u.adjoint() * z * u;
}

struct WeightedSetting {
    MeasurementSetting setting;
    std::array<double, 4> w{};
};

// Results must not depend on the order settings arrive in, so every consumer
// sorts into the canonical photon-major order first.
void canonicalize(std::vector<WeightedSetting>& ws) {
    std::sort(ws.begin(), ws.end(), [](const WeightedSetting& a, const WeightedSetting& b) {
        const int ka = 3 * static_cast<int>(a.setting.photon) + static_cast<int>(a.setting.ion);
        const int kb = 3 * static_cast<int>(b.setting.photon) + static_cast<int>(b.setting.ion);
        return ka < kb;
    });
}

Mat linear_inversion_weights(std::vector<WeightedSetting> ws) {
    canonicalize(ws);
    const PhotonBasis phs[3] = {PhotonBasis::H, PhotonBasis::D, PhotonBasis::R};
    const IonBasis ios[3] = {IonBasis::Z, IonBasis::X, IonBasis::Y};
    double joint[3][3] = {};
    double photon_marg[3] = {}, ion_marg[3] = {};
    int seen[3][3] = {};
    for (const auto& s : ws) {
        const int pi = static_cast<int>(s.setting.photon);
        const int ii = static_cast<int>(s.setting.ion);
        const double total = s.w[0] + s.w[1] + s.w[2] + s.w[3];
        if (total <= 0.0) throw ConfigError("setting has no retained events");
        if (seen[pi][ii]++) throw ConfigError("duplicate measurement setting");
        joint[pi][ii] = (s.w[0] - s.w[1] - s.w[2] + s.w[3]) / total;
        photon_marg[pi] += (s.w[0] + s.w[1] - s.w[2] - s.w[3]) / total / 3.0;
        ion_marg[ii] += (s.w[0] - s.w[1] + s.w[2] - s.w[3]) / total / 3.0;
    }
    for (int p = 0; p < 3; ++p)
        for (int i = 0; i < 3; ++i)
            if (!seen[p][i]) throw ConfigError("missing measurement setting");

    const Mat id2 = Mat::Identity(2, 2);
    Mat rho = Mat::Identity(4, 4);
    for (int p = 0; p < 3; ++p) rho += photon_marg[p] * kron(photon_sign_operator(phs[p]), id2);
    for (int i = 0; i < 3; ++i) rho += ion_marg[i] * kron(id2, ion_sign_operator(ios[i]));
    for (int p = 0; p < 3; ++p)
        for (int i = 0; i < 3; ++i)
            rho += joint[p][i] * kron(photon_sign_operator(phs[p]), ion_sign_operator(ios[i]));
    return hermitize(rho / 4.0);
}

std::vector<WeightedSetting> dataset_weights(const TomographyDataset& d) {
    std::vector<WeightedSetting> ws;
    for (const auto& s : d.settings) {
        WeightedSetting w;
        w.setting = s.setting;
        for (int i = 0; i < 4; ++i) w.w[i] = static_cast<double>(s.counts[i]);
        ws.push_back(w);
    }
    return ws;
}

// Readout inversion per port: bright fractions of the two passes map back to
// population fractions through the same 3x3 system used for plain counts.
std::vector<WeightedSetting> corrected_weights(const TomographyDataset& d) {
    Eigen::Matrix3d m;
    m.row(0) = forward_matrix(1, d.errors).row(0);
    m.row(1) = forward_matrix(2, d.errors).row(0);
    m.row(2) = Eigen::RowVector3d::Ones();
    const Eigen::Matrix3d inv = m.inverse();

    std::vector<WeightedSetting> ws;
    for (const auto& s : d.settings) {
        WeightedSetting w;
        w.setting = s.setting;
        double port_total[2];
        for (int q = 0; q < 2; ++q)
            port_total[q] = static_cast<double>(s.counts[2 * q] + s.darks_pass1[q] +
                                                s.counts[2 * q + 1] + s.darks_pass2[q]);
        const double all = port_total[0] + port_total[1];
        for (int q = 0; q < 2; ++q) {
            const double k1 = static_cast<double>(s.counts[2 * q] + s.darks_pass1[q]);
            const double k2 = static_cast<double>(s.counts[2 * q + 1] + s.darks_pass2[q]);
            if (k1 <= 0.0 || k2 <= 0.0 || all <= 0.0) continue;
            const Eigen::Vector3d observed(static_cast<double>(s.counts[2 * q]) / k1,
                                           static_cast<double>(s.counts[2 * q + 1]) / k2, 1.0);
            const Eigen::Vector3d pops = inv * observed;
            const double scale = s.retained() * port_total[q] / all;
            w.w[2 * q] = std::max(0.0, pops(0)) * scale;
            w.w[2 * q + 1] = std::max(0.0, pops(1)) * scale;
        }
        ws.push_back(w);
    }
    return ws;
}

// Retained-outcome operators per setting: p_i proportional to Tr(F_i rho).
std::array<Mat, 4> outcome_operators(const MeasurementSetting& setting, const MleOptions& opts,
                                     const ReadoutErrors& errors) {
    const Mat2 a = analysis_unitary(setting.photon);
    const Mat2 u = ion_basis_rotation(setting.ion);
    std::array<Mat2, 2> port;
    for (int q = 0; q < 2; ++q) {
        Vec2 e = Vec2::Zero();
        e(q) = 1.0;
        const Vec2 back = a.adjoint() * e;
        port[q] = back * back.adjoint();
    }
    std::array<Mat2, 2> ion;
    if (opts.correction == ReadoutCorrection::likelihood) {
        const double eps_s_eff = setting.ion == IonBasis::Z ? 0.0 : errors.eps_s;
        for (int pass = 1; pass <= 2; ++pass) {
            const Eigen::Matrix3d m = forward_matrix(pass, errors);
            Mat2 z = Mat2::Zero();
            z(0, 0) = m(0, 0);
            z(1, 1) = m(0, 1);
            ion[pass - 1] = (1.0 - eps_s_eff) * (u.adjoint() * z * u) +
                            eps_s_eff * m(0, 2) * Mat2::Identity();
        }
    } else {
        Mat2 p0 = Mat2::Zero(), p1 = Mat2::Zero();
        p0(0, 0) = 1.0;
        p1(1, 1) = 1.0;
        ion[0] = u.adjoint() * p0 * u;
        ion[1] = u.adjoint() * p1 * u;
    }
    std::array<Mat, 4> f;
    for (int q = 0; q < 2; ++q)
        for (int c = 0; c < 2; ++c) f[2 * q + c] = kron(port[q], ion[c]);
    return f;
}

struct MleProblem {
    std::vector<std::array<Mat, 4>> ops;
    std::vector<std::array<double, 4>> w;
    std::vector<double> w_total;

    double log_likelihood(const Mat& rho) const {
        double ll = 0.0;
        for (std::size_t s = 0; s < ops.size(); ++s) {
            double norm = 0.0;
            double partial = 0.0;
            for (int i = 0; i < 4; ++i) {
                const double q = (ops[s][i].adjoint() * rho).trace().real();
                norm += q;
                if (w[s][i] > 0.0) {
                    if (q <= 0.0) return -std::numeric_limits<double>::infinity();
                    partial += w[s][i] * std::log(q);
                }
            }
            if (norm <= 0.0) return -std::numeric_limits<double>::infinity();
            ll += partial - w_total[s] * std::log(norm);
        }
        return ll;
    }

    // Hermitian gradient d logL / d rho.
    Mat gradient(const Mat& rho) const {
        Mat g = Mat::Zero(4, 4);
        for (std::size_t s = 0; s < ops.size(); ++s) {
            Mat f_tot = Mat::Zero(4, 4);
            double norm = 0.0;
            for (int i = 0; i < 4; ++i) {
                const double q = (ops[s][i].adjoint() * rho).trace().real();
                norm += q;
                f_tot += ops[s][i];
                if (w[s][i] > 0.0 && q > 0.0) g += (w[s][i] / q) * ops[s][i];
            }
            if (norm > 0.0) g -= (w_total[s] / norm) * f_tot;
        }
        return hermitize(g);
    }
};

MleProblem build_problem(std::vector<WeightedSetting> ws, const MleOptions& opts,
                         const ReadoutErrors& errors) {
    canonicalize(ws);
    MleProblem prob;
    for (const auto& s : ws) {
        prob.ops.push_back(outcome_operators(s.setting, opts, errors));
        prob.w.push_back(s.w);
        prob.w_total.push_back(s.w[0] + s.w[1] + s.w[2] + s.w[3]);
    }
    return prob;
}

// Lower-triangular factor parameterization rho = T T^+ / tr(T T^+) over 16
// real parameters.
constexpr int kOffDiag[6][2] = {{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}};

Mat params_to_t(const Eigen::VectorXd& x) {
    Mat t = Mat::Zero(4, 4);
    for (int i = 0; i < 4; ++i) t(i, i) = x(i);
    for (int k = 0; k < 6; ++k)
        t(kOffDiag[k][0], kOffDiag[k][1]) = cxd(x(4 + 2 * k), x(5 + 2 * k));
    return t;
}

Eigen::VectorXd t_to_params(const Mat& t) {
    Eigen::VectorXd x(16);
    for (int i = 0; i < 4; ++i) x(i) = t(i, i).real();
    for (int k = 0; k < 6; ++k) {
        x(4 + 2 * k) = t(kOffDiag[k][0], kOffDiag[k][1]).real();
        x(5 + 2 * k) = t(kOffDiag[k][0], kOffDiag[k][1]).imag();
    }
    return x;
}

TomographyResult run_mle(const std::vector<WeightedSetting>& ws, const DensityMatrix& init,
                         const MleOptions& opts, const ReadoutErrors& errors) {
    const MleProblem prob = build_problem(ws, opts, errors);
    const double ll_init = prob.log_likelihood(init.matrix());

    // Start strictly inside the cone so the first Cholesky factor exists.
    Mat start = 0.999999 * init.matrix() + 1e-6 * Mat::Identity(4, 4) / 4.0;
    Eigen::LLT<Mat> llt(start);
    if (llt.info() != Eigen::Success) {
        start = 0.99 * init.matrix() + 0.01 * Mat::Identity(4, 4) / 4.0;
        llt.compute(start);
    }
    Eigen::VectorXd x0 = t_to_params(llt.matrixL());

    auto fg = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        const Mat t = params_to_t(x);
        const double trace = (t * t.adjoint()).trace().real();
        if (trace <= 1e-300) {
            grad.setZero(16);
            return std::numeric_limits<double>::infinity();
        }
        const Mat rho = (t * t.adjoint()) / trace;
        const double ll = prob.log_likelihood(rho);
        if (!std::isfinite(ll)) {
            grad.setZero(16);
            return std::numeric_limits<double>::infinity();
        }
        const Mat g = prob.gradient(rho);
        const double scalar = (g * rho).trace().real();
        const Mat a = g - scalar * Mat::Identity(4, 4);
        const Mat ta = t.adjoint() * a;  // d logL / dT_{bc} pieces live in (c, b)
        Eigen::VectorXd gx(16);
        for (int i = 0; i < 4; ++i) gx(i) = 2.0 / trace * ta(i, i).real();
        for (int k = 0; k < 6; ++k) {
            const int b = kOffDiag[k][0], c = kOffDiag[k][1];
            gx(4 + 2 * k) = 2.0 / trace * ta(c, b).real();
            gx(5 + 2 * k) = -2.0 / trace * ta(c, b).imag();
        }
        grad = -gx;
        return -ll;
    };

    auto res = lbfgs_minimize(fg, x0, opts.max_iter, opts.grad_tol, opts.step_tol);

    const Mat t_best = params_to_t(res.x);
    Mat rho_best = t_best * t_best.adjoint();
    rho_best /= rho_best.trace().real();
    double ll_best = -res.value;

    TomographyResult out{DensityMatrix(hermitize(rho_best)), 0, 0, 0, 0, res.iterations,
                         res.converged, 0, 0};
    if (ll_init > ll_best) {  // never fall below the seed estimate
        out.rho = init;
        ll_best = ll_init;
    }
    out.log_likelihood = ll_best;
    out.fidelity_value = fidelity(out.rho, PureState::link_target());
    out.purity_value = purity(out.rho);
    out.f_max_bound = max_fidelity_bound(out.purity_value);
    return out;
}

}  // namespace

Mat linear_inversion(const TomographyDataset& d) {
    return linear_inversion_weights(dataset_weights(d));
}

double dataset_log_likelihood(const TomographyDataset& d, const DensityMatrix& rho,
                              const MleOptions& opts) {
    const auto ws = opts.correction == ReadoutCorrection::counts ? corrected_weights(d)
                                                                 : dataset_weights(d);
    return build_problem(ws, opts, d.errors).log_likelihood(rho.matrix());
}

TomographyResult mle_reconstruct(const TomographyDataset& d, const DensityMatrix& init,
                                 const MleOptions& opts) {
    const auto ws = opts.correction == ReadoutCorrection::counts ? corrected_weights(d)
                                                                 : dataset_weights(d);
    return run_mle(ws, init, opts, d.errors);
}

nlohmann::json TomographyResult::to_json() const {
    return {{"rho", rho.to_json()},
            {"fidelity", fidelity_value},
            {"purity", purity_value},
            {"f_max_bound", f_max_bound},
            {"log_likelihood", log_likelihood},
            {"iterations", iterations},
            {"converged", converged},
            {"stderr_fidelity", stderr_fidelity},
            {"stderr_purity", stderr_purity}};
}

std::pair<double, double> bootstrap(const TomographyDataset& d, int resamples, std::uint64_t seed,
                                    const MleOptions& opts, int threads) {
    if (resamples < 100) throw ConfigError("bootstrap needs at least 100 resamples");
    std::vector<double> fids(static_cast<std::size_t>(resamples));
    std::vector<double> purs(static_cast<std::size_t>(resamples));
    run_partitioned(resamples, threads, [&](int r) {
        auto rng = RandomStream::derive(seed, {0xB5u, static_cast<std::uint64_t>(r)});
        TomographyDataset resampled = d;
        for (auto& s : resampled.settings) {
            std::int64_t remaining = s.retained();
            const double total = static_cast<double>(remaining);
            double mass_left = 1.0;
            std::array<std::int64_t, 4> fresh{};
            for (int i = 0; i < 3 && remaining > 0; ++i) {
                const double p = static_cast<double>(s.counts[i]) / total;
                const double cond = mass_left > 0.0 ? std::min(1.0, p / mass_left) : 0.0;
                fresh[i] = rng.binomial(remaining, cond);
                remaining -= fresh[i];
                mass_left -= p;
            }
            fresh[3] = remaining;
            s.counts = fresh;
        }
        auto init = psd_project(linear_inversion(resampled));
        auto res = mle_reconstruct(resampled, init, opts);
        fids[static_cast<std::size_t>(r)] = res.fidelity_value;
        purs[static_cast<std::size_t>(r)] = res.purity_value;
    });
    auto stddev = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double acc = 0.0;
        for (double x : v) acc += (x - mean) * (x - mean);
        return std::sqrt(acc / static_cast<double>(v.size() - 1));
    };
    return {stddev(fids), stddev(purs)};
}

namespace {

std::vector<WeightedSetting> exact_weights(const Scenario& sc) {
    std::vector<WeightedSetting> ws;
    for (const auto& setting : all_settings()) {
        const auto dist = setting_distribution(sc, setting);
        WeightedSetting w;
        w.setting = setting;
        for (int pass = 0; pass < 2; ++pass)
            for (int q = 0; q < 2; ++q) w.w[2 * q + pass] = dist.retained[pass][q];
        ws.push_back(w);
    }
    return ws;
}

double exact_fidelity(const Scenario& sc) {
    const auto ws = exact_weights(sc);
    const auto init = psd_project(linear_inversion_weights(ws));
    const auto res = run_mle(ws, init, MleOptions{}, sc.toggles.readout ? sc.readout
                                                                        : ReadoutErrors{});
    return res.fidelity_value;
}

}  // namespace

TomographyDataset exact_dataset(const Scenario& sc, double scale) {
    TomographyDataset d;
    d.errors = sc.toggles.readout ? sc.readout : ReadoutErrors{};
    d.scenario_name = sc.name;
    d.shots_per_setting = static_cast<std::int64_t>(scale);
    for (const auto& setting : all_settings()) {
        const auto dist = setting_distribution(sc, setting);
        SettingCounts s;
        s.setting = setting;
        s.heralds = static_cast<std::int64_t>(scale);
        for (int pass = 0; pass < 2; ++pass) {
            s.pass_trials[pass] = static_cast<std::int64_t>(scale / 2);
            auto& darks = pass == 0 ? s.darks_pass1 : s.darks_pass2;
            for (int q = 0; q < 2; ++q) {
                s.counts[2 * q + pass] = std::llround(0.5 * scale * dist.retained[pass][q]);
                darks[q] = std::llround(0.5 * scale * dist.dark[pass][q]);
            }
        }
        d.settings.push_back(s);
    }
    return d;
}

std::vector<BudgetRow> error_budget_report(const Scenario& sc) {
    struct Mechanism {
        const char* name;
        bool NoiseToggles::*flag;
    };
    const Mechanism mechanisms[] = {
        {"ion-dephasing-wait", &NoiseToggles::dephasing_wait},
        {"ion-dephasing-travel", &NoiseToggles::dephasing_travel},
        {"polarization-mixing", &NoiseToggles::pol_mixing},
        {"photon-path", &NoiseToggles::photon_path},
        {"pi2-pulse", &NoiseToggles::pi2_error},
        {"polarization-instability", &NoiseToggles::residual_rotation},
        {"readout", &NoiseToggles::readout},
    };

    Scenario all_off = sc;
    all_off.toggles = NoiseToggles{false, false, false, false, false, false, false};

    const double f_all_on = exact_fidelity(sc);
    std::vector<BudgetRow> rows;
    for (const auto& m : mechanisms) {
        Scenario only = all_off;
        only.toggles.*(m.flag) = sc.toggles.*(m.flag);
        Scenario without = sc;
        without.toggles.*(m.flag) = false;
        BudgetRow row;
        row.mechanism = m.name;
        row.delta_only_on = 1.0 - exact_fidelity(only);
        row.delta_leave_out = exact_fidelity(without) - f_all_on;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace ionlink
