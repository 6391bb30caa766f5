#include "ionlink/density_matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace ionlink {

namespace {

void check_density(const Mat& m) {
    if (m.rows() != m.cols() || m.rows() < 1)
        throw std::invalid_argument("density matrix must be square and nonempty");
    if (!is_hermitian(m, kHermTol))
        throw std::invalid_argument("density matrix not Hermitian within tolerance");
    if (std::abs(m.trace().real() - 1.0) > kTraceTol || std::abs(m.trace().imag()) > kTraceTol)
        throw std::invalid_argument("density matrix trace differs from one");
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(m), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kEigTol)
        throw std::invalid_argument("density matrix has a negative eigenvalue");
}

}  // namespace

PureState::PureState(Vec amplitudes) : amps_(std::move(amplitudes)) {
    if (amps_.size() < 1) throw std::invalid_argument("empty state vector");
    if (std::abs(amps_.squaredNorm() - 1.0) > 1e-12)
        throw std::invalid_argument("state vector not normalized");
}

PureState PureState::link_target() {
    Vec amps = Vec::Zero(4);
    amps(0) = std::sqrt(3.0) / 2.0;
    amps(3) = 0.5;
    return PureState(amps);
}

DensityMatrix::DensityMatrix(Mat m) : m_(std::move(m)) {
    check_density(m_);
    m_ = hermitize(m_);
}

DensityMatrix DensityMatrix::pure(const PureState& psi) {
    const Vec& a = psi.amplitudes();
    return DensityMatrix(a * a.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
    return DensityMatrix(Mat::Identity(dim, dim) / static_cast<double>(dim));
}

nlohmann::json DensityMatrix::to_json() const {
    std::vector<double> re, im;
    re.reserve(m_.size());
    im.reserve(m_.size());
    for (int i = 0; i < dim(); ++i)
        for (int j = 0; j < dim(); ++j) {
            re.push_back(m_(i, j).real());
            im.push_back(m_(i, j).imag());
        }
    return {{"dim", dim()}, {"re", re}, {"im", im}};
}

DensityMatrix DensityMatrix::from_json(const nlohmann::json& j) {
    const int n = j.at("dim").get<int>();
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    if (re.size() != static_cast<std::size_t>(n) * n || im.size() != re.size())
        throw std::invalid_argument("density matrix JSON has wrong entry count");
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) m(i, k) = cxd(re[i * n + k], im[i * n + k]);
    return DensityMatrix(m);
}

KrausChannel::KrausChannel(std::vector<Mat> operators) : ops_(std::move(operators)) {
    if (ops_.empty()) throw std::invalid_argument("Kraus channel needs at least one operator");
    const auto n = ops_.front().rows();
    Mat sum = Mat::Zero(n, n);
    for (const auto& k : ops_) {
        if (k.rows() != n || k.cols() != n)
            throw std::invalid_argument("Kraus operators must share one square dimension");
        sum += k.adjoint() * k;
    }
    if (max_abs(sum - Mat::Identity(n, n)) > 1e-9)
        throw std::invalid_argument("Kraus operators do not resolve the identity");
}

DensityMatrix KrausChannel::apply(const DensityMatrix& rho) const {
    const Mat& m = rho.matrix();
    if (m.rows() != ops_.front().rows())
        throw std::invalid_argument("Kraus channel dimension mismatch");
    Mat out = Mat::Zero(m.rows(), m.cols());
    for (const auto& k : ops_) out += k * m * k.adjoint();
    return DensityMatrix(out);
}

namespace {

// Weyl shift/clock unitaries: an orthogonal unitary basis in any dimension,
// used to build the qudit depolarizing channel.
std::vector<Mat> weyl_basis(int d) {
    Mat shift = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) shift((i + 1) % d, i) = 1.0;
    Mat clock = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) clock(i, i) = std::exp(kI * (2.0 * kPi * i / d));
    std::vector<Mat> basis;
    basis.reserve(static_cast<std::size_t>(d) * d);
    Mat xa = Mat::Identity(d, d);
    for (int a = 0; a < d; ++a) {
        Mat xazb = xa;
        for (int b = 0; b < d; ++b) {
            basis.push_back(xazb);
            xazb = xazb * clock;
        }
        xa = shift * xa;
    }
    return basis;
}

std::vector<Mat> depolarizing_ops(int d, double lambda) {
    if (lambda < 0.0 || lambda > 1.0)
        throw std::invalid_argument("depolarizing strength outside [0, 1]");
    auto basis = weyl_basis(d);
    std::vector<Mat> ops;
    ops.reserve(basis.size());
    const double w_id = lambda + (1.0 - lambda) / (d * d);
    const double w_rest = (1.0 - lambda) / (d * d);
    for (std::size_t i = 0; i < basis.size(); ++i)
        ops.push_back(std::sqrt(i == 0 ? w_id : w_rest) * basis[i]);
    return ops;
}

}  // namespace

KrausChannel KrausChannel::depolarizing(int dim, double lambda) {
    return KrausChannel(depolarizing_ops(dim, lambda));
}

KrausChannel KrausChannel::photon_depolarizing(double prob) {
    auto local = depolarizing_ops(2, 1.0 - prob);
    std::vector<Mat> ops;
    for (const auto& k : local) ops.push_back(kron(k, Mat::Identity(2, 2)));
    return KrausChannel(std::move(ops));
}

KrausChannel KrausChannel::ion_depolarizing(double prob) {
    auto local = depolarizing_ops(2, 1.0 - prob);
    std::vector<Mat> ops;
    for (const auto& k : local) ops.push_back(kron(Mat::Identity(2, 2), k));
    return KrausChannel(std::move(ops));
}

KrausChannel KrausChannel::unitary(const Mat& u) {
    return KrausChannel({u});
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
    return DensityMatrix(kron(a.matrix(), b.matrix()));
}

DensityMatrix partial_trace(const DensityMatrix& rho, int keep) {
    if (rho.dim() != 4) throw std::invalid_argument("partial_trace expects a 2 x 2 product space");
    if (keep != 0 && keep != 1) throw std::invalid_argument("keep must be 0 or 1");
    const Mat& m = rho.matrix();
    Mat out = Mat::Zero(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int t = 0; t < 2; ++t) {
                // Joint index = 2 * first + second.
                const int r = keep == 0 ? 2 * i + t : 2 * t + i;
                const int c = keep == 0 ? 2 * j + t : 2 * t + j;
                out(i, j) += m(r, c);
            }
    return DensityMatrix(out);
}

double fidelity(const DensityMatrix& rho, const PureState& psi) {
    if (rho.dim() != psi.dim()) throw std::invalid_argument("fidelity dimension mismatch");
    const Vec& a = psi.amplitudes();
    const cxd f = (a.adjoint() * rho.matrix() * a)(0, 0);
    if (std::abs(f.imag()) > 1e-10)
        throw std::runtime_error("fidelity came out non-real");
    return f.real();
}

double purity(const DensityMatrix& rho) {
    return (rho.matrix() * rho.matrix()).trace().real();
}

DensityMatrix depolarize(const DensityMatrix& rho, double lambda) {
    if (lambda < 0.0 || lambda > 1.0)
        throw std::invalid_argument("depolarize: lambda outside [0, 1]");
    const int d = rho.dim();
    return DensityMatrix(lambda * rho.matrix() +
                         (1.0 - lambda) / d * Mat::Identity(d, d));
}

DensityMatrix dephase(const DensityMatrix& rho, const std::vector<int>& block, double gamma) {
    if (gamma < 0.0 || gamma > 1.0)
        throw std::invalid_argument("dephase: gamma outside [0, 1]");
    std::vector<bool> in_block(rho.dim(), false);
    for (int idx : block) {
        if (idx < 0 || idx >= rho.dim()) throw std::invalid_argument("dephase: index out of range");
        in_block[idx] = true;
    }
    Mat m = rho.matrix();
    for (int i = 0; i < rho.dim(); ++i)
        for (int j = 0; j < rho.dim(); ++j)
            if (in_block[i] != in_block[j]) m(i, j) *= gamma;
    return DensityMatrix(m);
}

double max_fidelity_bound(double purity) {
    if (purity < 0.25 - 1e-12 || purity > 1.0 + 1e-12)
        throw std::invalid_argument("two-qubit purity must lie in [0.25, 1]");
    const double arg = std::max(0.0, 3.0 * (4.0 * purity - 1.0));
    return 0.25 * (1.0 + std::sqrt(arg));
}

DensityMatrix psd_project(const Mat& hermitian) {
    if (!is_hermitian(hermitian, 1e-8))
        throw std::invalid_argument("psd_project expects a Hermitian matrix");
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(hermitian));
    Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0);
    const double tr = vals.sum();
    if (tr <= 0.0) throw std::invalid_argument("psd_project: nothing left after clipping");
    vals /= tr;
    return DensityMatrix(es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint());
}

}  // namespace ionlink
