#pragma once

#include <vector>

#include "ionlink/linalg.hpp"

#include "json.hpp"

namespace ionlink {

// Validity tolerances for density operators. Chosen loose enough to absorb
// round-off accumulated over ~1e4 chained operations.
inline constexpr double kHermTol = 1e-10;
inline constexpr double kTraceTol = 1e-9;
inline constexpr double kEigTol = 1e-9;

class PureState {
public:
    explicit PureState(Vec amplitudes);

    int dim() const { return static_cast<int>(amps_.size()); }
    const Vec& amplitudes() const { return amps_; }

    // sqrt(3)/2 |H,0> + 1/2 |V,1> on the photon (x) ion space, ordered
    // {H0, H1, V0, V1}. This ordering convention is shared project-wide.
    static PureState link_target();

private:
    Vec amps_;
};

class DensityMatrix {
public:
    explicit DensityMatrix(Mat m);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Mat& matrix() const { return m_; }
    cxd operator()(int i, int j) const { return m_(i, j); }

    static DensityMatrix pure(const PureState& psi);
    static DensityMatrix maximally_mixed(int dim);

    nlohmann::json to_json() const;
    static DensityMatrix from_json(const nlohmann::json& j);

private:
    Mat m_;
};

class KrausChannel {
public:
    explicit KrausChannel(std::vector<Mat> operators);

    int dim() const { return static_cast<int>(ops_.front().rows()); }
    const std::vector<Mat>& operators() const { return ops_; }
    DensityMatrix apply(const DensityMatrix& rho) const;

    static KrausChannel depolarizing(int dim, double lambda);
    // Depolarizes the photon factor of the photon (x) ion product space.
    static KrausChannel photon_depolarizing(double prob);
    static KrausChannel ion_depolarizing(double prob);
    static KrausChannel unitary(const Mat& u);

private:
    std::vector<Mat> ops_;
};

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

// keep = 0 keeps the first (photon) factor, keep = 1 the second (ion).
// Requires dim == 4 split as 2 x 2.
DensityMatrix partial_trace(const DensityMatrix& rho, int keep);

double fidelity(const DensityMatrix& rho, const PureState& psi);
double purity(const DensityMatrix& rho);

DensityMatrix depolarize(const DensityMatrix& rho, double lambda);

// Scales every coherence between `block` and its complement by gamma while
// leaving the diagonal untouched: rho -> gamma rho + (1-gamma)(P rho P + Q rho Q).
// This form is completely positive for any gamma in [0, 1].
DensityMatrix dephase(const DensityMatrix& rho, const std::vector<int>& block, double gamma);

// Largest pure-state fidelity consistent with a measured two-qubit purity.
double max_fidelity_bound(double purity);

// Clip negative eigenvalues to zero and renormalize the trace to one.
DensityMatrix psd_project(const Mat& hermitian);

}  // namespace ionlink
