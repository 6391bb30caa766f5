#pragma once

#include <cstdint>

#include "ionlink/linalg.hpp"
#include "ionlink/rng.hpp"

#include "json.hpp"

namespace ionlink {

// Two-pass electron-shelving readout. Pass 1 reads |0> as bright; pass 2
// swaps the qubit with a pi-pulse first so |1> reads bright. Population
// outside the qubit manifold stays dark in both passes and is removed by
// keeping bright outcomes only.
struct ReadoutErrors {
    double eps_b = 0.0;   // |0> read dark
    double eps_d = 0.0;   // |1> read bright
    double eps_d2 = 0.0;  // leaked population read bright
    double eps_s = 0.0;   // per-pulse scattering out of the manifold
    double eps_pi = 0.0;  // pi-pulse bit-flip error

    void validate() const;
    nlohmann::json to_json() const;
    static ReadoutErrors from_json(const nlohmann::json& j);
};

// Column-stochastic-style map from populations (n0, n1, n2) to
// (bright, dark, total) counts for one pass. The second pass composes the
// pi-pulse flip and scattering matrices, dropping the eps_d2 * eps_s cross
// term in the bright row.
Eigen::Matrix3d forward_matrix(int pass, const ReadoutErrors& e);

struct TrialCounts {
    std::int64_t n_b1 = 0, n_d1 = 0;
    std::int64_t n_b2 = 0, n_d2 = 0;
    std::int64_t k = 0;
};

TrialCounts simulate_trials(double p0, double p1, double p2, const ReadoutErrors& e,
                            std::int64_t k, RandomStream& rng);

struct PopulationEstimate {
    Eigen::Vector3d n = Eigen::Vector3d::Zero();
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
};

// Inverts the two bright counts plus the trial total back to populations,
// with first-order multinomial covariance propagation.
PopulationEstimate correct_counts(const TrialCounts& c, const ReadoutErrors& e);

enum class IonBasis { Z, X, Y };

const char* ion_basis_name(IonBasis b);
IonBasis ion_basis_from_name(const std::string& s);

// Rotation bringing the requested measurement basis onto Z: X maps |+> to
// |0>, Y maps |+i> to |0>, Z is the identity.
Mat2 ion_basis_rotation(IonBasis basis);

// One readout of an ion qubit state: basis rotation (with per-pulse
// scattering leak when a rotation pulse is applied), then the pass's bright
// statistics. Leaked trials are bright only via eps_d2.
bool ion_outcome(const Mat2& rho_ion, IonBasis basis, const ReadoutErrors& e, bool leaked,
                 int pass, RandomStream& rng);

}  // namespace ionlink
