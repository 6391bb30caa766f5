#pragma once

#include <string>
#include <vector>

#include "ionlink/emission.hpp"
#include "ionlink/level_system.hpp"

namespace ionlink {

// Master-equation generator in the rotating frame:
//   d rho / dt = -i [H(t), rho] + sum_k (C_k rho C_k^+ - 1/2 {C_k^+ C_k, rho}).
// Frame offsets per manifold are assigned by walking the beam-coupling graph,
// so every drive term is time independent apart from its pulse envelope.
// All internal frequencies are angular (rad/us); rates are 1/us.
class Generator {
public:
    Generator(const LevelSystem& system, std::vector<LaserBeam> beams);

    int dim() const { return dim_; }
    Mat hamiltonian(double t_us) const;
    const std::vector<Mat>& jump_ops() const { return jumps_; }
    // Largest of Rabi, decay and detuning scales, used for step-size checks.
    double fastest_scale() const { return fastest_; }
    bool is_constant() const;

    // Effective non-Hermitian Hamiltonian H - i/2 sum C^+C.
    Mat effective_hamiltonian(double t_us) const;
    // d rho/dt evaluated into `out` (no allocation in the hot path).
    void apply(double t_us, const Mat& rho, Mat& out) const;
    // Full superoperator matrix acting on vec(rho); requires a constant generator.
    Mat superoperator() const;

private:
    int dim_;
    Mat h_static_;                     // diagonal frame + Zeeman terms
    std::vector<Mat> drive_;           // one coupling matrix per beam
    std::vector<Envelope> envelopes_;  // matching envelope per beam
    std::vector<Mat> jumps_;
    Mat decay_diag_;  // -i/2 sum C^+C, diagonal for collective dipole jumps
    double fastest_ = 0.0;
};

struct LindbladRun {
    std::vector<double> t_us;
    std::vector<Mat> rho;
    std::vector<std::string> level_labels;

    double population(std::size_t t_index, int level) const;
    double max_trace_error() const;
    double min_eigenvalue() const;
    void write_csv(std::ostream& os) const;
};

// Fixed-step fourth-order integration. Requires dt <= 0.01 / fastest scale.
LindbladRun evolve(const Mat& rho0, const LevelSystem& system, const std::vector<LaserBeam>& beams,
                   double t0_us, double t1_us, double dt_us, int store_every = 1);

// Propagation of a constant generator through the matrix exponential of the
// superoperator restricted to the matrix units reachable from rho0. Exact and
// fast for long constant-drive stretches; times must be an increasing grid.
LindbladRun propagate_constant(const Mat& rho0, const LevelSystem& system,
                               const std::vector<LaserBeam>& beams,
                               const std::vector<double>& times_us);

struct EmissionPdfResult {
    EmissionTimePDF pdf;              // normalized over the run's grid
    double total_emission_prob = 0.0; // integral of the raw emission density
    double excitation_prob = 0.0;     // expected number of upper-manifold decays
};

// Emission density of one decay channel, split by the upper sublevels
// m = -1/2 (desired) and m = +1/2 (wrong branch).
EmissionPdfResult emission_pdf(const LindbladRun& run, const LevelSystem& system,
                               const std::string& channel_label);

}  // namespace ionlink
