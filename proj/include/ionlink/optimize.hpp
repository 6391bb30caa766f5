#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace ionlink {

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Derivative-free simplex minimization. Deterministic given the start point.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, double initial_step, double x_tol,
                             double f_tol, int max_iter);

struct LbfgsResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    double grad_norm = 0.0;
};

// Limited-memory quasi-Newton minimization with Armijo backtracking.
// `fg` returns f(x) and writes the gradient. Deterministic given x0.
LbfgsResult lbfgs_minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& fg,
    Eigen::VectorXd x0, int max_iter, double grad_tol, double step_tol);

}  // namespace ionlink
