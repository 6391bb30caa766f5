#include "ionlink/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace ionlink {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, double initial_step, double x_tol,
                             double f_tol, int max_iter) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> pts(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += initial_step;
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);

    NelderMeadResult res;
    int it = 0;
    for (; it < max_iter; ++it) {
        std::vector<std::size_t> order(n + 1);
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front(), worst = order.back();

        double spread = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            spread = std::max(spread, std::abs(pts[worst][i] - pts[best][i]));
        if (spread < x_tol && std::abs(vals[worst] - vals[best]) < f_tol) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t k = 0; k <= n; ++k) {
            if (k == worst) continue;
            for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i] / static_cast<double>(n);
        }
        auto blend = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t i = 0; i < n; ++i)
                p[i] = centroid[i] + coef * (pts[worst][i] - centroid[i]);
            return p;
        };

        auto reflected = blend(-1.0);
        const double fr = f(reflected);
        if (fr < vals[order[0]]) {
            auto expanded = blend(-2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                pts[worst] = expanded;
                vals[worst] = fe;
            } else {
                pts[worst] = reflected;
                vals[worst] = fr;
            }
        } else if (fr < vals[order[n - 1]]) {
            pts[worst] = reflected;
            vals[worst] = fr;
        } else {
            auto contracted = blend(0.5);
            const double fc = f(contracted);
            if (fc < vals[worst]) {
                pts[worst] = contracted;
                vals[worst] = fc;
            } else {
                for (std::size_t k = 0; k <= n; ++k) {
                    if (k == best) continue;
                    for (std::size_t i = 0; i < n; ++i)
                        pts[k][i] = pts[best][i] + 0.5 * (pts[k][i] - pts[best][i]);
                    vals[k] = f(pts[k]);
                }
            }
        }
    }
    const auto best_it = std::min_element(vals.begin(), vals.end());
    res.x = pts[static_cast<std::size_t>(best_it - vals.begin())];
    res.value = *best_it;
    res.iterations = it;
    return res;
}

LbfgsResult lbfgs_minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& fg,
    Eigen::VectorXd x0, int max_iter, double grad_tol, double step_tol) {
    const Eigen::Index n = x0.size();
    constexpr int kHistory = 8;
    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    Eigen::VectorXd x = std::move(x0), grad(n);
    double fx = fg(x, grad);

    LbfgsResult best;
    best.x = x;
    best.value = fx;
    best.grad_norm = grad.norm();

    int it = 0;
    for (; it < max_iter; ++it) {
        const double gnorm = grad.norm();
        if (gnorm < grad_tol) {
            best.converged = true;
            break;
        }
        // two-loop recursion
        Eigen::VectorXd q = grad;
        std::vector<double> alpha(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            const double gamma =
                s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Eigen::VectorXd dir = -q;
        if (dir.dot(grad) >= 0.0) dir = -grad;  // fall back to steepest descent

        // Armijo backtracking
        double step = 1.0;
        const double slope = dir.dot(grad);
        Eigen::VectorXd x_new(n), grad_new(n);
        double f_new = fx;
        bool accepted = false;
        for (int ls = 0; ls < 50; ++ls) {
            x_new = x + step * dir;
            f_new = fg(x_new, grad_new);
            if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        const double improvement = fx - f_new;
        Eigen::VectorXd s = x_new - x;
        Eigen::VectorXd yv = grad_new - grad;
        const double sy = s.dot(yv);
        if (sy > 1e-12) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(yv));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > kHistory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        x = std::move(x_new);
        grad = std::move(grad_new);
        fx = f_new;
        if (fx < best.value) {
            best.x = x;
            best.value = fx;
            best.grad_norm = grad.norm();
        }
        if (improvement < step_tol) {
            best.converged = true;
            break;
        }
    }
    best.iterations = it;
    return best;
}

}  // namespace ionlink
