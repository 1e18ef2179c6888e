#include "clvkit/optimize.hpp"

#include "clvkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace clvkit {

void OptimizerConfig::validate() const {
    if (!(tolerance > 0.0)) throw InputError("optimizer tolerance must be positive");
    if (max_iterations < 1) throw InputError("optimizer max_iterations must be >= 1");
    if (!(initial_simplex_scale > 0.0)) throw InputError("optimizer initial_simplex_scale must be positive");
}

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

using Point = std::vector<double>;

class Simplex {
public:
    Simplex(const Objective& objective, std::size_t& evaluations)
        : objective_(objective), evaluations_(evaluations) {}

    double evaluate(const Point& p) {
        ++evaluations_;
        const double v = objective_(p);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    }

    void build(const Point& origin, double origin_value, double scale) {
        const std::size_t n = origin.size();
        vertices_.assign(n + 1, origin);
        values_.assign(n + 1, origin_value);
        for (std::size_t i = 0; i < n; ++i) {
            vertices_[i + 1][i] += scale;
            values_[i + 1] = evaluate(vertices_[i + 1]);
        }
    }

    void order() {
        std::vector<std::size_t> idx(values_.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) { return values_[l] < values_[r]; });
        std::vector<Point> v;
        std::vector<double> f;
        v.reserve(idx.size());
        f.reserve(idx.size());
        for (auto i : idx) {
            v.push_back(std::move(vertices_[i]));
            f.push_back(values_[i]);
        }
        vertices_ = std::move(v);
        values_ = std::move(f);
    }

    [[nodiscard]] bool collapsed(double tolerance) const {
        if (!(values_.back() - values_.front() <= tolerance)) return false;
        for (std::size_t i = 1; i < vertices_.size(); ++i) {
            for (std::size_t j = 0; j < vertices_[i].size(); ++j) {
                if (std::fabs(vertices_[i][j] - vertices_[0][j]) > tolerance) return false;
            }
        }
        return true;
    }

    // One Nelder-Mead step. Assumes vertices are ordered best to worst.
    void step() {
        const std::size_t n = vertices_.size() - 1;
        Point centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) centroid[j] += vertices_[i][j];
        }
        for (auto& c : centroid) c /= static_cast<double>(n);

        auto along = [&](double coeff) {
            Point p(n);
            for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + coeff * (vertices_[n][j] - centroid[j]);
            return p;
        };

        Point reflected = along(-kReflect);
        const double fr = evaluate(reflected);
        if (fr < values_[0]) {
            Point expanded = along(-kReflect * kExpand);
            const double fe = evaluate(expanded);
            if (fe < fr) {
                replace_worst(std::move(expanded), fe);
            } else {
                replace_worst(std::move(reflected), fr);
            }
            return;
        }
        if (fr < values_[n - 1]) {
            replace_worst(std::move(reflected), fr);
            return;
        }
        const bool outside = fr < values_[n];
        Point contracted = along(outside ? -kReflect * kContract : kContract);
        const double fc = evaluate(contracted);
        if (fc < (outside ? fr : values_[n])) {
            replace_worst(std::move(contracted), fc);
            return;
        }
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                vertices_[i][j] = vertices_[0][j] + kShrink * (vertices_[i][j] - vertices_[0][j]);
            }
            values_[i] = evaluate(vertices_[i]);
        }
    }

    [[nodiscard]] const Point& best() const { return vertices_.front(); }
    [[nodiscard]] double best_value() const { return values_.front(); }

private:
    void replace_worst(Point p, double f) {
        vertices_.back() = std::move(p);
        values_.back() = f;
    }

    const Objective& objective_;
    std::size_t& evaluations_;
    std::vector<Point> vertices_;
    std::vector<double> values_;
};

} // namespace

OptimResult nelder_mead(const Objective& objective, std::span<const double> x0, const OptimizerConfig& config) {
    config.validate();
    if (x0.empty()) throw InputError("nelder_mead: empty starting point");

    OptimResult result;
    Point start(x0.begin(), x0.end());
    const double f0 = objective(start);
    result.evaluations = 1;
    if (!std::isfinite(f0)) throw InputError("nelder_mead: objective is not finite at the starting point");

    Simplex simplex(objective, result.evaluations);
    Point origin = start;
    double origin_value = f0;
    for (std::size_t run = 0; run <= config.restarts; ++run) {
        simplex.build(origin, origin_value, config.initial_simplex_scale);
        bool run_converged = false;
        while (result.iterations < config.max_iterations) {
            simplex.order();
            if (simplex.collapsed(config.tolerance)) {
                run_converged = true;
                break;
            }
            simplex.step();
            ++result.iterations;
        }
        simplex.order();
        run_converged = run_converged || simplex.collapsed(config.tolerance);
        origin = simplex.best();
        origin_value = simplex.best_value();
        result.converged = run_converged;
        if (!run_converged) break;
    }
    result.argmin = origin;
    result.objective_value = origin_value;
    return result;
}

namespace {

double hessian_step(double xi, double relative_step) {
    return std::max(relative_step * std::fabs(xi), kHessianMinStep);
}

double checked(const Objective& objective, const std::vector<double>& p) {
    const double v = objective(p);
    if (!std::isfinite(v)) throw NumericError("finite difference: objective evaluation is not finite");
    return v;
}

} // namespace

Eigen::MatrixXd numerical_hessian(const Objective& objective, std::span<const double> x, double relative_step) {
    if (!(relative_step > 0.0)) throw InputError("numerical_hessian: step must be positive");
    const auto n = static_cast<Eigen::Index>(x.size());
    std::vector<double> p(x.begin(), x.end());
    std::vector<double> h(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) h[i] = hessian_step(x[i], relative_step);

    const double f0 = checked(objective, p);
    Eigen::MatrixXd hess(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        p[ui] = x[ui] + h[ui];
        const double fp = checked(objective, p);
        p[ui] = x[ui] - h[ui];
        const double fm = checked(objective, p);
        p[ui] = x[ui];
        hess(i, i) = (fp - 2.0 * f0 + fm) / (h[ui] * h[ui]);

        for (Eigen::Index j = 0; j < i; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            auto corner = [&](double si, double sj) {
                p[ui] = x[ui] + si * h[ui];
                p[uj] = x[uj] + sj * h[uj];
                const double v = checked(objective, p);
                p[ui] = x[ui];
                p[uj] = x[uj];
                return v;
            };
            const double v = (corner(1, 1) - corner(1, -1) - corner(-1, 1) + corner(-1, -1)) / (4.0 * h[ui] * h[uj]);
            hess(i, j) = v;
            hess(j, i) = v;
        }
    }
    return 0.5 * (hess + hess.transpose());
}

std::vector<double> numerical_gradient(const Objective& objective, std::span<const double> x, double relative_step) {
    std::vector<double> p(x.begin(), x.end());
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = hessian_step(x[i], relative_step);
        p[i] = x[i] + h;
        const double fp = checked(objective, p);
        p[i] = x[i] - h;
        const double fm = checked(objective, p);
        p[i] = x[i];
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

} // namespace clvkit
