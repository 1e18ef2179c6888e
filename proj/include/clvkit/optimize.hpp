#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace clvkit {

using Objective = std::function<double(std::span<const double>)>;

struct OptimizerConfig {
    double initial_simplex_scale{0.5};
    /// Stop once both the objective spread and the vertex spread of the simplex fall below this.
    double tolerance{1e-8};
    std::size_t max_iterations{10000};
    /// Number of fresh simplices rebuilt around the best point after the first run.
    std::size_t restarts{1};

    void validate() const;
};

struct OptimResult {
    std::vector<double> argmin;
    double objective_value{0.0};
    /// Total simplex iterations over all runs; never exceeds max_iterations.
    std::size_t iterations{0};
    std::size_t evaluations{0};
    bool converged{false};
};

/// Derivative-free Nelder-Mead minimization (reflection 1, expansion 2, contraction 0.5, shrink 0.5).
/// Non-finite objective values inside the run are treated as +infinity.
/// Throws InputError when the objective is not finite at x0.
[[nodiscard]] OptimResult nelder_mead(const Objective& objective, std::span<const double> x0,
                                      const OptimizerConfig& config = {});

inline constexpr double kHessianRelativeStep = 1e-4;
inline constexpr double kHessianMinStep = 1e-6;

/// Central finite-difference Hessian. Coordinate i uses step max(relative_step * |x_i|, 1e-6).
/// Throws NumericError if any evaluation is non-finite.
[[nodiscard]] Eigen::MatrixXd numerical_hessian(const Objective& objective, std::span<const double> x,
                                                double relative_step = kHessianRelativeStep);

/// Central finite-difference gradient with the same step rule as numerical_hessian.
[[nodiscard]] std::vector<double> numerical_gradient(const Objective& objective, std::span<const double> x,
                                                     double relative_step = kHessianRelativeStep);

} // namespace clvkit
