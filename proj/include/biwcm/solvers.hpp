#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biwcm/core.hpp"

namespace biwcm {

enum class ModelKind { biwcm_d, biwcm_c, merca_d, merca_c };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);
bool is_discrete(ModelKind kind) noexcept;
bool is_merca(ModelKind kind) noexcept;

enum class SolverMethod { fixed_point, newton, quasi_newton, closed_form };

std::string to_string(SolverMethod method);
SolverMethod parse_solver_method(std::string_view name);

/// Starting point of the iteration.
///   strength_based: continuous theta_i = N_bot / (2 s_i), eta_a = N_top / (2 sigma_a);
///                   discrete theta_i = -ln(s_i / sqrt(W)), eta_a likewise, shifted
///                   so every pair sum is positive.
///   uniform:        every pair sum set so that each expected weight is W / (N_top N_bot).
enum class SeedStrategy { strength_based, uniform };

struct SolverConfig {
    /// Unset means the model default: quasi-Newton for biwcm_d, fixed point for biwcm_c.
    std::optional<SolverMethod> method;
    double tolerance = 1e-8;
    int max_iterations = 5000;
    SeedStrategy seed_strategy = SeedStrategy::strength_based;
    /// Solve nodes with equal strength as a single variable.
    bool reduce_degeneracy = true;

    void validate() const;
};

SolverMethod default_method(ModelKind kind);

struct FitDiagnostics {
    SolverMethod method = SolverMethod::closed_form;
    int iterations = 0;
    /// max relative error of expected vs. observed strengths
    double residual = 0.0;
    double log_likelihood = 0.0;
    double wall_time_seconds = 0.0;
    bool converged = true;
    /// Full Newton hit a singular Hessian at least once and used the diagonal step instead.
    bool hessian_fallback = false;
};

/// A solved null model. For MERCA models theta and eta are empty and only the
/// strengths matter.
struct FittedModel {
    ModelKind model = ModelKind::biwcm_c;
    std::vector<double> theta;
    std::vector<double> eta;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    StrengthVectors strengths;
    FitDiagnostics diagnostics;

    std::size_t n_rows() const noexcept { return row_labels.size(); }
    std::size_t n_cols() const noexcept { return col_labels.size(); }
};

/// Raised when the solver exhausts its iteration budget or stalls. Carries the
/// best iterate found.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, FittedModel best)
        : Error(what), best_(std::move(best)) {}
    const FittedModel& best() const noexcept { return best_; }

private:
    FittedModel best_;
};

struct Multipliers {
    std::vector<double> theta;
    std::vector<double> eta;
};

struct StepResult {
    Multipliers next;
    /// Number of times the step was halved to keep the iterate feasible.
    int halvings = 0;
    bool hessian_fallback = false;
};

struct IterationInfo {
    int iteration = 0;
    double residual = 0.0;
    double log_likelihood = 0.0;
    double step_fraction = 1.0;
    /// likelihood increase of the accepted step
    double likelihood_gain = 0.0;
};

using IterationObserver = std::function<void(const IterationInfo&)>;

// Per-link kernels of the two solvable models, as functions of x = theta_i + eta_a.
double link_mean(ModelKind kind, double x);
double link_variance(ModelKind kind, double x);

/// True iff theta_i + eta_a is finite and strictly positive for every pair.
bool is_feasible(std::span<const double> theta, std::span<const double> eta);

double log_likelihood_biwcm_d(std::span<const double> theta, std::span<const double> eta,
                              const StrengthVectors& target);
double log_likelihood_biwcm_c(std::span<const double> theta, std::span<const double> eta,
                              const StrengthVectors& target);
double log_likelihood(ModelKind kind, std::span<const double> theta, std::span<const double> eta,
                      const StrengthVectors& target);

/// Gradient of the log-likelihood: (d/dtheta, d/deta).
Multipliers gradient(ModelKind kind, std::span<const double> theta, std::span<const double> eta,
                     const StrengthVectors& target);

/// Full Hessian of the log-likelihood, variables ordered (theta_0.., eta_0..).
Matrix<double> hessian(ModelKind kind, std::span<const double> theta, std::span<const double> eta);

/// Expected row and column strengths under the model; total_weight is their sum over rows.
StrengthVectors expected_strengths(ModelKind kind, std::span<const double> theta,
                                   std::span<const double> eta);

/// max over all constraints of |<s> - s*| / s*.
double strength_residual(ModelKind kind, std::span<const double> theta, std::span<const double> eta,
                         const StrengthVectors& target);

/// One fixed-point update (multiplicative for biwcm_c, additive in log space for
/// biwcm_d), halved until the iterate stays feasible.
StepResult fixed_point_step(ModelKind kind, std::span<const double> theta, std::span<const double> eta,
                            const StrengthVectors& target);

/// One Newton (full Hessian) or quasi-Newton (diagonal Hessian) update, halved
/// until the iterate stays feasible. The full Hessian is singular along the
/// gauge direction, so the last eta is held fixed when solving.
StepResult newton_step(ModelKind kind, std::span<const double> theta, std::span<const double> eta,
                       const StrengthVectors& target, bool quasi);

/// Shifts theta down and eta up by the same constant so min(theta) == min(eta).
/// Only pair sums carry meaning; this just makes serialized output reproducible.
void canonicalize_gauge(std::vector<double>& theta, std::vector<double>& eta);

/// Fits biwcm_d or biwcm_c. The graph must have no zero-strength node
/// (see drop_isolated); the discrete model also needs integer weights.
FittedModel solve(const WeightedBipartiteGraph& g, ModelKind kind, const SolverConfig& config = {},
                  const IterationObserver& observer = {});

/// Closed-form MERCA model: nothing to solve, the strengths define every link.
FittedModel fit_merca(const WeightedBipartiteGraph& g, ModelKind kind);

/// solve() for BiWCM models, fit_merca() otherwise. Isolated nodes must
/// already be dropped for BiWCM models.
FittedModel fit(const WeightedBipartiteGraph& g, ModelKind kind, const SolverConfig& config = {});

}  // namespace biwcm
