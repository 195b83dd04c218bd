#include "biwcm/solvers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

namespace biwcm {

namespace {

constexpr int kMaxHalvings = 30;
constexpr double kArmijo = 1e-4;

void require_solvable(ModelKind kind) {
    if (is_merca(kind)) throw Error("model " + to_string(kind) + " has no multipliers to solve for");
}

double link_log_term(ModelKind kind, double x) {
    return kind == ModelKind::biwcm_d ? std::log(-std::expm1(-x)) : std::log(x);
}

// Strength constraints where nodes with equal strength share one variable.
// `*_mult` holds class sizes; with all multiplicities 1 this is the full system.
struct Problem {
    ModelKind kind;
    std::vector<double> row_target, row_mult;
    std::vector<double> col_target, col_mult;

    std::size_t n_row_classes() const { return row_target.size(); }
    std::size_t n_col_classes() const { return col_target.size(); }
};

Problem unit_problem(ModelKind kind, const StrengthVectors& target) {
    return {kind,
            target.row_strengths, std::vector<double>(target.row_strengths.size(), 1.0),
            target.col_strengths, std::vector<double>(target.col_strengths.size(), 1.0)};
}

void check_shapes(std::span<const double> theta, std::span<const double> eta, const StrengthVectors& target) {
    if (theta.size() != target.row_strengths.size() || eta.size() != target.col_strengths.size()) {
        throw Error("multiplier vectors do not match the strength vectors");
    }
}

void require_feasible(std::span<const double> theta, std::span<const double> eta) {
    if (!is_feasible(theta, eta)) throw Error("multipliers outside the domain: some theta_i + eta_a <= 0");
}

struct Expectation {
    std::vector<double> rows;
    std::vector<double> cols;
};

Expectation expected(const Problem& p, std::span<const double> theta, std::span<const double> eta) {
    Expectation e{std::vector<double>(theta.size(), 0.0), std::vector<double>(eta.size(), 0.0)};
    for (std::size_t a = 0; a < theta.size(); ++a) {
        for (std::size_t b = 0; b < eta.size(); ++b) {
            const double mean = link_mean(p.kind, theta[a] + eta[b]);
            e.rows[a] += p.col_mult[b] * mean;
            e.cols[b] += p.row_mult[a] * mean;
        }
    }
    return e;
}

double residual_of(const Problem& p, const Expectation& e) {
    double worst = 0.0;
    for (std::size_t a = 0; a < e.rows.size(); ++a) {
        worst = std::max(worst, std::abs(e.rows[a] - p.row_target[a]) / p.row_target[a]);
    }
    for (std::size_t b = 0; b < e.cols.size(); ++b) {
        worst = std::max(worst, std::abs(e.cols[b] - p.col_target[b]) / p.col_target[b]);
    }
    return std::isnan(worst) ? std::numeric_limits<double>::infinity() : worst;
}

double loglik(const Problem& p, std::span<const double> theta, std::span<const double> eta) {
    double sum = 0.0;
    for (std::size_t a = 0; a < theta.size(); ++a) {
        double row = 0.0;
        for (std::size_t b = 0; b < eta.size(); ++b) row += p.col_mult[b] * link_log_term(p.kind, theta[a] + eta[b]);
        sum += p.row_mult[a] * (row - p.row_target[a] * theta[a]);
    }
    for (std::size_t b = 0; b < eta.size(); ++b) sum -= p.col_mult[b] * p.col_target[b] * eta[b];
    return sum;
}

// Full fixed-point proposal, returned as a displacement from the current iterate.
Multipliers fixed_point_direction(const Problem& p, std::span<const double> theta, std::span<const double> eta) {
    const auto e = expected(p, theta, eta);
    Multipliers d{std::vector<double>(theta.size()), std::vector<double>(eta.size())};
    for (std::size_t a = 0; a < theta.size(); ++a) {
        const double ratio = e.rows[a] / p.row_target[a];
        d.theta[a] = p.kind == ModelKind::biwcm_d ? std::log(ratio) : theta[a] * (ratio - 1.0);
    }
    for (std::size_t b = 0; b < eta.size(); ++b) {
        const double ratio = e.cols[b] / p.col_target[b];
        d.eta[b] = p.kind == ModelKind::biwcm_d ? std::log(ratio) : eta[b] * (ratio - 1.0);
    }
    return d;
}

Multipliers quasi_newton_direction(const Problem& p, std::span<const double> theta, std::span<const double> eta) {
    std::vector<double> row_mean(theta.size(), 0.0), row_var(theta.size(), 0.0);
    std::vector<double> col_mean(eta.size(), 0.0), col_var(eta.size(), 0.0);
    for (std::size_t a = 0; a < theta.size(); ++a) {
        for (std::size_t b = 0; b < eta.size(); ++b) {
            const double x = theta[a] + eta[b];
            const double mean = link_mean(p.kind, x);
            const double var = link_variance(p.kind, x);
            row_mean[a] += p.col_mult[b] * mean;
            row_var[a] += p.col_mult[b] * var;
            col_mean[b] += p.row_mult[a] * mean;
            col_var[b] += p.row_mult[a] * var;
        }
    }
    // -gradient / diagonal Hessian; multiplicities cancel in the ratio.
    Multipliers d{std::vector<double>(theta.size()), std::vector<double>(eta.size())};
    for (std::size_t a = 0; a < theta.size(); ++a) d.theta[a] = (row_mean[a] - p.row_target[a]) / row_var[a];
    for (std::size_t b = 0; b < eta.size(); ++b) d.eta[b] = (col_mean[b] - p.col_target[b]) / col_var[b];
    return d;
}

// Solves (-H) d = grad with the last column variable pinned to remove the gauge
// null direction. Returns nullopt when the reduced Hessian is not positive definite.
std::optional<Multipliers> full_newton_direction(const Problem& p, std::span<const double> theta,
                                                 std::span<const double> eta) {
    const std::size_t nr = theta.size();
    const std::size_t nc = eta.size();
    const std::size_t dim = nr + nc - 1;
    if (dim == 0) return Multipliers{std::vector<double>(nr, 0.0), std::vector<double>(nc, 0.0)};

    Eigen::MatrixXd neg_h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nr + nc), static_cast<Eigen::Index>(nr + nc));
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nr + nc));
    for (std::size_t a = 0; a < nr; ++a) {
        for (std::size_t b = 0; b < nc; ++b) {
            const double x = theta[a] + eta[b];
            const double w = p.row_mult[a] * p.col_mult[b];
            const double mean = link_mean(p.kind, x);
            const double var = link_variance(p.kind, x);
            const auto ia = static_cast<Eigen::Index>(a);
            const auto jb = static_cast<Eigen::Index>(nr + b);
            neg_h(ia, ia) += w * var;
            neg_h(jb, jb) += w * var;
            neg_h(ia, jb) += w * var;
            neg_h(jb, ia) += w * var;
            grad(ia) += w * mean;
            grad(jb) += w * mean;
        }
    }
    for (std::size_t a = 0; a < nr; ++a) grad(static_cast<Eigen::Index>(a)) -= p.row_mult[a] * p.row_target[a];
    for (std::size_t b = 0; b < nc; ++b) grad(static_cast<Eigen::Index>(nr + b)) -= p.col_mult[b] * p.col_target[b];

    const auto n = static_cast<Eigen::Index>(dim);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_h.topLeftCorner(n, n));
    if (ldlt.info() != Eigen::Success) return std::nullopt;
    const auto diag = ldlt.vectorD();
    const double scale = neg_h.diagonal().head(n).cwiseAbs().maxCoeff();
    if (!(diag.minCoeff() > 1e-14 * scale)) return std::nullopt;
    const Eigen::VectorXd step = ldlt.solve(grad.head(n));
    if (!step.allFinite()) return std::nullopt;

    Multipliers d{std::vector<double>(nr), std::vector<double>(nc, 0.0)};
    for (std::size_t a = 0; a < nr; ++a) d.theta[a] = step(static_cast<Eigen::Index>(a));
    for (std::size_t b = 0; b + 1 < nc; ++b) d.eta[b] = step(static_cast<Eigen::Index>(nr + b));
    return d;
}

Multipliers advance(std::span<const double> theta, std::span<const double> eta, const Multipliers& d, double t) {
    Multipliers m{std::vector<double>(theta.begin(), theta.end()), std::vector<double>(eta.begin(), eta.end())};
    for (std::size_t a = 0; a < theta.size(); ++a) m.theta[a] += t * d.theta[a];
    for (std::size_t b = 0; b < eta.size(); ++b) m.eta[b] += t * d.eta[b];
    return m;
}

StepResult damped_to_domain(std::span<const double> theta, std::span<const double> eta, const Multipliers& d) {
    double t = 1.0;
    for (int h = 0; h <= kMaxHalvings; ++h, t *= 0.5) {
        auto next = advance(theta, eta, d, t);
        if (is_feasible(next.theta, next.eta)) return {std::move(next), h, false};
    }
    throw Error("step could not be kept inside the domain after 30 halvings");
}

// Groups equal values; returns class representatives and the class of each element.
struct Classes {
    std::vector<double> value;
    std::vector<double> count;
    std::vector<std::size_t> of;
};

Classes group_equal(const std::vector<double>& v, bool enabled) {
    Classes c;
    c.of.resize(v.size());
    if (!enabled) {
        c.value = v;
        c.count.assign(v.size(), 1.0);
        for (std::size_t k = 0; k < v.size(); ++k) c.of[k] = k;
        return c;
    }
    std::map<double, std::size_t> seen;
    for (std::size_t k = 0; k < v.size(); ++k) {
        auto [it, fresh] = seen.emplace(v[k], c.value.size());
        if (fresh) {
            c.value.push_back(v[k]);
            c.count.push_back(0.0);
        }
        c.count[it->second] += 1.0;
        c.of[k] = it->second;
    }
    return c;
}


// Gradient of the log-likelihood dotted with a direction.
double directional_slope(const Problem& p, std::span<const double> theta, std::span<const double> eta,
                         const Multipliers& d) {
    const auto e = expected(p, theta, eta);
    double slope = 0.0;
    for (std::size_t a = 0; a < theta.size(); ++a) slope += p.row_mult[a] * (e.rows[a] - p.row_target[a]) * d.theta[a];
    for (std::size_t b = 0; b < eta.size(); ++b) slope += p.col_mult[b] * (e.cols[b] - p.col_target[b]) * d.eta[b];
    return slope;
}

// L(x + t d) - L(x), summed as per-link differences so that small gains are not
// lost to cancellation between two large likelihood values.
double likelihood_gain(const Problem& p, std::span<const double> theta, std::span<const double> eta,
                       const Multipliers& d, double t) {
    double gain = 0.0;
    for (std::size_t a = 0; a < theta.size(); ++a) {
        double row = 0.0;
        for (std::size_t b = 0; b < eta.size(); ++b) {
            const double x = theta[a] + eta[b];
            const double delta = t * (d.theta[a] + d.eta[b]);
            // discrete: ln(1-e^{-x-delta}) - ln(1-e^{-x}) = ln(1 - expm1(-delta) * mean(x))
            const double term = p.kind == ModelKind::biwcm_d ? std::log1p(-std::expm1(-delta) / std::expm1(x))
                                                             : std::log1p(delta / x);
            row += p.col_mult[b] * term;
        }
        gain += p.row_mult[a] * (row - p.row_target[a] * t * d.theta[a]);
    }
    for (std::size_t b = 0; b < eta.size(); ++b) gain -= p.col_mult[b] * p.col_target[b] * t * d.eta[b];
    return gain;
}

double weighted_count(const std::vector<double>& mult) {
    double n = 0.0;
    for (double m : mult) n += m;
    return n;
}

Multipliers initial_point(const Problem& p, double total_weight, SeedStrategy seed) {
    const double n_rows = weighted_count(p.row_mult);
    const double n_cols = weighted_count(p.col_mult);
    Multipliers m{std::vector<double>(p.n_row_classes()), std::vector<double>(p.n_col_classes())};

    if (seed == SeedStrategy::uniform) {
        // every expected weight equal to the average cell weight
        const double mean = total_weight / (n_rows * n_cols);
        const double x = p.kind == ModelKind::biwcm_d ? std::log1p(1.0 / mean) : 1.0 / mean;
        std::fill(m.theta.begin(), m.theta.end(), 0.5 * x);
        std::fill(m.eta.begin(), m.eta.end(), 0.5 * x);
        return m;
    }

    if (p.kind == ModelKind::biwcm_c) {
        for (std::size_t a = 0; a < m.theta.size(); ++a) m.theta[a] = n_cols / (2.0 * p.row_target[a]);
        for (std::size_t b = 0; b < m.eta.size(); ++b) m.eta[b] = n_rows / (2.0 * p.col_target[b]);
        return m;
    }

    const double root_w = std::sqrt(total_weight);
    for (std::size_t a = 0; a < m.theta.size(); ++a) m.theta[a] = -std::log(p.row_target[a] / root_w);
    for (std::size_t b = 0; b < m.eta.size(); ++b) m.eta[b] = -std::log(p.col_target[b] / root_w);

    // Dense data gives nonpositive sums. Shift theta so the smallest sum is the
    // geometric parameter matching the largest Balassa expectation instead.
    const double min_sum = *std::min_element(m.theta.begin(), m.theta.end()) +
                           *std::min_element(m.eta.begin(), m.eta.end());
    const double max_s = *std::max_element(p.row_target.begin(), p.row_target.end());
    const double max_sigma = *std::max_element(p.col_target.begin(), p.col_target.end());
    const double floor_sum = std::log1p(total_weight / (max_s * max_sigma));
    if (min_sum < floor_sum) {
        for (double& t : m.theta) t += floor_sum - min_sum;
    }
    return m;
}

Multipliers expand(const Multipliers& reduced, const Classes& rows, const Classes& cols) {
    Multipliers full{std::vector<double>(rows.of.size()), std::vector<double>(cols.of.size())};
    for (std::size_t i = 0; i < rows.of.size(); ++i) full.theta[i] = reduced.theta[rows.of[i]];
    for (std::size_t a = 0; a < cols.of.size(); ++a) full.eta[a] = reduced.eta[cols.of[a]];
    return full;
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::biwcm_d: return "biwcm_d";
        case ModelKind::biwcm_c: return "biwcm_c";
        case ModelKind::merca_d: return "merca_d";
        case ModelKind::merca_c: return "merca_c";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "biwcm_d") return ModelKind::biwcm_d;
    if (name == "biwcm_c") return ModelKind::biwcm_c;
    if (name == "merca_d") return ModelKind::merca_d;
    if (name == "merca_c") return ModelKind::merca_c;
    throw InputError("unknown model '" + std::string(name) + "'");
}

bool is_discrete(ModelKind kind) noexcept { return kind == ModelKind::biwcm_d || kind == ModelKind::merca_d; }
bool is_merca(ModelKind kind) noexcept { return kind == ModelKind::merca_d || kind == ModelKind::merca_c; }

std::string to_string(SolverMethod method) {
    switch (method) {
        case SolverMethod::fixed_point: return "fixed_point";
        case SolverMethod::newton: return "newton";
        case SolverMethod::quasi_newton: return "quasi_newton";
        case SolverMethod::closed_form: return "closed_form";
    }
    return "unknown";
}

SolverMethod parse_solver_method(std::string_view name) {
    if (name == "fixed_point") return SolverMethod::fixed_point;
    if (name == "newton") return SolverMethod::newton;
    if (name == "quasi_newton") return SolverMethod::quasi_newton;
    if (name == "closed_form") return SolverMethod::closed_form;
    throw InputError("unknown solver method '" + std::string(name) + "'");
}

void SolverConfig::validate() const {
    if (!(tolerance > 0.0)) throw InputError("solver tolerance must be positive");
    if (max_iterations < 1) throw InputError("max_iterations must be at least 1");
    if (method == SolverMethod::closed_form) throw InputError("closed_form is not an iterative method");
}

SolverMethod default_method(ModelKind kind) {
    switch (kind) {
        case ModelKind::biwcm_d: return SolverMethod::quasi_newton;
        case ModelKind::biwcm_c: return SolverMethod::fixed_point;
        default: return SolverMethod::closed_form;
    }
}

double link_mean(ModelKind kind, double x) {
    switch (kind) {
        case ModelKind::biwcm_d: return 1.0 / std::expm1(x);
        case ModelKind::biwcm_c: return 1.0 / x;
        default: throw Error("link_mean needs a BiWCM model");
    }
}

double link_variance(ModelKind kind, double x) {
    switch (kind) {
        case ModelKind::biwcm_d: {
            // e^{-x} / (1 - e^{-x})^2 = mean (1 + mean)
            const double mean = 1.0 / std::expm1(x);
            return mean * (1.0 + mean);
        }
        case ModelKind::biwcm_c: return 1.0 / (x * x);
        default: throw Error("link_variance needs a BiWCM model");
    }
}

bool is_feasible(std::span<const double> theta, std::span<const double> eta) {
    if (theta.empty() || eta.empty()) return true;
    for (double t : theta) {
        if (!std::isfinite(t)) return false;
    }
    for (double e : eta) {
        if (!std::isfinite(e)) return false;
    }
    const double min_sum = *std::min_element(theta.begin(), theta.end()) + *std::min_element(eta.begin(), eta.end());
    return min_sum > 0.0 && std::isfinite(min_sum);
}

double log_likelihood_biwcm_d(std::span<const double> theta, std::span<const double> eta,
                              const StrengthVectors& target) {
    return log_likelihood(ModelKind::biwcm_d, theta, eta, target);
}

double log_likelihood_biwcm_c(std::span<const double> theta, std::span<const double> eta,
                              const StrengthVectors& target) {
    return log_likelihood(ModelKind::biwcm_c, theta, eta, target);
}

double log_likelihood(ModelKind kind, std::span<const double> theta, std::span<const double> eta,
                      const StrengthVectors& target) {
    require_solvable(kind);
    check_shapes(theta, eta, target);
    require_feasible(theta, eta);
    return loglik(unit_problem(kind, target), theta, eta);
}

Multipliers gradient(ModelKind kind, std::span<const double> theta, std::span<const double> eta,
                     const StrengthVectors& target) {
    require_solvable(kind);
    check_shapes(theta, eta, target);
    require_feasible(theta, eta);
    const auto e = expected(unit_problem(kind, target), theta, eta);
    Multipliers g{e.rows, e.cols};
    for (std::size_t i = 0; i < theta.size(); ++i) g.theta[i] -= target.row_strengths[i];
    for (std::size_t a = 0; a < eta.size(); ++a) g.eta[a] -= target.col_strengths[a];
    return g;
}

Matrix<double> hessian(ModelKind kind, std::span<const double> theta, std::span<const double> eta) {
    require_solvable(kind);
    require_feasible(theta, eta);
    const std::size_t nr = theta.size();
    Matrix<double> h(nr + eta.size(), nr + eta.size(), 0.0);
    for (std::size_t i = 0; i < nr; ++i) {
        for (std::size_t a = 0; a < eta.size(); ++a) {
            const double var = link_variance(kind, theta[i] + eta[a]);
            h(i, i) -= var;
            h(nr + a, nr + a) -= var;
            h(i, nr + a) = -var;
            h(nr + a, i) = -var;
        }
    }
    return h;
}

StrengthVectors expected_strengths(ModelKind kind, std::span<const double> theta, std::span<const double> eta) {
    require_solvable(kind);
    require_feasible(theta, eta);
    StrengthVectors target{std::vector<double>(theta.size(), 1.0), std::vector<double>(eta.size(), 1.0), 0.0};
    auto e = expected(unit_problem(kind, target), theta, eta);
    StrengthVectors out{std::move(e.rows), std::move(e.cols), 0.0};
    for (double s : out.row_strengths) out.total_weight += s;
    return out;
}

double strength_residual(ModelKind kind, std::span<const double> theta, std::span<const double> eta,
                         const StrengthVectors& target) {
    require_solvable(kind);
    check_shapes(theta, eta, target);
    require_feasible(theta, eta);
    const auto p = unit_problem(kind, target);
    return residual_of(p, expected(p, theta, eta));
}

StepResult fixed_point_step(ModelKind kind, std::span<const double> theta, std::span<const double> eta,
                            const StrengthVectors& target) {
    require_solvable(kind);
    check_shapes(theta, eta, target);
    require_feasible(theta, eta);
    return damped_to_domain(theta, eta, fixed_point_direction(unit_problem(kind, target), theta, eta));
}

StepResult newton_step(ModelKind kind, std::span<const double> theta, std::span<const double> eta,
                       const StrengthVectors& target, bool quasi) {
    require_solvable(kind);
    check_shapes(theta, eta, target);
    require_feasible(theta, eta);
    const auto p = unit_problem(kind, target);
    if (!quasi) {
        if (auto d = full_newton_direction(p, theta, eta)) return damped_to_domain(theta, eta, *d);
    }
    auto step = damped_to_domain(theta, eta, quasi_newton_direction(p, theta, eta));
    step.hessian_fallback = !quasi;
    return step;
}

void canonicalize_gauge(std::vector<double>& theta, std::vector<double>& eta) {
    if (theta.empty() || eta.empty()) return;
    const double shift = 0.5 * (*std::min_element(theta.begin(), theta.end()) -
                                *std::min_element(eta.begin(), eta.end()));
    for (double& t : theta) t -= shift;
    for (double& e : eta) e += shift;
}

FittedModel solve(const WeightedBipartiteGraph& g, ModelKind kind, const SolverConfig& config,
                  const IterationObserver& observer) {
    require_solvable(kind);
    config.validate();
    if (kind == ModelKind::biwcm_d && g.mode() != WeightMode::discrete) {
        // re-validates integrality, naming the offending cell
        (void)g.with_mode(WeightMode::discrete);
    }
    const auto start = std::chrono::steady_clock::now();
    const auto target = strengths(g);
    for (std::size_t i = 0; i < g.n_rows(); ++i) {
        if (!(target.row_strengths[i] > 0.0)) throw InputError("row '" + g.row_labels()[i] + "' has zero strength");
    }
    for (std::size_t a = 0; a < g.n_cols(); ++a) {
        if (!(target.col_strengths[a] > 0.0)) throw InputError("column '" + g.col_labels()[a] + "' has zero strength");
    }

    const SolverMethod method = config.method.value_or(default_method(kind));
    const auto row_classes = group_equal(target.row_strengths, config.reduce_degeneracy);
    const auto col_classes = group_equal(target.col_strengths, config.reduce_degeneracy);
    const Problem p{kind, row_classes.value, row_classes.count, col_classes.value, col_classes.count};

    Multipliers x = initial_point(p, target.total_weight, config.seed_strategy);
    double ll = loglik(p, x.theta, x.eta);
    double res = residual_of(p, expected(p, x.theta, x.eta));
    Multipliers best = x;
    double best_res = res;
    int iterations = 0;
    bool fallback = false;
    bool stalled = false;
    double last_gain = 0.0;
    if (observer) observer({0, res, ll, 1.0, 0.0});

    while (res > config.tolerance && iterations < config.max_iterations) {
        Multipliers d;
        switch (method) {
            case SolverMethod::fixed_point: d = fixed_point_direction(p, x.theta, x.eta); break;
            case SolverMethod::quasi_newton: d = quasi_newton_direction(p, x.theta, x.eta); break;
            default:
                if (auto full = full_newton_direction(p, x.theta, x.eta)) {
                    d = std::move(*full);
                } else {
                    d = quasi_newton_direction(p, x.theta, x.eta);
                    fallback = true;
                }
        }

        // Armijo backtracking: the iterate must stay feasible and gain at least a
        // fraction of the first-order increase.
        const double slope = directional_slope(p, x.theta, x.eta, d);
        bool accepted = false;
        double t = 1.0;
        for (int h = 0; h <= kMaxHalvings; ++h, t *= 0.5) {
            auto candidate = advance(x.theta, x.eta, d, t);
            if (!is_feasible(candidate.theta, candidate.eta)) continue;
            const double gain = likelihood_gain(p, x.theta, x.eta, d, t);
            if (!(gain >= kArmijo * t * slope)) continue;
            x = std::move(candidate);
            ll += gain;
            last_gain = gain;
            accepted = true;
            break;
        }
        if (!accepted) {
            stalled = true;
            break;
        }
        ++iterations;
        res = residual_of(p, expected(p, x.theta, x.eta));
        if (res < best_res) {
            best_res = res;
            best = x;
        }
        if (observer) observer({iterations, res, ll, t, last_gain});
    }

    const bool converged = res <= config.tolerance;
    const Multipliers& chosen = converged ? x : best;
    auto full = expand(chosen, row_classes, col_classes);
    canonicalize_gauge(full.theta, full.eta);

    FittedModel fm;
    fm.model = kind;
    fm.theta = std::move(full.theta);
    fm.eta = std::move(full.eta);
    fm.row_labels = g.row_labels();
    fm.col_labels = g.col_labels();
    fm.strengths = target;
    fm.diagnostics.method = method;
    fm.diagnostics.iterations = iterations;
    fm.diagnostics.residual = converged ? res : best_res;
    fm.diagnostics.log_likelihood = loglik(p, chosen.theta, chosen.eta);
    fm.diagnostics.converged = converged;
    fm.diagnostics.hessian_fallback = fallback;
    fm.diagnostics.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!converged) {
        const std::string why = stalled ? "line search stalled" : "iteration budget exhausted";
        throw ConvergenceError(to_string(kind) + " fit did not converge (" + why + ", residual " +
                                   std::to_string(fm.diagnostics.residual) + " after " +
                                   std::to_string(iterations) + " iterations)",
                               std::move(fm));
    }
    return fm;
}

FittedModel fit_merca(const WeightedBipartiteGraph& g, ModelKind kind) {
    if (!is_merca(kind)) throw Error("fit_merca needs a MERCA model");
    if (kind == ModelKind::merca_d && g.mode() != WeightMode::discrete) (void)g.with_mode(WeightMode::discrete);
    FittedModel fm;
    fm.model = kind;
    fm.row_labels = g.row_labels();
    fm.col_labels = g.col_labels();
    fm.strengths = strengths(g);
    fm.diagnostics.method = SolverMethod::closed_form;
    return fm;
}

FittedModel fit(const WeightedBipartiteGraph& g, ModelKind kind, const SolverConfig& config) {
    return is_merca(kind) ? fit_merca(g, kind) : solve(g, kind, config);
}

}  // namespace biwcm
