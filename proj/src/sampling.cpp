#include "biwcm/sampling.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "biwcm/nullmodels.hpp"

namespace biwcm {

namespace {

// Per-link law: geometric with log-parameter ln q, or exponential with a rate.
// A link that can only be zero has log_q = -inf or rate = +inf.
struct LinkLaw {
    bool geometric = true;
    double log_q = 0.0;
    double rate = 0.0;
};

LinkLaw law_of(const FittedModel& fm, std::size_t i, std::size_t a) {
    LinkLaw law;
    law.geometric = is_discrete(fm.model);
    const double inf = std::numeric_limits<double>::infinity();
    if (!is_merca(fm.model)) {
        const double x = fm.theta[i] + fm.eta[a];
        if (!(x > 0.0) || !std::isfinite(x)) throw Error("multipliers outside the domain: theta_i + eta_a <= 0");
        law.log_q = -x;
        law.rate = x;
        return law;
    }
    const double b = expected_weight(fm, i, a);
    if (b == 0.0) {
        law.log_q = -inf;
        law.rate = inf;
    } else {
        law.log_q = -std::log1p(1.0 / b);  // ln(b / (1 + b))
        law.rate = 1.0 / b;
    }
    return law;
}

double unit_interval(std::uint64_t bits) {
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

EnsembleSample sample(const FittedModel& fm, std::uint64_t seed, std::uint64_t index) {
    const std::size_t nr = fm.n_rows();
    const std::size_t nc = fm.n_cols();
    if (!is_merca(fm.model) && (fm.theta.size() != nr || fm.eta.size() != nc)) {
        throw Error("fitted model has inconsistent multiplier vectors");
    }
    if (fm.strengths.row_strengths.size() != nr || fm.strengths.col_strengths.size() != nc) {
        throw Error("fitted model has inconsistent strength vectors");
    }

    EnsembleSample out{Matrix<double>(nr, nc, 0.0), seed, index, fm.model};
    for (std::size_t i = 0; i < nr; ++i) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                          static_cast<std::uint32_t>(i)};
        std::mt19937_64 engine(seq);
        for (std::size_t a = 0; a < nc; ++a) {
            const double log_u = std::log(unit_interval(engine()));
            const auto law = law_of(fm, i, a);
            double w = 0.0;
            if (law.geometric) {
                if (std::isfinite(law.log_q)) w = std::floor(log_u / law.log_q);
            } else if (std::isfinite(law.rate)) {
                w = -log_u / law.rate;
            }
            out.weights(i, a) = w == 0.0 ? 0.0 : w;  // no -0.0
        }
    }
    return out;
}

EnsembleStats ensemble_stats(const FittedModel& fm, std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw InputError("ensemble statistics need at least one sample");
    const std::size_t nr = fm.n_rows();
    const std::size_t nc = fm.n_cols();
    EnsembleStats st;
    st.link_mean = Matrix<double>(nr, nc, 0.0);
    Matrix<double> link_m2(nr, nc, 0.0);
    st.row_strength_mean.assign(nr, 0.0);
    st.col_strength_mean.assign(nc, 0.0);
    std::vector<double> row_m2(nr, 0.0), col_m2(nc, 0.0);

    auto welford = [](double& mean, double& m2, double x, double n) {
        const double delta = x - mean;
        mean += delta / n;
        m2 += delta * (x - mean);
    };

    for (std::size_t k = 0; k < n_samples; ++k) {
        const auto s = sample(fm, seed, k);
        const double n = static_cast<double>(k + 1);
        std::vector<double> col_sum(nc, 0.0);
        for (std::size_t i = 0; i < nr; ++i) {
            double row_sum = 0.0;
            for (std::size_t a = 0; a < nc; ++a) {
                const double w = s.weights(i, a);
                welford(st.link_mean(i, a), link_m2(i, a), w, n);
                row_sum += w;
                col_sum[a] += w;
            }
            welford(st.row_strength_mean[i], row_m2[i], row_sum, n);
        }
        for (std::size_t a = 0; a < nc; ++a) welford(st.col_strength_mean[a], col_m2[a], col_sum[a], n);
    }

    st.n_samples = n_samples;
    const double denom = n_samples > 1 ? static_cast<double>(n_samples - 1) : 1.0;
    st.link_variance = Matrix<double>(nr, nc, 0.0);
    for (std::size_t i = 0; i < nr; ++i) {
        for (std::size_t a = 0; a < nc; ++a) st.link_variance(i, a) = link_m2(i, a) / denom;
    }
    st.row_strength_variance.resize(nr);
    st.col_strength_variance.resize(nc);
    for (std::size_t i = 0; i < nr; ++i) st.row_strength_variance[i] = row_m2[i] / denom;
    for (std::size_t a = 0; a < nc; ++a) st.col_strength_variance[a] = col_m2[a] / denom;
    return st;
}

}  // namespace biwcm
