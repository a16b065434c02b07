#include "mptbf/inference.hpp"

#include "mptbf/random.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace mptbf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

BetaShape moment_match(const Eigen::VectorXd& x) {
    const double n = static_cast<double>(x.size());
    const double mean = x.mean();
    const double var = n > 1 ? (x.array() - mean).square().sum() / (n - 1) : 0.0;
    const double m = std::clamp(mean, 1e-9, 1.0 - 1e-9);
    double common = var > 0.0 ? m * (1.0 - m) / var - 1.0 : 1e6;
    if (!std::isfinite(common) || common <= 0.0) return BetaShape{1.0, 1.0};
    common = std::min(common, 1e6);
    return BetaShape{m * common, (1.0 - m) * common};
}

struct Component {
    BetaShape fitted;
    BetaShape defense;
};

}  // namespace

std::string to_string(Estimator e) {
    switch (e) {
    case Estimator::Importance: return "importance";
    case Estimator::Encompassing: return "encompassing";
    case Estimator::Analytic: return "analytic";
    case Estimator::Quadrature: return "quadrature";
    }
    return "unknown";
}

MarginalLikelihoodEstimate estimate_ml_importance(const Likelihood& lik, const PriorSpec& prior,
                                                  const PosteriorChain& posterior, const ImportanceConfig& cfg) {
    if (prior.parameters() != lik.model().free_parameters())
        throw std::invalid_argument("prior coordinates do not match the model's free parameters");
    if (posterior.space != prior.space() || posterior.parameters != prior.parameters())
        throw std::invalid_argument("posterior draws were not sampled in this prior's space");
    if (!(cfg.defense_weight >= 0.0 && cfg.defense_weight <= 1.0))
        throw std::invalid_argument("defense weight must lie in [0,1]");
    if (cfg.samples == 0 || cfg.blocks == 0) throw std::invalid_argument("importance sampler needs samples and blocks");

    MarginalLikelihoodEstimate est;
    est.seed = cfg.seed;
    est.n_samples = cfg.samples;
    if (lik.empty()) {
        est.estimator = Estimator::Analytic;
        est.ess = static_cast<double>(cfg.samples);
        return est;
    }
    if (posterior.size() < 2) throw std::invalid_argument("importance sampler needs at least two posterior draws");

    const std::size_t dim = prior.dimension();
    std::vector<Component> comps(dim);
    for (std::size_t j = 0; j < dim; ++j)
        comps[j] = {moment_match(posterior.coordinates.col(static_cast<Eigen::Index>(j))), prior.coordinate_marginal(j)};

    const double w = cfg.defense_weight;
    const double log_w = std::log(w);
    const double log_1mw = std::log1p(-w);
    std::vector<double> log_weights(cfg.samples, kNegInf);
    const std::size_t blocks = std::min(cfg.blocks, cfg.samples);

    detail::parallel_for(blocks, cfg.workers, [&](std::size_t b) {
        const std::size_t first = b * cfg.samples / blocks;
        const std::size_t last = (b + 1) * cfg.samples / blocks;
        auto rng = make_rng(derive_seed(cfg.seed, b));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<double> u(dim), theta(dim);
        for (std::size_t s = first; s < last; ++s) {
            double log_q = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const auto& c = comps[j];
                const bool from_defense = unif(rng) < w;
                double x = sample_beta(rng, from_defense ? c.defense : c.fitted);
                x = std::clamp(x, std::numeric_limits<double>::min(), 1.0 - std::numeric_limits<double>::epsilon() / 2);
                u[j] = x;
                const double lf = w < 1.0 ? log_1mw + log_beta_pdf(x, c.fitted) : kNegInf;
                const double ld = w > 0.0 ? log_w + log_beta_pdf(x, c.defense) : kNegInf;
                log_q += log_add(lf, ld);
            }
            const double lp = log_prior_density(prior, u);
            if (lp == kNegInf) continue;
            prior.to_theta(u, theta);
            const double ll = lik(theta);
            if (ll == kNegInf || std::isnan(ll)) continue;
            log_weights[s] = ll + lp - log_q;
        }
    });

    // Fixed-order reduction keeps results reproducible across worker counts.
    const double max_lw = *std::max_element(log_weights.begin(), log_weights.end());
    const double n = static_cast<double>(cfg.samples);
    if (max_lw == kNegInf || !std::isfinite(max_lw)) {
        est.log_ml = kNegInf;
        est.se_log = std::numeric_limits<double>::infinity();
        est.warnings.push_back("all importance weights are zero");
        return est;
    }
    double sum = 0.0, sum_sq = 0.0;
    for (double lw : log_weights) {
        const double v = std::exp(lw - max_lw);
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    est.log_ml = max_lw + std::log(mean);
    est.se_log = n > 1 ? std::sqrt(var / n) / mean : 0.0;
    est.ess = sum * sum / sum_sq;
    if (est.ess < 0.01 * n)
        est.warnings.push_back("low effective sample size (" + std::to_string(static_cast<long long>(est.ess)) + " of " +
                               std::to_string(cfg.samples) + ")");
    return est;
}

MarginalLikelihoodEstimate estimate_ml_encompassing(const PosteriorChain& full, const MarginalLikelihoodEstimate& full_ml,
                                                    const std::vector<OrderChain>& chains) {
    if (chains.empty()) return full_ml;
    if (full.space != Space::Theta) throw std::invalid_argument("encompassing estimate needs theta-space draws");

    std::vector<std::vector<std::size_t>> idx;
    double log_prior_prob = 0.0;
    for (const auto& c : chains) {
        std::vector<std::size_t> positions;
        for (const auto& name : c.parameters()) {
            auto it = std::find(full.parameters.begin(), full.parameters.end(), name);
            if (it == full.parameters.end())
                throw std::invalid_argument("order chain names '" + name + "', absent from the posterior");
            positions.push_back(static_cast<std::size_t>(it - full.parameters.begin()));
        }
        idx.push_back(std::move(positions));
        log_prior_prob -= std::lgamma(static_cast<double>(c.size()) + 1.0);
    }

    const std::size_t total = full.size();
    if (total == 0) throw std::invalid_argument("encompassing estimate needs posterior draws");
    std::vector<double> inside(total, 0.0);
    for (std::size_t r = 0; r < total; ++r) {
        bool ok = true;
        for (const auto& positions : idx) {
            for (std::size_t k = 1; k < positions.size() && ok; ++k)
                ok = full.theta(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(positions[k - 1])) <=
                     full.theta(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(positions[k]));
            if (!ok) break;
        }
        inside[r] = ok ? 1.0 : 0.0;
    }
    const double hits = std::accumulate(inside.begin(), inside.end(), 0.0);
    const double n = static_cast<double>(total);
    const double frac = hits / n;

    MarginalLikelihoodEstimate est;
    est.estimator = Estimator::Encompassing;
    est.n_samples = total;
    est.seed = full.seed;
    est.warnings = full_ml.warnings;
    if (hits == 0.0) {
        est.log_ml = kNegInf;
        est.se_log = full_ml.se_log;
        est.warnings.push_back("no posterior draws satisfy the order constraints");
        return est;
    }

    // Variance of the hit fraction: binomial, inflated by batch means within
    // chains when the draws are autocorrelated.
    double var_frac = frac * (1.0 - frac) / n;
    const std::size_t per_chain = full.n_chains ? total / full.n_chains : total;
    const auto batch = static_cast<std::size_t>(std::sqrt(static_cast<double>(per_chain)));
    if (batch >= 2 && full.n_chains * per_chain == total) {
        std::vector<double> means;
        for (std::size_t c = 0; c < full.n_chains; ++c)
            for (std::size_t start = 0; start + batch <= per_chain; start += batch) {
                double s = 0.0;
                for (std::size_t k = 0; k < batch; ++k) s += inside[c * per_chain + start + k];
                means.push_back(s / static_cast<double>(batch));
            }
        if (means.size() >= 2) {
            double ss = 0.0;
            for (double m : means) ss += (m - frac) * (m - frac);
            const double bm = static_cast<double>(batch) * ss / static_cast<double>(means.size() - 1) / n;
            var_frac = std::max(var_frac, bm);
        }
    }
    const double se_log_frac = std::sqrt(var_frac) / frac;
    est.log_ml = full_ml.log_ml + std::log(frac) - log_prior_prob;
    est.se_log = std::sqrt(full_ml.se_log * full_ml.se_log + se_log_frac * se_log_frac);
    est.ess = full_ml.ess;
    return est;
}

BayesFactorResult bayes_factor(const MarginalLikelihoodEstimate& first, const MarginalLikelihoodEstimate& second,
                               std::string first_name, std::string second_name) {
    if (!std::isfinite(first.log_ml) || !std::isfinite(second.log_ml))
        throw std::invalid_argument("Bayes factor needs finite marginal likelihoods");
    BayesFactorResult r;
    r.first = std::move(first_name);
    r.second = std::move(second_name);
    r.log_bf = first.log_ml - second.log_ml;
    r.se_log_bf = std::sqrt(first.se_log * first.se_log + second.se_log * second.se_log);
    return r;
}

}  // namespace mptbf
