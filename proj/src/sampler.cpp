#include "mptbf/inference.hpp"

#include "mptbf/random.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mptbf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kEdge = 1e-12;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double logit(double u) { return std::log(u) - std::log1p(-u); }

struct Target {
    const Likelihood& lik;
    const PriorSpec& prior;
    mutable std::vector<double> theta;

    // Log posterior density of the logit coordinates z, evaluated at u = logistic(z).
    double operator()(std::span<const double> u) const {
        double lj = 0.0;
        for (double x : u) {
            if (!(x > 0.0 && x < 1.0)) return kNegInf;
            lj += std::log(x) + std::log1p(-x);
        }
        const double lp = log_prior_density(prior, u);
        if (lp == kNegInf) return kNegInf;
        prior.to_theta(u, theta);
        const double ll = lik(theta);
        if (std::isnan(ll)) return kNegInf;
        return ll + lp + lj;
    }
};

struct ChainResult {
    std::vector<double> coords;  // draws x dim, row-major
    std::vector<double> theta;
    std::vector<double> accepted;  // per coordinate, post-warmup
};

ChainResult run_chain(const Likelihood& lik, const PriorSpec& prior, const SamplerConfig& cfg, std::size_t chain) {
    const std::size_t dim = prior.dimension();
    auto rng = make_rng(derive_seed(cfg.seed, chain));
    Target target{lik, prior, std::vector<double>(dim)};

    std::vector<double> u(dim);
    double current = kNegInf;
    for (int attempt = 0; attempt < 100 && current == kNegInf; ++attempt) {
        const Eigen::MatrixXd init = sample_prior_coordinates(prior, 1, rng());
        for (std::size_t j = 0; j < dim; ++j)
            u[j] = std::clamp(init(0, static_cast<Eigen::Index>(j)), kEdge, 1.0 - kEdge);
        current = target(u);
    }
    if (current == kNegInf)
        throw std::runtime_error("posterior sampler: no prior draw with finite likelihood after 100 attempts");

    std::vector<double> z(dim), step(dim, 1.0);
    for (std::size_t j = 0; j < dim; ++j) z[j] = logit(u[j]);

    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    constexpr std::size_t kBatch = 50;
    std::vector<std::size_t> batch_accept(dim, 0);
    std::size_t batch_index = 0;

    ChainResult out;
    out.coords.reserve(cfg.draws * dim);
    out.theta.reserve(cfg.draws * dim);
    out.accepted.assign(dim, 0.0);

    const std::size_t total = cfg.warmup + cfg.draws * cfg.thin;
    std::vector<double> theta(dim);
    for (std::size_t it = 0; it < total; ++it) {
        const bool warm = it < cfg.warmup;
        for (std::size_t j = 0; j < dim; ++j) {
            const double old_z = z[j];
            const double old_u = u[j];
            z[j] = old_z + step[j] * normal(rng);
            u[j] = logistic(z[j]);
            const double proposal = target(u);
            if (std::log(unif(rng)) < proposal - current) {
                current = proposal;
                if (warm)
                    ++batch_accept[j];
                else
                    out.accepted[j] += 1.0;
            } else {
                z[j] = old_z;
                u[j] = old_u;
            }
        }
        if (warm && (it + 1) % kBatch == 0) {
            ++batch_index;
            const double delta = std::min(1.0, 1.0 / std::sqrt(static_cast<double>(batch_index)));
            for (std::size_t j = 0; j < dim; ++j) {
                const double rate = static_cast<double>(batch_accept[j]) / kBatch;
                step[j] *= std::exp(rate > cfg.target_acceptance ? delta : -delta);
                batch_accept[j] = 0;
            }
        }
        if (!warm && (it - cfg.warmup + 1) % cfg.thin == 0) {
            prior.to_theta(u, theta);
            out.coords.insert(out.coords.end(), u.begin(), u.end());
            out.theta.insert(out.theta.end(), theta.begin(), theta.end());
        }
    }
    const double iters = static_cast<double>(cfg.draws * cfg.thin);
    for (auto& a : out.accepted) a = iters > 0 ? a / iters : 0.0;
    return out;
}

std::vector<double> gelman_rubin(const Eigen::MatrixXd& draws, std::size_t chains, std::size_t n) {
    std::vector<double> rhat(static_cast<std::size_t>(draws.cols()), std::numeric_limits<double>::quiet_NaN());
    if (chains < 2 || n < 2) return rhat;
    for (Eigen::Index j = 0; j < draws.cols(); ++j) {
        std::vector<double> means(chains), vars(chains);
        for (std::size_t c = 0; c < chains; ++c) {
            const auto block = draws.col(j).segment(static_cast<Eigen::Index>(c * n), static_cast<Eigen::Index>(n));
            means[c] = block.mean();
            vars[c] = (block.array() - means[c]).square().sum() / static_cast<double>(n - 1);
        }
        const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(chains);
        double b = 0.0;
        for (double m : means) b += (m - grand) * (m - grand);
        b *= static_cast<double>(n) / static_cast<double>(chains - 1);
        const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / static_cast<double>(chains);
        if (w <= 0.0) continue;
        const double var_plus = (static_cast<double>(n - 1) / static_cast<double>(n)) * w + b / static_cast<double>(n);
        rhat[static_cast<std::size_t>(j)] = std::sqrt(var_plus / w);
    }
    return rhat;
}

}  // namespace

double PosteriorChain::max_rhat() const {
    double m = std::numeric_limits<double>::quiet_NaN();
    for (double r : rhat)
        if (!std::isnan(r) && (std::isnan(m) || r > m)) m = r;
    return m;
}

PosteriorChain sample_posterior(const Likelihood& lik, const PriorSpec& prior, const SamplerConfig& cfg) {
    if (prior.parameters() != lik.model().free_parameters())
        throw std::invalid_argument("prior coordinates do not match the model's free parameters");
    if (cfg.chains == 0 || cfg.draws == 0 || cfg.thin == 0)
        throw std::invalid_argument("sampler needs at least one chain, one draw and thin >= 1");

    const std::size_t dim = prior.dimension();
    std::vector<ChainResult> results(cfg.chains);
    detail::parallel_for(cfg.chains, cfg.workers, [&](std::size_t c) { results[c] = run_chain(lik, prior, cfg, c); });

    PosteriorChain post;
    post.parameters = prior.parameters();
    post.space = prior.space();
    post.n_chains = cfg.chains;
    post.draws_per_chain = cfg.draws;
    post.warmup = cfg.warmup;
    post.thin = cfg.thin;
    post.seed = cfg.seed;
    const auto rows = static_cast<Eigen::Index>(cfg.chains * cfg.draws);
    post.theta.resize(rows, static_cast<Eigen::Index>(dim));
    post.coordinates.resize(rows, static_cast<Eigen::Index>(dim));
    post.acceptance.assign(dim, 0.0);
    for (std::size_t c = 0; c < cfg.chains; ++c) {
        for (std::size_t r = 0; r < cfg.draws; ++r) {
            const auto row = static_cast<Eigen::Index>(c * cfg.draws + r);
            for (std::size_t j = 0; j < dim; ++j) {
                post.theta(row, static_cast<Eigen::Index>(j)) = results[c].theta[r * dim + j];
                post.coordinates(row, static_cast<Eigen::Index>(j)) = results[c].coords[r * dim + j];
            }
        }
        for (std::size_t j = 0; j < dim; ++j) post.acceptance[j] += results[c].accepted[j] / static_cast<double>(cfg.chains);
    }
    post.acceptance_rate =
        dim ? std::accumulate(post.acceptance.begin(), post.acceptance.end(), 0.0) / static_cast<double>(dim) : 0.0;
    post.rhat = gelman_rubin(post.theta, cfg.chains, cfg.draws);
    return post;
}

PosteriorChain sample_posterior(const MptModel& model, const Dataset& data, const PriorSpec& prior,
                                const SamplerConfig& cfg) {
    return sample_posterior(Likelihood(model, data), prior, cfg);
}

std::vector<ParameterSummary> summarize(const PosteriorChain& posterior) {
    std::vector<ParameterSummary> out;
    const auto n = posterior.theta.rows();
    for (Eigen::Index j = 0; j < posterior.theta.cols(); ++j) {
        std::vector<double> col(posterior.theta.col(j).data(), posterior.theta.col(j).data() + n);
        ParameterSummary s;
        s.name = posterior.parameters[static_cast<std::size_t>(j)];
        s.mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n);
        std::sort(col.begin(), col.end());
        // Type-7 quantiles (linear interpolation between order statistics).
        auto quantile = [&](double p) {
            const double h = p * static_cast<double>(n - 1);
            const auto lo = static_cast<std::size_t>(std::floor(h));
            const auto hi = std::min(lo + 1, static_cast<std::size_t>(n - 1));
            return col[lo] + (h - static_cast<double>(lo)) * (col[hi] - col[lo]);
        };
        s.q025 = quantile(0.025);
        s.q975 = quantile(0.975);
        out.push_back(s);
    }
    return out;
}

}  // namespace mptbf
