#pragma once

#include "mptbf/mpt_model.hpp"
#include "mptbf/priors.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace mptbf {

struct SamplerConfig {
    std::size_t draws = 25000;  // retained draws per chain
    std::size_t warmup = 5000;
    std::size_t thin = 1;
    std::size_t chains = 4;
    std::uint64_t seed = 1;
    double target_acceptance = 0.44;
    std::size_t workers = 0;  // 0: one per hardware thread
};

/// Post-warmup draws of all chains, stacked chain by chain.
struct PosteriorChain {
    std::vector<std::string> parameters;
    Space space = Space::Theta;
    Eigen::MatrixXd theta;        // original scale
    Eigen::MatrixXd coordinates;  // sampled space (theta or mixed eta)
    std::size_t n_chains = 0;
    std::size_t draws_per_chain = 0;
    std::size_t warmup = 0;
    std::size_t thin = 1;
    std::uint64_t seed = 0;
    std::vector<double> acceptance;  // per coordinate, averaged over chains
    double acceptance_rate = 0.0;
    std::vector<double> rhat;  // per parameter; NaN with a single chain

    std::size_t size() const { return static_cast<std::size_t>(theta.rows()); }
    double max_rhat() const;
};

struct ParameterSummary {
    std::string name;
    double mean = 0.0;
    double q025 = 0.0;
    double q975 = 0.0;
};

/// Posterior means and central 95% intervals on the theta scale.
std::vector<ParameterSummary> summarize(const PosteriorChain& posterior);

/// Adaptive componentwise random-walk Metropolis on the logit of each
/// coordinate of the prior's space. Per-coordinate step sizes are tuned
/// towards the target acceptance rate during warmup and frozen afterwards.
/// Chains run in parallel with independent seeded generators.
///
/// Throws std::runtime_error if no start point with finite target is found
/// within 100 prior draws.
PosteriorChain sample_posterior(const Likelihood& likelihood, const PriorSpec& prior, const SamplerConfig& cfg);
PosteriorChain sample_posterior(const MptModel& model, const Dataset& data, const PriorSpec& prior,
                                const SamplerConfig& cfg);

enum class Estimator { Importance, Encompassing, Analytic, Quadrature };
std::string to_string(Estimator e);

struct MarginalLikelihoodEstimate {
    double log_ml = 0.0;
    double se_log = 0.0;
    std::size_t n_samples = 0;
    Estimator estimator = Estimator::Importance;
    double ess = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
};

struct ImportanceConfig {
    std::size_t samples = 100000;
    std::uint64_t seed = 2;
    double defense_weight = 0.05;
    /// Independent generator streams. Fixed so results do not depend on the
    /// number of worker threads.
    std::size_t blocks = 16;
    std::size_t workers = 0;
};

/// Importance-sampling estimate of log p(y). The proposal is a product of
/// per-coordinate betas moment-matched to the posterior draws, each mixed
/// with the prior marginal at `defense_weight`. The standard error of the
/// log estimate follows from the weight variance by the delta method.
/// Data with no observations short-circuit to log p(y) = 0 exactly.
MarginalLikelihoodEstimate estimate_ml_importance(const Likelihood& likelihood, const PriorSpec& prior,
                                                  const PosteriorChain& posterior, const ImportanceConfig& cfg);

/// Encompassing-prior identity: the constrained model's marginal likelihood
/// is the unconstrained one times the posterior probability of the
/// constraints divided by their prior probability prod 1/P_k!. The posterior
/// must come from the full model with uniform priors on the chain members.
MarginalLikelihoodEstimate estimate_ml_encompassing(const PosteriorChain& full_posterior,
                                                    const MarginalLikelihoodEstimate& full_ml,
                                                    const std::vector<OrderChain>& chains);

struct BayesFactorResult {
    std::string first;
    std::string second;
    double log_bf = 0.0;
    double se_log_bf = 0.0;
};

/// log B = log p(y|first) - log p(y|second); standard errors combined as
/// independent. Throws std::invalid_argument on non-finite inputs.
BayesFactorResult bayes_factor(const MarginalLikelihoodEstimate& first, const MarginalLikelihoodEstimate& second,
                               std::string first_name = "first", std::string second_name = "second");

}  // namespace mptbf
