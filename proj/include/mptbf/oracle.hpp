#pragma once

#include "mptbf/mpt_model.hpp"
#include "mptbf/priors.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>

namespace mptbf::oracle {

struct GridResult {
    double log_ml = 0.0;          // at points_per_dim
    double log_ml_refined = 0.0;  // at 2 * points_per_dim
    std::size_t points_per_dim = 0;

    /// Change of the log result under grid doubling.
    double doubling_delta() const;
    /// Richardson extrapolation of the two midpoint results (error ratio 4).
    double extrapolated() const;
};

enum class ConeWeight {
    Normalized,    // density P! on the ordered region (the balanced prior)
    Unnormalized,  // bare indicator of the ordered region
};

/// Midpoint-rule integral of likelihood x prior over the prior's coordinate
/// cube (theta, or eta for reparameterized priors), evaluated at n and 2n
/// points per dimension. Prior densities are computed here, not through
/// log_prior_density. Cells on the boundary of an ordered region carry the
/// exact fraction of their volume inside it. At most 3 free dimensions.
GridResult grid_ml(const Likelihood& likelihood, const PriorSpec& prior, std::size_t points_per_dim = 128,
                   ConeWeight cone = ConeWeight::Normalized);

/// log p(y) of a product-binomial model under uniform priors:
/// sum_i log(1 / (n_i + 1)).
double analytic_full_ml(std::span<const long long> totals);

struct ConeSample {
    Eigen::MatrixXd draws;  // accepted draws, one per row
    std::size_t proposed = 0;
    double acceptance() const;
};

/// Accept-reject from the uniform cube: of `proposals` uniform draws keep
/// those with theta_1 <= ... <= theta_P.
ConeSample rejection_sample_cone(std::size_t P, std::size_t proposals, std::uint64_t seed);

}  // namespace mptbf::oracle
