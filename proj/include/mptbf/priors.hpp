#pragma once

#include "mptbf/reparam.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mptbf {

enum class PriorKind {
    FullUniform,          // independent priors on theta, no order constraint
    BalancedConstrained,  // uniform on the ordered region: density P! per chain on theta
    Reparameterized,      // independent betas on the auxiliary eta of each chain
    CustomBeta,           // explicit Beta(a,b) per coordinate
};

/// Which coordinates a prior (and a sampler working under it) lives in.
enum class Space { Theta, Eta };

/// A prior over a model's free parameters. Coordinates follow the parameter
/// order; under Reparameterized the slots of chain members hold eta instead
/// of theta. Parameters outside every chain carry Beta(1,1) unless a custom
/// shape is given.
class PriorSpec {
public:
    struct ChainSlot {
        OrderChain chain;
        std::vector<std::size_t> index;  // coordinate of each chain member
    };

    static PriorSpec full_uniform(std::vector<std::string> parameters,
                                  const std::map<std::string, BetaShape>& betas = {});
    static PriorSpec balanced(std::vector<std::string> parameters, std::vector<OrderChain> chains,
                              const std::map<std::string, BetaShape>& betas = {});
    /// `method`, when given, overrides the method recorded in every chain.
    static PriorSpec reparameterized(std::vector<std::string> parameters, std::vector<OrderChain> chains,
                                     bool adjusted, std::optional<Method> method = std::nullopt,
                                     const std::map<std::string, BetaShape>& betas = {});
    static PriorSpec custom_beta(std::vector<std::string> parameters, std::vector<BetaShape> shapes);

    /// Single-chain shorthands whose coordinates are exactly the chain members.
    static PriorSpec balanced(const OrderChain& chain);
    static PriorSpec reparameterized(const OrderChain& chain, bool adjusted);

    PriorKind kind() const { return kind_; }
    bool adjusted() const { return adjusted_; }
    Space space() const { return kind_ == PriorKind::Reparameterized ? Space::Eta : Space::Theta; }
    std::size_t dimension() const { return parameters_.size(); }
    const std::vector<std::string>& parameters() const { return parameters_; }
    const std::vector<ChainSlot>& slots() const { return slots_; }
    std::vector<OrderChain> chains() const;
    std::string label() const;

    /// Beta shape of coordinate j for coordinates with an independent prior
    /// factor. For chain members of a balanced prior this is the implied
    /// marginal Beta(i, P - i + 1).
    BetaShape coordinate_marginal(std::size_t j) const;

    void to_theta(std::span<const double> coordinates, std::span<double> theta) const;
    std::vector<double> to_theta(std::span<const double> coordinates) const;
    /// Inverse of to_theta; theta must satisfy the chains.
    std::vector<double> to_coordinates(std::span<const double> theta) const;
    bool satisfies_constraints(std::span<const double> theta) const;

private:
    PriorSpec(PriorKind kind, bool adjusted, std::vector<std::string> parameters, std::vector<OrderChain> chains,
              const std::map<std::string, BetaShape>& betas);

    PriorKind kind_;
    bool adjusted_ = false;
    std::vector<std::string> parameters_;
    std::vector<ChainSlot> slots_;
    std::vector<BetaShape> shapes_;     // per coordinate
    std::vector<int> chain_of_;         // -1 outside every chain
};

/// Log density in the spec's own coordinates (theta, or mixed theta/eta for
/// reparameterized priors). -inf outside the support.
double log_prior_density(const PriorSpec& spec, std::span<const double> coordinates);

/// n draws in the spec's coordinates, one per row. Deterministic in seed.
Eigen::MatrixXd sample_prior_coordinates(const PriorSpec& spec, std::size_t n, std::uint64_t seed);

/// n draws mapped to the original theta scale, one per row. Balanced priors
/// are drawn through the adjusted-prior pushforward rather than rejection.
Eigen::MatrixXd sample_prior(const PriorSpec& spec, std::size_t n, std::uint64_t seed);

/// Marginal density of theta_i (1-based) under the uniform prior on the
/// ordered region of dimension P: Beta(i, P - i + 1).
double marginal_balanced(int i, int P, double x);

/// Marginal density of theta_i implied by uniform eta under method A:
/// (-log x)^(P-i) / (P-i)!. Returns +inf at x = 0 when i < P.
double marginal_unbalanced(int i, int P, double x);

}  // namespace mptbf
