#include "mptbf/priors.hpp"

#include "mptbf/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace mptbf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_factorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace

PriorSpec::PriorSpec(PriorKind kind, bool adjusted, std::vector<std::string> parameters,
                     std::vector<OrderChain> chains, const std::map<std::string, BetaShape>& betas)
    : kind_(kind), adjusted_(adjusted), parameters_(std::move(parameters)) {
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < parameters_.size(); ++i)
        if (!pos.emplace(parameters_[i], i).second)
            throw std::invalid_argument("duplicate prior coordinate '" + parameters_[i] + "'");

    const bool needs_chain = kind_ == PriorKind::BalancedConstrained || kind_ == PriorKind::Reparameterized;
    if (needs_chain && chains.empty()) throw std::invalid_argument("constrained prior needs at least one order chain");
    if (!needs_chain && !chains.empty()) throw std::invalid_argument("unconstrained prior cannot carry order chains");

    chain_of_.assign(parameters_.size(), -1);
    shapes_.assign(parameters_.size(), BetaShape{});
    for (auto& chain : chains) {
        ChainSlot slot{chain, {}};
        for (const auto& name : chain.parameters()) {
            auto it = pos.find(name);
            if (it == pos.end()) throw std::invalid_argument("order chain names unknown parameter '" + name + "'");
            if (chain_of_[it->second] >= 0)
                throw std::invalid_argument("parameter '" + name + "' belongs to more than one order chain");
            chain_of_[it->second] = static_cast<int>(slots_.size());
            slot.index.push_back(it->second);
        }
        if (kind_ == PriorKind::Reparameterized) {
            const auto shapes = adjusted_ ? adjusted_prior(chain) : std::vector<BetaShape>(chain.size());
            for (std::size_t k = 0; k < chain.size(); ++k) shapes_[slot.index[k]] = shapes[k];
        }
        slots_.push_back(std::move(slot));
    }
    for (const auto& [name, shape] : betas) {
        auto it = pos.find(name);
        if (it == pos.end()) throw std::invalid_argument("prior given for unknown parameter '" + name + "'");
        if (chain_of_[it->second] >= 0)
            throw std::invalid_argument("custom prior given for chain parameter '" + name + "'");
        if (!(shape.a > 0.0 && shape.b > 0.0))
            throw std::invalid_argument("beta shape parameters for '" + name + "' must be positive");
        shapes_[it->second] = shape;
    }
}

PriorSpec PriorSpec::full_uniform(std::vector<std::string> parameters, const std::map<std::string, BetaShape>& betas) {
    return PriorSpec(PriorKind::FullUniform, false, std::move(parameters), {}, betas);
}

PriorSpec PriorSpec::balanced(std::vector<std::string> parameters, std::vector<OrderChain> chains,
                              const std::map<std::string, BetaShape>& betas) {
    return PriorSpec(PriorKind::BalancedConstrained, false, std::move(parameters), std::move(chains), betas);
}

PriorSpec PriorSpec::reparameterized(std::vector<std::string> parameters, std::vector<OrderChain> chains,
                                     bool adjusted, std::optional<Method> method,
                                     const std::map<std::string, BetaShape>& betas) {
    if (method)
        for (auto& c : chains) c = c.with_method(*method);
    return PriorSpec(PriorKind::Reparameterized, adjusted, std::move(parameters), std::move(chains), betas);
}

PriorSpec PriorSpec::custom_beta(std::vector<std::string> parameters, std::vector<BetaShape> shapes) {
    if (shapes.size() != parameters.size()) throw std::invalid_argument("one beta shape per parameter required");
    std::map<std::string, BetaShape> betas;
    for (std::size_t i = 0; i < parameters.size(); ++i) betas[parameters[i]] = shapes[i];
    return PriorSpec(PriorKind::CustomBeta, false, std::move(parameters), {}, betas);
}

PriorSpec PriorSpec::balanced(const OrderChain& chain) { return balanced(chain.parameters(), {chain}); }

PriorSpec PriorSpec::reparameterized(const OrderChain& chain, bool adjusted) {
    return reparameterized(chain.parameters(), {chain}, adjusted);
}

std::vector<OrderChain> PriorSpec::chains() const {
    std::vector<OrderChain> out;
    for (const auto& s : slots_) out.push_back(s.chain);
    return out;
}

std::string PriorSpec::label() const {
    switch (kind_) {
    case PriorKind::FullUniform: return "full-uniform";
    case PriorKind::BalancedConstrained: return "balanced-constrained";
    case PriorKind::CustomBeta: return "custom-beta";
    case PriorKind::Reparameterized: break;
    }
    std::string methods;
    for (const auto& s : slots_) {
        const char m = to_char(s.chain.method());
        if (methods.find(m) == std::string::npos) methods += m;
    }
    return std::string("reparam(") + methods + (adjusted_ ? ",adjusted)" : ",uniform)");
}

BetaShape PriorSpec::coordinate_marginal(std::size_t j) const {
    const int c = chain_of_.at(j);
    if (kind_ == PriorKind::BalancedConstrained && c >= 0) {
        const auto& idx = slots_[static_cast<std::size_t>(c)].index;
        const auto rank = static_cast<double>(std::find(idx.begin(), idx.end(), j) - idx.begin() + 1);
        return BetaShape{rank, static_cast<double>(idx.size()) - rank + 1.0};
    }
    return shapes_[j];
}

void PriorSpec::to_theta(std::span<const double> coordinates, std::span<double> theta) const {
    if (coordinates.size() != dimension() || theta.size() != dimension())
        throw std::invalid_argument("coordinate vector has wrong dimension");
    std::copy(coordinates.begin(), coordinates.end(), theta.begin());
    if (kind_ != PriorKind::Reparameterized) return;
    thread_local std::vector<double> eta, th;
    for (const auto& s : slots_) {
        const std::size_t n = s.index.size();
        eta.resize(n);
        th.resize(n);
        for (std::size_t k = 0; k < n; ++k) eta[k] = coordinates[s.index[k]];
        from_auxiliary(s.chain.method(), eta, th);
        for (std::size_t k = 0; k < n; ++k) theta[s.index[k]] = th[k];
    }
}

std::vector<double> PriorSpec::to_theta(std::span<const double> coordinates) const {
    std::vector<double> theta(dimension());
    to_theta(coordinates, theta);
    return theta;
}

std::vector<double> PriorSpec::to_coordinates(std::span<const double> theta) const {
    if (theta.size() != dimension()) throw std::invalid_argument("theta has wrong dimension");
    std::vector<double> out(theta.begin(), theta.end());
    if (kind_ != PriorKind::Reparameterized) return out;
    for (const auto& s : slots_) {
        std::vector<double> t(s.index.size());
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = theta[s.index[k]];
        const auto e = to_auxiliary(s.chain, t);
        for (std::size_t k = 0; k < t.size(); ++k) out[s.index[k]] = e[k];
    }
    return out;
}

bool PriorSpec::satisfies_constraints(std::span<const double> theta) const {
    for (const auto& s : slots_)
        for (std::size_t k = 1; k < s.index.size(); ++k)
            if (theta[s.index[k - 1]] > theta[s.index[k]]) return false;
    return true;
}

double log_prior_density(const PriorSpec& spec, std::span<const double> x) {
    if (x.size() != spec.dimension())
        throw std::invalid_argument("prior expects " + std::to_string(spec.dimension()) + " coordinates, got " +
                                    std::to_string(x.size()));
    for (double v : x)
        if (!(v >= 0.0 && v <= 1.0)) return kNegInf;

    double lp = 0.0;
    if (spec.kind() == PriorKind::BalancedConstrained) {
        if (!spec.satisfies_constraints(x)) return kNegInf;
        for (const auto& s : spec.slots()) lp += log_factorial(s.index.size());
        std::vector<bool> in_chain(x.size(), false);
        for (const auto& s : spec.slots())
            for (auto j : s.index) in_chain[j] = true;
        for (std::size_t j = 0; j < x.size(); ++j)
            if (!in_chain[j]) lp += log_beta_pdf(x[j], spec.coordinate_marginal(j));
        return lp;
    }
    for (std::size_t j = 0; j < x.size(); ++j) lp += log_beta_pdf(x[j], spec.coordinate_marginal(j));
    return lp;
}

Eigen::MatrixXd sample_prior_coordinates(const PriorSpec& spec, std::size_t n, std::uint64_t seed) {
    const std::size_t dim = spec.dimension();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    auto rng = make_rng(seed);

    std::vector<int> in_chain(dim, -1);
    for (std::size_t c = 0; c < spec.slots().size(); ++c)
        for (auto j : spec.slots()[c].index) in_chain[j] = static_cast<int>(c);

    std::vector<double> eta, theta;
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        for (std::size_t j = 0; j < dim; ++j)
            if (in_chain[j] < 0 || spec.kind() == PriorKind::Reparameterized)
                out(row, static_cast<Eigen::Index>(j)) = sample_beta(rng, spec.coordinate_marginal(j));
        if (spec.kind() != PriorKind::BalancedConstrained) continue;
        // Uniform on the ordered region via the adjusted-prior pushforward.
        for (const auto& s : spec.slots()) {
            const auto shapes = adjusted_prior(s.chain);
            eta.resize(s.index.size());
            theta.resize(s.index.size());
            for (std::size_t k = 0; k < eta.size(); ++k) eta[k] = sample_beta(rng, shapes[k]);
            from_auxiliary(s.chain.method(), eta, theta);
            for (std::size_t k = 0; k < theta.size(); ++k) out(row, static_cast<Eigen::Index>(s.index[k])) = theta[k];
        }
    }
    return out;
}

Eigen::MatrixXd sample_prior(const PriorSpec& spec, std::size_t n, std::uint64_t seed) {
    Eigen::MatrixXd draws = sample_prior_coordinates(spec, n, seed);
    if (spec.space() == Space::Theta) return draws;
    std::vector<double> coords(spec.dimension()), theta(spec.dimension());
    for (Eigen::Index r = 0; r < draws.rows(); ++r) {
        for (std::size_t j = 0; j < coords.size(); ++j) coords[j] = draws(r, static_cast<Eigen::Index>(j));
        spec.to_theta(coords, theta);
        for (std::size_t j = 0; j < coords.size(); ++j) draws(r, static_cast<Eigen::Index>(j)) = theta[j];
    }
    return draws;
}

double marginal_balanced(int i, int P, double x) {
    if (P < 1 || i < 1 || i > P) throw std::out_of_range("marginal index out of range");
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("x outside [0,1]");
    // P * C(P-1, i-1) * x^(i-1) * (1-x)^(P-i). The coefficient is an exact
    // integer and the product of powers commutes, so mirrored arguments give
    // bit-identical results.
    const int n = P - 1;
    const int k = std::min(i - 1, n - (i - 1));
    double coef = 1.0;
    for (int j = 1; j <= k; ++j) coef = coef * static_cast<double>(n - k + j) / static_cast<double>(j);
    return static_cast<double>(P) * coef * (std::pow(x, i - 1) * std::pow(1.0 - x, P - i));
}

double marginal_unbalanced(int i, int P, double x) {
    if (P < 1 || i < 1 || i > P) throw std::out_of_range("marginal index out of range");
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("x outside [0,1]");
    const int m = P - i;
    if (m == 0) return 1.0;
    if (x == 0.0) return std::numeric_limits<double>::infinity();
    return std::exp(m * std::log(-std::log(x)) - log_factorial(static_cast<std::size_t>(m)));
}

}  // namespace mptbf
