#include "mptbf/oracle.hpp"

#include <boost/math/distributions/beta.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace mptbf::oracle {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double beta_density(double x, BetaShape s) {
    return boost::math::pdf(boost::math::beta_distribution<double>(s.a, s.b), x);
}

double log_factorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

// log of the fraction of a grid cell lying in theta_1 <= ... <= theta_P
// when the cell's midpoints are given. Midpoints on a shared grid are either
// equal (tied cells, the ordering inside is uniform over permutations) or
// separated by whole cells.
double log_cell_fraction(const std::vector<double>& mid) {
    double lf = 0.0;
    std::size_t run = 1;
    for (std::size_t k = 1; k <= mid.size(); ++k) {
        if (k < mid.size() && mid[k] == mid[k - 1]) {
            ++run;
            continue;
        }
        if (k < mid.size() && mid[k] < mid[k - 1]) return kNegInf;
        lf -= log_factorial(run);
        run = 1;
    }
    return lf;
}

double grid_log_integral(const Likelihood& lik, const PriorSpec& prior, std::size_t n, ConeWeight cone) {
    const std::size_t dim = prior.dimension();
    std::vector<double> mids(n);
    for (std::size_t i = 0; i < n; ++i) mids[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);

    const bool balanced = prior.kind() == PriorKind::BalancedConstrained;
    std::vector<bool> in_chain(dim, false);
    for (const auto& s : prior.slots())
        for (auto j : s.index) in_chain[j] = true;

    double log_norm = 0.0;
    if (balanced && cone == ConeWeight::Normalized)
        for (const auto& s : prior.slots()) log_norm += log_factorial(s.index.size());

    std::vector<std::size_t> counter(dim, 0);
    std::vector<double> coords(dim), theta(dim), chain_mid;
    double acc = kNegInf;
    const double log_cell = -static_cast<double>(dim) * std::log(static_cast<double>(n));
    const std::size_t total = static_cast<std::size_t>(std::pow(static_cast<double>(n), static_cast<double>(dim)));
    for (std::size_t cell = 0; cell < total; ++cell) {
        for (std::size_t j = 0; j < dim; ++j) coords[j] = mids[counter[j]];

        double lp = 0.0;
        if (balanced) {
            lp = log_norm;
            for (const auto& s : prior.slots()) {
                chain_mid.clear();
                for (auto j : s.index) chain_mid.push_back(coords[j]);
                lp += log_cell_fraction(chain_mid);
            }
            for (std::size_t j = 0; j < dim; ++j)
                if (!in_chain[j]) lp += std::log(beta_density(coords[j], prior.coordinate_marginal(j)));
        } else {
            for (std::size_t j = 0; j < dim; ++j) lp += std::log(beta_density(coords[j], prior.coordinate_marginal(j)));
        }
        if (lp != kNegInf) {
            prior.to_theta(coords, theta);
            const double ll = lik(theta);
            if (ll != kNegInf) {
                const double v = ll + lp + log_cell;
                acc = acc == kNegInf ? v : std::max(acc, v) + std::log1p(std::exp(-std::abs(acc - v)));
            }
        }
        for (std::size_t j = 0; j < dim; ++j) {
            if (++counter[j] < n) break;
            counter[j] = 0;
        }
    }
    return acc;
}

}  // namespace

double GridResult::doubling_delta() const { return std::abs(log_ml_refined - log_ml); }

double GridResult::extrapolated() const {
    if (!std::isfinite(log_ml) || !std::isfinite(log_ml_refined)) return log_ml_refined;
    // (4 I_2n - I_n) / 3 in log space.
    const double r = 4.0 - std::exp(log_ml - log_ml_refined);
    return r > 0.0 ? log_ml_refined + std::log(r / 3.0) : log_ml_refined;
}

GridResult grid_ml(const Likelihood& lik, const PriorSpec& prior, std::size_t points_per_dim, ConeWeight cone) {
    if (prior.parameters() != lik.model().free_parameters())
        throw std::invalid_argument("prior coordinates do not match the model's free parameters");
    if (prior.dimension() > 3) throw std::invalid_argument("grid oracle supports at most 3 free dimensions");
    if (points_per_dim < 64) throw std::invalid_argument("grid oracle needs at least 64 points per dimension");
    GridResult r;
    r.points_per_dim = points_per_dim;
    if (lik.empty() && cone == ConeWeight::Normalized) return r;
    r.log_ml = grid_log_integral(lik, prior, points_per_dim, cone);
    r.log_ml_refined = grid_log_integral(lik, prior, 2 * points_per_dim, cone);
    return r;
}

double analytic_full_ml(std::span<const long long> totals) {
    double s = 0.0;
    for (long long n : totals) {
        if (n < 0) throw std::invalid_argument("negative total");
        s -= std::log(static_cast<double>(n) + 1.0);
    }
    return s;
}

double ConeSample::acceptance() const {
    return proposed ? static_cast<double>(draws.rows()) / static_cast<double>(proposed) : 0.0;
}

ConeSample rejection_sample_cone(std::size_t P, std::size_t proposals, std::uint64_t seed) {
    if (P == 0 || P > 7) throw std::invalid_argument("rejection sampler supports 1 <= P <= 7");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> accepted;
    std::vector<double> x(P);
    for (std::size_t i = 0; i < proposals; ++i) {
        for (auto& v : x) v = unif(rng);
        bool ordered = true;
        for (std::size_t k = 1; k < P && ordered; ++k) ordered = x[k - 1] <= x[k];
        if (ordered) accepted.insert(accepted.end(), x.begin(), x.end());
    }
    ConeSample out;
    out.proposed = proposals;
    const auto rows = static_cast<Eigen::Index>(accepted.size() / P);
    out.draws.resize(rows, static_cast<Eigen::Index>(P));
    for (Eigen::Index r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < P; ++j) out.draws(r, static_cast<Eigen::Index>(j)) = accepted[static_cast<std::size_t>(r) * P + j];
    return out;
}

}  // namespace mptbf::oracle
