#include "mptbf/reparam.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace mptbf {

namespace {

void check_unit(std::span<const double> x, const char* what) {
    for (double v : x)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(what) + " component outside [0,1]");
}

}  // namespace

char to_char(Method m) { return m == Method::A ? 'A' : 'B'; }

Method method_from_string(const std::string& s) {
    if (s == "A" || s == "a") return Method::A;
    if (s == "B" || s == "b") return Method::B;
    throw std::invalid_argument("unknown reparameterization method '" + s + "' (expected A or B)");
}

OrderChain::OrderChain(std::vector<std::string> parameters, Method method)
    : parameters_(std::move(parameters)), method_(method) {
    if (parameters_.empty()) throw std::invalid_argument("order chain must name at least one parameter");
    std::set<std::string> seen;
    for (const auto& p : parameters_)
        if (!seen.insert(p).second) throw std::invalid_argument("parameter '" + p + "' repeated in order chain");
}

std::vector<double> to_auxiliary(Method method, std::span<const double> theta) {
    check_unit(theta, "theta");
    for (std::size_t i = 1; i < theta.size(); ++i)
        if (theta[i - 1] > theta[i]) throw std::invalid_argument("theta violates the order constraint");

    const std::size_t n = theta.size();
    std::vector<double> eta(n);
    if (n == 0) return eta;
    if (method == Method::A) {
        for (std::size_t i = 0; i + 1 < n; ++i) eta[i] = theta[i + 1] == 0.0 ? 1.0 : theta[i] / theta[i + 1];
        eta[n - 1] = theta[n - 1];
    } else {
        eta[0] = theta[0];
        for (std::size_t i = 1; i < n; ++i)
            eta[i] = theta[i - 1] == 1.0 ? 0.0 : (theta[i] - theta[i - 1]) / (1.0 - theta[i - 1]);
    }
    return eta;
}

std::vector<double> to_auxiliary(const OrderChain& chain, std::span<const double> theta) {
    if (theta.size() != chain.size()) throw std::invalid_argument("theta size does not match chain");
    return to_auxiliary(chain.method(), theta);
}

void from_auxiliary(Method method, std::span<const double> eta, std::span<double> theta) {
    check_unit(eta, "eta");
    const std::size_t n = eta.size();
    if (theta.size() != n) throw std::invalid_argument("output size does not match eta");
    if (method == Method::A) {
        double prod = 1.0;
        for (std::size_t i = n; i-- > 0;) {
            prod *= eta[i];
            theta[i] = prod;
        }
    } else {
        double survive = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            survive *= 1.0 - eta[i];
            theta[i] = 1.0 - survive;
        }
    }
}

std::vector<double> from_auxiliary(Method method, std::span<const double> eta) {
    std::vector<double> theta(eta.size());
    from_auxiliary(method, eta, theta);
    return theta;
}

std::vector<double> from_auxiliary(const OrderChain& chain, std::span<const double> eta) {
    if (eta.size() != chain.size()) throw std::invalid_argument("eta size does not match chain");
    return from_auxiliary(chain.method(), eta);
}

double log_jacobian_det(Method method, std::span<const double> eta) {
    check_unit(eta, "eta");
    const std::size_t n = eta.size();
    double sum = 0.0;
    if (method == Method::A) {
        // diag_i = prod_{j>i} eta_j, so eta_k appears k-1 times (1-based).
        for (std::size_t k = 1; k < n; ++k) sum += static_cast<double>(k) * std::log(eta[k]);
    } else {
        // diag_i = prod_{j<i} (1 - eta_j), so (1 - eta_k) appears P - k times.
        for (std::size_t k = 0; k + 1 < n; ++k) sum += static_cast<double>(n - 1 - k) * std::log1p(-eta[k]);
    }
    return sum;
}

double log_jacobian_det(const OrderChain& chain, std::span<const double> eta) {
    if (eta.size() != chain.size()) throw std::invalid_argument("eta size does not match chain");
    return log_jacobian_det(chain.method(), eta);
}

std::vector<BetaShape> adjusted_prior(Method method, std::size_t size) {
    std::vector<BetaShape> out(size);
    for (std::size_t i = 0; i < size; ++i) {
        const double rank = static_cast<double>(i + 1);
        out[i] = method == Method::A ? BetaShape{rank, 1.0} : BetaShape{1.0, static_cast<double>(size) - rank + 1.0};
    }
    return out;
}

std::vector<BetaShape> adjusted_prior(const OrderChain& chain) { return adjusted_prior(chain.method(), chain.size()); }

}  // namespace mptbf
