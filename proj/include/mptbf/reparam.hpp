#pragma once

#include <span>
#include <string>
#include <vector>

namespace mptbf {

/// Reparameterizations of a chain theta_1 <= ... <= theta_P onto the unit cube.
///   A: eta_i = theta_i / theta_{i+1}, eta_P = theta_P  ("decrease" ratios)
///   B: eta_1 = theta_1, eta_i = (theta_i - theta_{i-1}) / (1 - theta_{i-1})  ("growth")
enum class Method { A, B };

char to_char(Method m);
Method method_from_string(const std::string& s);

struct BetaShape {
    double a = 1.0;
    double b = 1.0;

    bool operator==(const BetaShape&) const = default;
};

/// An ordered list of distinct parameter names meaning
/// theta_1 <= theta_2 <= ... <= theta_P, plus the reparameterization used for it.
class OrderChain {
public:
    OrderChain(std::vector<std::string> parameters, Method method = Method::A);

    const std::vector<std::string>& parameters() const { return parameters_; }
    std::size_t size() const { return parameters_.size(); }
    Method method() const { return method_; }
    OrderChain with_method(Method m) const { return OrderChain(parameters_, m); }

    bool operator==(const OrderChain&) const = default;

private:
    std::vector<std::string> parameters_;
    Method method_;
};

/// Throws std::invalid_argument unless theta is ordered and inside [0,1].
/// Boundary convention: under A a zero successor gives eta_i = 1; under B a
/// predecessor equal to one gives eta_i = 0.
std::vector<double> to_auxiliary(Method method, std::span<const double> theta);
std::vector<double> to_auxiliary(const OrderChain& chain, std::span<const double> theta);

void from_auxiliary(Method method, std::span<const double> eta, std::span<double> theta);
std::vector<double> from_auxiliary(Method method, std::span<const double> eta);
std::vector<double> from_auxiliary(const OrderChain& chain, std::span<const double> eta);

/// log |det D g^{-1}(eta)|; -inf on the degenerate boundary.
double log_jacobian_det(Method method, std::span<const double> eta);
double log_jacobian_det(const OrderChain& chain, std::span<const double> eta);

/// Independent beta priors on eta that induce the uniform distribution on the
/// ordered region: Beta(i, 1) under A, Beta(1, P - i + 1) under B (1-based i).
std::vector<BetaShape> adjusted_prior(Method method, std::size_t size);
std::vector<BetaShape> adjusted_prior(const OrderChain& chain);

}  // namespace mptbf
