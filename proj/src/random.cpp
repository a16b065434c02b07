#include "mptbf/random.hpp"

#include <cmath>
#include <limits>

namespace mptbf {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

Rng make_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return Rng(seq);
}

double sample_beta(Rng& rng, BetaShape shape) {
    if (shape.a == 1.0 && shape.b == 1.0) return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    std::gamma_distribution<double> ga(shape.a, 1.0);
    std::gamma_distribution<double> gb(shape.b, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    if (x + y == 0.0) return shape.a >= shape.b ? 1.0 : 0.0;
    return x / (x + y);
}

double log_beta_pdf(double x, BetaShape shape) {
    if (!(x >= 0.0 && x <= 1.0)) return -std::numeric_limits<double>::infinity();
    const double lbeta = std::lgamma(shape.a) + std::lgamma(shape.b) - std::lgamma(shape.a + shape.b);
    double v = -lbeta;
    if (shape.a != 1.0) v += (shape.a - 1.0) * std::log(x);
    if (shape.b != 1.0) v += (shape.b - 1.0) * std::log1p(-x);
    return v;
}

}  // namespace mptbf
