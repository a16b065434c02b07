#pragma once

#include "mptbf/reparam.hpp"

#include <cstdint>
#include <random>

namespace mptbf {

using Rng = std::mt19937_64;

/// Mixes a base seed and a stream index into an independent 64-bit seed
/// (splitmix64 finalizer). Distinct streams give distinct seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

Rng make_rng(std::uint64_t seed);

double sample_beta(Rng& rng, BetaShape shape);

/// log Beta(a,b) density; -inf outside [0,1].
double log_beta_pdf(double x, BetaShape shape);

}  // namespace mptbf
