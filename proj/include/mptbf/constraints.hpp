#pragma once

#include "mptbf/mpt_model.hpp"
#include "mptbf/reparam.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mptbf {

/// Contents of a constraint file. One directive per line, `#` comments:
///
///     order(A): c1 < c2 < c3
///     order(B): u1 < u2
///     prior: g Beta(2,2)
///     alias: u2 = u1
///     fixed: a = 0.5
struct ConstraintSet {
    std::vector<OrderChain> chains;
    std::map<std::string, BetaShape> priors;
    std::map<std::string, std::string> aliases;
    std::map<std::string, double> fixed;
};

/// Throws ParseError (see eqn.hpp) with the offending line.
ConstraintSet parse_constraints(std::string_view text);

/// Checks that every chain names distinct free parameters of the model and
/// that chains are pairwise disjoint. Returns problems, empty when valid.
std::vector<std::string> validate_chains(const MptModel& model, const std::vector<OrderChain>& chains);

/// Checks chains plus custom priors (known, free, not in a chain, positive shapes).
std::vector<std::string> validate_constraints(const MptModel& model, const ConstraintSet& constraints);

/// Applies the alias/fixed directives to the model.
MptModel apply_roles(const MptModel& model, const ConstraintSet& constraints);

/// Equality version of the chains: every chain member is aliased to the
/// chain's first parameter. This is the "no change across conditions" model.
MptModel collapse_chains(const MptModel& model, const std::vector<OrderChain>& chains);

}  // namespace mptbf
