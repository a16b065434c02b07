#pragma once

#include "mptbf/mpt_model.hpp"

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mptbf {

/// Syntax or consistency error in an input file, tagged with its 1-based
/// line number (0 when the problem is not tied to a single line).
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& message);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct EqnOptions {
    /// When set, every parameter used by a branch must be listed here.
    std::optional<std::set<std::string>> declared_parameters;
};

/// Parses EQN text: whitespace-separated records `tree category term`,
/// where term is a `*`-joined product of names, `(1-name)` complements and
/// numeric constants in [0,1]. An optional leading line holding a single
/// integer (the legacy record count) is ignored. `#` starts a comment.
///
/// Parameters are declared in order of first appearance. Numeric constants
/// become fixed parameters named by their literal text. Tree sums are not
/// checked here; see MptModel::validate.
MptModel parse_eqn(std::string_view text, const EqnOptions& options = {});

}  // namespace mptbf
