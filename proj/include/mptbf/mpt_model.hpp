#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mptbf {

/// Raised for structurally invalid models (undeclared parameters, alias
/// cycles, categories shared between trees, ...).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Polarity { Direct, Complement };

struct Factor {
    std::string parameter;
    Polarity polarity = Polarity::Direct;

    bool operator==(const Factor&) const = default;
};

/// One path through a processing tree. Its probability is the product of
/// theta (Direct) or 1 - theta (Complement) over the factors.
struct Branch {
    std::string category;
    std::vector<Factor> factors;
};

struct FreeRole {
    bool operator==(const FreeRole&) const = default;
};
struct AliasRole {
    std::string target;
    bool operator==(const AliasRole&) const = default;
};
struct FixedRole {
    double value = 0.0;
    bool operator==(const FixedRole&) const = default;
};
using ParameterRole = std::variant<FreeRole, AliasRole, FixedRole>;

struct Parameter {
    std::string name;
    ParameterRole role = FreeRole{};
};

struct Tree {
    std::string id;
    std::vector<std::string> categories;  // order of first appearance
    std::vector<Branch> branches;
};

struct CategoryRef {
    std::size_t tree = 0;
    std::string name;
};

/// An MPT model. Immutable after construction; the constructor validates
/// structure and compiles the branch products against the free parameter
/// vector, which is ordered by parameter declaration.
class MptModel {
public:
    MptModel(std::vector<Tree> trees, std::vector<Parameter> parameters);

    const std::vector<Tree>& trees() const { return trees_; }
    const std::vector<Parameter>& parameters() const { return parameters_; }
    const std::vector<std::string>& free_parameters() const { return free_names_; }
    std::size_t num_free() const { return free_names_.size(); }

    /// Flat category list, grouped by tree in tree order.
    const std::vector<CategoryRef>& categories() const { return categories_; }
    std::size_t num_categories() const { return categories_.size(); }
    std::optional<std::size_t> category_index(std::string_view name) const;
    std::optional<std::size_t> tree_index(std::string_view id) const;
    /// Half-open range [first, last) of flat category indices for a tree.
    std::pair<std::size_t, std::size_t> tree_category_range(std::size_t tree) const;

    std::optional<std::size_t> free_index(std::string_view name) const;
    const Parameter* find_parameter(std::string_view name) const;

    /// Returns a copy with the roles of the named parameters replaced.
    MptModel with_roles(const std::map<std::string, ParameterRole>& roles) const;

    /// Category probabilities aligned with categories(). Throws
    /// std::domain_error if theta has the wrong size or leaves [0,1].
    std::vector<double> category_probabilities(std::span<const double> theta) const;
    void category_probabilities(std::span<const double> theta, std::span<double> out) const;
    std::map<std::string, double> probability_map(std::span<const double> theta) const;

    /// d p_c / d theta_k, row-major [category][free parameter].
    std::vector<double> probability_jacobian(std::span<const double> theta) const;

    /// Semantic checks that cannot be made structurally: each tree's
    /// probabilities must sum to one. Checked at deterministic random
    /// interior points. Returns human-readable problems, empty when valid.
    std::vector<std::string> validate() const;

private:
    struct CompiledFactor {
        int index = -1;  // free parameter index, -1 for a constant
        double constant = 1.0;
        bool complement = false;
    };
    struct CompiledBranch {
        std::size_t category = 0;
        std::vector<CompiledFactor> factors;
    };

    void compile();

    std::vector<Tree> trees_;
    std::vector<Parameter> parameters_;
    std::vector<std::string> free_names_;
    std::vector<CategoryRef> categories_;
    std::vector<std::size_t> tree_offsets_;
    std::vector<CompiledBranch> compiled_;
};

/// Raw per-category response counts, keyed by (tree, category).
struct CountRecord {
    std::string tree;
    std::string category;
    long long count = 0;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<CountRecord> records);

    /// CSV with header `tree,category,count`; LF or CRLF line endings.
    static Dataset parse_csv(std::string_view text);
    std::string to_csv() const;

    const std::vector<CountRecord>& records() const { return records_; }
    long long total() const;

private:
    std::vector<CountRecord> records_;
};

/// A model bound to a dataset. Precomputes the aligned counts and the
/// multinomial coefficient so that evaluation inside samplers is cheap.
class Likelihood {
public:
    Likelihood(MptModel model, const Dataset& data);

    const MptModel& model() const { return model_; }
    std::span<const long long> counts() const { return counts_; }
    std::span<const long long> tree_totals() const { return totals_; }
    double log_coefficient() const { return log_coefficient_; }
    bool empty() const;

    /// Product-multinomial log-likelihood including the multinomial
    /// coefficient. -inf if a category with a positive count has zero
    /// probability.
    double operator()(std::span<const double> theta) const;
    std::vector<double> gradient(std::span<const double> theta) const;

private:
    MptModel model_;
    std::vector<long long> counts_;
    std::vector<long long> totals_;
    double log_coefficient_ = 0.0;
};

double log_likelihood(const MptModel& model, const Dataset& data, std::span<const double> theta);

}  // namespace mptbf
