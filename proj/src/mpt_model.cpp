#include "mptbf/mpt_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

namespace mptbf {

namespace {

bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

MptModel::MptModel(std::vector<Tree> trees, std::vector<Parameter> parameters)
    : trees_(std::move(trees)), parameters_(std::move(parameters)) {
    compile();
}

void MptModel::compile() {
    if (trees_.empty()) throw ModelError("model has no trees");

    std::unordered_map<std::string, std::size_t> param_pos;
    for (std::size_t i = 0; i < parameters_.size(); ++i) {
        const auto& p = parameters_[i];
        if (p.name.empty()) throw ModelError("empty parameter name");
        if (!param_pos.emplace(p.name, i).second)
            throw ModelError("duplicate parameter '" + p.name + "'");
        if (const auto* fixed = std::get_if<FixedRole>(&p.role); fixed && !in_unit_interval(fixed->value))
            throw ModelError("fixed parameter '" + p.name + "' outside [0,1]");
    }

    free_names_.clear();
    std::unordered_map<std::string, int> free_pos;
    for (const auto& p : parameters_) {
        if (std::holds_alternative<FreeRole>(p.role)) {
            free_pos.emplace(p.name, static_cast<int>(free_names_.size()));
            free_names_.push_back(p.name);
        }
    }

    // Resolve aliases to a free parameter or a constant.
    std::unordered_map<std::string, CompiledFactor> resolved;
    for (const auto& p : parameters_) {
        std::set<std::string> seen;
        const Parameter* cur = &p;
        while (const auto* alias = std::get_if<AliasRole>(&cur->role)) {
            if (!seen.insert(cur->name).second)
                throw ModelError("alias cycle through parameter '" + p.name + "'");
            auto it = param_pos.find(alias->target);
            if (it == param_pos.end())
                throw ModelError("parameter '" + cur->name + "' aliases undeclared '" + alias->target + "'");
            cur = &parameters_[it->second];
        }
        CompiledFactor f;
        if (const auto* fixed = std::get_if<FixedRole>(&cur->role)) {
            f.constant = fixed->value;
        } else {
            f.index = free_pos.at(cur->name);
        }
        resolved.emplace(p.name, f);
    }

    categories_.clear();
    tree_offsets_.clear();
    std::unordered_map<std::string, std::size_t> cat_pos;
    std::set<std::string> tree_ids;
    for (std::size_t t = 0; t < trees_.size(); ++t) {
        auto& tree = trees_[t];
        if (!tree_ids.insert(tree.id).second) throw ModelError("duplicate tree '" + tree.id + "'");
        if (tree.branches.empty()) throw ModelError("tree '" + tree.id + "' has no branches");
        tree_offsets_.push_back(categories_.size());
        // Categories referenced by branches but not listed are appended.
        for (const auto& b : tree.branches) {
            if (std::find(tree.categories.begin(), tree.categories.end(), b.category) == tree.categories.end())
                tree.categories.push_back(b.category);
        }
        for (const auto& c : tree.categories) {
            auto [it, inserted] = cat_pos.emplace(c, categories_.size());
            if (!inserted) {
                const auto& other = trees_[categories_[it->second].tree].id;
                throw ModelError("category '" + c + "' appears in trees '" + other + "' and '" + tree.id + "'");
            }
            categories_.push_back({t, c});
        }
    }
    tree_offsets_.push_back(categories_.size());

    compiled_.clear();
    for (const auto& tree : trees_) {
        for (const auto& b : tree.branches) {
            CompiledBranch cb;
            cb.category = cat_pos.at(b.category);
            for (const auto& f : b.factors) {
                auto it = resolved.find(f.parameter);
                if (it == resolved.end())
                    throw ModelError("branch of category '" + b.category + "' uses undeclared parameter '" +
                                     f.parameter + "'");
                CompiledFactor cf = it->second;
                cf.complement = f.polarity == Polarity::Complement;
                cb.factors.push_back(cf);
            }
            compiled_.push_back(std::move(cb));
        }
    }
}

std::optional<std::size_t> MptModel::category_index(std::string_view name) const {
    for (std::size_t i = 0; i < categories_.size(); ++i)
        if (categories_[i].name == name) return i;
    return std::nullopt;
}

std::optional<std::size_t> MptModel::tree_index(std::string_view id) const {
    for (std::size_t i = 0; i < trees_.size(); ++i)
        if (trees_[i].id == id) return i;
    return std::nullopt;
}

std::pair<std::size_t, std::size_t> MptModel::tree_category_range(std::size_t tree) const {
    return {tree_offsets_.at(tree), tree_offsets_.at(tree + 1)};
}

std::optional<std::size_t> MptModel::free_index(std::string_view name) const {
    for (std::size_t i = 0; i < free_names_.size(); ++i)
        if (free_names_[i] == name) return i;
    return std::nullopt;
}

const Parameter* MptModel::find_parameter(std::string_view name) const {
    for (const auto& p : parameters_)
        if (p.name == name) return &p;
    return nullptr;
}

MptModel MptModel::with_roles(const std::map<std::string, ParameterRole>& roles) const {
    auto params = parameters_;
    for (const auto& [name, role] : roles) {
        auto it = std::find_if(params.begin(), params.end(), [&](const Parameter& p) { return p.name == name; });
        if (it == params.end()) throw ModelError("cannot set role of undeclared parameter '" + name + "'");
        it->role = role;
    }
    return MptModel(trees_, std::move(params));
}

void MptModel::category_probabilities(std::span<const double> theta, std::span<double> out) const {
    if (theta.size() != free_names_.size())
        throw std::domain_error("theta has " + std::to_string(theta.size()) + " components, model has " +
                                std::to_string(free_names_.size()) + " free parameters");
    for (double x : theta)
        if (!in_unit_interval(x)) throw std::domain_error("theta component outside [0,1]");
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& b : compiled_) {
        double prod = 1.0;
        for (const auto& f : b.factors) {
            const double v = f.index >= 0 ? theta[static_cast<std::size_t>(f.index)] : f.constant;
            prod *= f.complement ? 1.0 - v : v;
        }
        out[b.category] += prod;
    }
}

std::vector<double> MptModel::category_probabilities(std::span<const double> theta) const {
    std::vector<double> out(categories_.size());
    category_probabilities(theta, out);
    return out;
}

std::map<std::string, double> MptModel::probability_map(std::span<const double> theta) const {
    const auto p = category_probabilities(theta);
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < p.size(); ++i) out.emplace(categories_[i].name, p[i]);
    return out;
}

std::vector<double> MptModel::probability_jacobian(std::span<const double> theta) const {
    // Evaluates the range checks.
    (void)category_probabilities(theta);
    const std::size_t k = free_names_.size();
    std::vector<double> jac(categories_.size() * k, 0.0);
    for (const auto& b : compiled_) {
        for (std::size_t skip = 0; skip < b.factors.size(); ++skip) {
            const auto& fs = b.factors[skip];
            if (fs.index < 0) continue;
            double prod = fs.complement ? -1.0 : 1.0;
            for (std::size_t j = 0; j < b.factors.size(); ++j) {
                if (j == skip) continue;
                const auto& f = b.factors[j];
                const double v = f.index >= 0 ? theta[static_cast<std::size_t>(f.index)] : f.constant;
                prod *= f.complement ? 1.0 - v : v;
            }
            jac[b.category * k + static_cast<std::size_t>(fs.index)] += prod;
        }
    }
    return jac;
}

std::vector<std::string> MptModel::validate() const {
    std::vector<std::string> problems;
    std::mt19937_64 rng(0x6d707462u);
    std::uniform_real_distribution<double> unif(0.01, 0.99);
    std::vector<double> theta(free_names_.size());
    std::vector<bool> reported(trees_.size(), false);
    for (int rep = 0; rep < 32; ++rep) {
        for (auto& x : theta) x = unif(rng);
        const auto p = category_probabilities(theta);
        for (std::size_t t = 0; t < trees_.size(); ++t) {
            if (reported[t]) continue;
            double sum = 0.0;
            for (std::size_t c = tree_offsets_[t]; c < tree_offsets_[t + 1]; ++c) sum += p[c];
            if (std::abs(sum - 1.0) > 1e-9) {
                std::ostringstream os;
                os << "tree '" << trees_[t].id << "' probabilities sum to " << sum << " instead of 1";
                problems.push_back(os.str());
                reported[t] = true;
            }
        }
    }
    return problems;
}

}  // namespace mptbf
