#include "mptbf/csv.hpp"
#include "mptbf/mpt_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

namespace mptbf {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

Dataset::Dataset(std::vector<CountRecord> records) : records_(std::move(records)) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : records_) {
        if (r.count < 0)
            throw DataError("negative count for " + r.tree + "/" + r.category);
        if (!seen.emplace(r.tree, r.category).second)
            throw DataError("duplicate count for " + r.tree + "/" + r.category);
    }
}

Dataset Dataset::parse_csv(std::string_view text) {
    // Tolerate a UTF-8 byte order mark.
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    std::vector<std::vector<std::string>> rows;
    try {
        rows = csv::parse(text);
    } catch (const std::runtime_error& e) {
        throw DataError(e.what());
    }
    if (rows.empty()) throw DataError("data file is empty; expected header tree,category,count");
    const auto& header = rows.front();
    if (header.size() != 3 || trim(header[0]) != "tree" || trim(header[1]) != "category" ||
        trim(header[2]) != "count")
        throw DataError("line 1: expected header tree,category,count");

    std::vector<CountRecord> records;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        const std::string where = "row " + std::to_string(i + 1) + ": ";
        if (row.size() != 3) throw DataError(where + "expected 3 fields, got " + std::to_string(row.size()));
        CountRecord r{trim(row[0]), trim(row[1]), 0};
        const std::string count = trim(row[2]);
        const auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), r.count);
        if (ec != std::errc() || ptr != count.data() + count.size() || count.empty())
            throw DataError(where + "count '" + count + "' is not an integer");
        if (r.tree.empty() || r.category.empty()) throw DataError(where + "empty tree or category");
        records.push_back(std::move(r));
    }
    return Dataset(std::move(records));
}

std::string Dataset::to_csv() const {
    std::string out = "tree,category,count\n";
    for (const auto& r : records_)
        out += csv::join({r.tree, r.category, std::to_string(r.count)}) + "\n";
    return out;
}

long long Dataset::total() const {
    long long s = 0;
    for (const auto& r : records_) s += r.count;
    return s;
}

Likelihood::Likelihood(MptModel model, const Dataset& data) : model_(std::move(model)) {
    const auto& cats = model_.categories();
    counts_.assign(cats.size(), 0);
    std::vector<bool> present(cats.size(), false);
    for (const auto& r : data.records()) {
        const auto idx = model_.category_index(r.category);
        if (!idx) throw DataError("count for unknown category '" + r.category + "'");
        const auto& tree = model_.trees()[cats[*idx].tree].id;
        if (tree != r.tree)
            throw DataError("category '" + r.category + "' belongs to tree '" + tree + "', not '" + r.tree + "'");
        counts_[*idx] = r.count;
        present[*idx] = true;
    }
    for (std::size_t i = 0; i < cats.size(); ++i)
        if (!present[i]) throw DataError("no count for category '" + cats[i].name + "'");

    totals_.assign(model_.trees().size(), 0);
    log_coefficient_ = 0.0;
    for (std::size_t t = 0; t < totals_.size(); ++t) {
        const auto [first, last] = model_.tree_category_range(t);
        for (std::size_t c = first; c < last; ++c) {
            totals_[t] += counts_[c];
            log_coefficient_ -= std::lgamma(static_cast<double>(counts_[c]) + 1.0);
        }
        log_coefficient_ += std::lgamma(static_cast<double>(totals_[t]) + 1.0);
    }
}

bool Likelihood::empty() const {
    return std::all_of(totals_.begin(), totals_.end(), [](long long n) { return n == 0; });
}

double Likelihood::operator()(std::span<const double> theta) const {
    thread_local std::vector<double> p;
    p.resize(counts_.size());
    model_.category_probabilities(theta, p);
    double ll = log_coefficient_;
    for (std::size_t c = 0; c < p.size(); ++c) {
        if (counts_[c] == 0) continue;
        if (p[c] <= 0.0) return -std::numeric_limits<double>::infinity();
        ll += static_cast<double>(counts_[c]) * std::log(p[c]);
    }
    return ll;
}

std::vector<double> Likelihood::gradient(std::span<const double> theta) const {
    const auto p = model_.category_probabilities(theta);
    const auto jac = model_.probability_jacobian(theta);
    const std::size_t k = model_.num_free();
    std::vector<double> g(k, 0.0);
    for (std::size_t c = 0; c < p.size(); ++c) {
        if (counts_[c] == 0) continue;
        const double w = static_cast<double>(counts_[c]) / p[c];
        for (std::size_t j = 0; j < k; ++j) g[j] += w * jac[c * k + j];
    }
    return g;
}

double log_likelihood(const MptModel& model, const Dataset& data, std::span<const double> theta) {
    return Likelihood(model, data)(theta);
}

}  // namespace mptbf
