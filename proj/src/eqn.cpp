#include "mptbf/eqn.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

namespace mptbf {

ParseError::ParseError(std::size_t line, const std::string& message)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

namespace {

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s.front())) || s.front() == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    });
}

std::optional<double> parse_number(std::string_view s) {
    if (s.empty() || !(std::isdigit(static_cast<unsigned char>(s.front())) || s.front() == '.')) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    std::istringstream is{std::string(line)};
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

struct Builder {
    std::vector<Tree> trees;
    std::vector<Parameter> params;
    std::map<std::string, std::size_t> tree_pos;
    std::map<std::string, std::size_t> param_pos;
    std::map<std::string, std::string> category_tree;

    void use_parameter(const std::string& name, std::optional<double> constant) {
        if (param_pos.count(name)) return;
        param_pos.emplace(name, params.size());
        params.push_back(constant ? Parameter{name, FixedRole{*constant}} : Parameter{name, FreeRole{}});
    }
};

Factor parse_factor(std::string_view tok, std::size_t line, Builder& b, const EqnOptions& opt) {
    Factor f;
    std::string_view name = tok;
    if (tok.size() > 4 && tok.substr(0, 3) == "(1-" && tok.back() == ')') {
        name = tok.substr(3, tok.size() - 4);
        f.polarity = Polarity::Complement;
    } else if (tok.front() == '(' || tok.back() == ')') {
        throw ParseError(line, "malformed factor '" + std::string(tok) + "'; complements are written (1-name)");
    }
    if (auto v = parse_number(name)) {
        if (*v < 0.0 || *v > 1.0) throw ParseError(line, "constant " + std::string(name) + " outside [0,1]");
        f.parameter = std::string(name);
        b.use_parameter(f.parameter, *v);
        return f;
    }
    if (!is_identifier(name)) throw ParseError(line, "invalid parameter name '" + std::string(name) + "'");
    f.parameter = std::string(name);
    if (opt.declared_parameters && !opt.declared_parameters->count(f.parameter))
        throw ParseError(line, "undeclared parameter '" + f.parameter + "'");
    b.use_parameter(f.parameter, std::nullopt);
    return f;
}

}  // namespace

MptModel parse_eqn(std::string_view text, const EqnOptions& options) {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) throw ParseError(0, "model text is empty");

    Builder b;
    std::size_t line_no = 0;
    bool seen_record = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto tokens = split_ws(line);
        if (tokens.empty()) continue;

        if (!seen_record && tokens.size() == 1 &&
            std::all_of(tokens[0].begin(), tokens[0].end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
            seen_record = true;
            continue;
        }
        seen_record = true;
        if (tokens.size() < 3) throw ParseError(line_no, "expected `tree category term`");

        const std::string& tree_id = tokens[0];
        const std::string& category = tokens[1];
        std::string term;
        for (std::size_t i = 2; i < tokens.size(); ++i) term += tokens[i];

        if (auto it = b.category_tree.find(category); it != b.category_tree.end() && it->second != tree_id)
            throw ParseError(line_no, "category '" + category + "' already belongs to tree '" + it->second + "'");
        b.category_tree[category] = tree_id;

        Branch branch{category, {}};
        std::size_t start = 0;
        while (true) {
            const auto star = term.find('*', start);
            const std::string_view tok = std::string_view(term).substr(start, star == std::string::npos ? std::string::npos : star - start);
            if (tok.empty()) throw ParseError(line_no, "empty factor in term '" + term + "'");
            branch.factors.push_back(parse_factor(tok, line_no, b, options));
            if (star == std::string::npos) break;
            start = star + 1;
        }

        auto [it, inserted] = b.tree_pos.emplace(tree_id, b.trees.size());
        if (inserted) b.trees.push_back(Tree{tree_id, {}, {}});
        auto& tree = b.trees[it->second];
        if (std::find(tree.categories.begin(), tree.categories.end(), category) == tree.categories.end())
            tree.categories.push_back(category);
        tree.branches.push_back(std::move(branch));
    }
    if (b.trees.empty()) throw ParseError(0, "model text contains no records");
    try {
        return MptModel(std::move(b.trees), std::move(b.params));
    } catch (const ModelError& e) {
        throw ParseError(0, e.what());
    }
}

}  // namespace mptbf
