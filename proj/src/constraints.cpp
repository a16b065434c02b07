#include "mptbf/constraints.hpp"

#include "mptbf/eqn.hpp"

#include <charconv>
#include <regex>
#include <set>

namespace mptbf {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& s, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(line, "'" + s + "' is not a number");
    return v;
}

}  // namespace

ConstraintSet parse_constraints(std::string_view text) {
    static const std::regex order_re(R"(order\s*\(\s*([AaBb])\s*\)\s*:\s*(.+))");
    static const std::regex prior_re(R"(prior\s*:\s*([A-Za-z_][A-Za-z0-9_.]*)\s+Beta\s*\(\s*([^,\s]+)\s*,\s*([^)\s]+)\s*\))");
    static const std::regex alias_re(R"(alias\s*:\s*([A-Za-z_][A-Za-z0-9_.]*)\s*=\s*([A-Za-z_][A-Za-z0-9_.]*))");
    static const std::regex fixed_re(R"(fixed\s*:\s*([A-Za-z_][A-Za-z0-9_.]*)\s*=\s*(\S+))");
    static const std::regex name_re(R"([A-Za-z_][A-Za-z0-9_.]*)");

    ConstraintSet out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;

        std::smatch m;
        if (std::regex_match(line, m, order_re)) {
            std::vector<std::string> names;
            const std::string body = m[2];
            std::size_t start = 0;
            while (true) {
                const auto lt = body.find('<', start);
                std::string name = trim(std::string_view(body).substr(start, lt == std::string::npos ? std::string::npos : lt - start));
                if (!std::regex_match(name, name_re))
                    throw ParseError(line_no, "invalid parameter name '" + name + "' in order chain");
                names.push_back(std::move(name));
                if (lt == std::string::npos) break;
                start = lt + 1;
                if (start < body.size() && body[start] == '=') ++start;  // accept `<=`
            }
            try {
                out.chains.emplace_back(std::move(names), method_from_string(m[1]));
            } catch (const std::invalid_argument& e) {
                throw ParseError(line_no, e.what());
            }
        } else if (std::regex_match(line, m, prior_re)) {
            const BetaShape shape{to_double(m[2], line_no), to_double(m[3], line_no)};
            if (!(shape.a > 0.0 && shape.b > 0.0)) throw ParseError(line_no, "beta shape parameters must be positive");
            if (!out.priors.emplace(m[1], shape).second)
                throw ParseError(line_no, "second prior for '" + std::string(m[1]) + "'");
        } else if (std::regex_match(line, m, alias_re)) {
            if (!out.aliases.emplace(m[1], m[2]).second)
                throw ParseError(line_no, "second alias for '" + std::string(m[1]) + "'");
        } else if (std::regex_match(line, m, fixed_re)) {
            const double v = to_double(m[2], line_no);
            if (!(v >= 0.0 && v <= 1.0)) throw ParseError(line_no, "fixed value outside [0,1]");
            if (!out.fixed.emplace(m[1], v).second)
                throw ParseError(line_no, "second fixed value for '" + std::string(m[1]) + "'");
        } else {
            throw ParseError(line_no, "unrecognized directive '" + line + "'");
        }
    }
    return out;
}

std::vector<std::string> validate_chains(const MptModel& model, const std::vector<OrderChain>& chains) {
    std::vector<std::string> problems;
    std::map<std::string, std::size_t> owner;
    for (std::size_t c = 0; c < chains.size(); ++c) {
        for (const auto& name : chains[c].parameters()) {
            const auto* p = model.find_parameter(name);
            if (!p) {
                problems.push_back("order chain " + std::to_string(c + 1) + " names unknown parameter '" + name + "'");
                continue;
            }
            if (!std::holds_alternative<FreeRole>(p->role))
                problems.push_back("order chain " + std::to_string(c + 1) + " names non-free parameter '" + name + "'");
            auto [it, inserted] = owner.emplace(name, c);
            if (!inserted)
                problems.push_back("parameter '" + name + "' appears in order chains " + std::to_string(it->second + 1) +
                                   " and " + std::to_string(c + 1));
        }
    }
    return problems;
}

std::vector<std::string> validate_constraints(const MptModel& model, const ConstraintSet& constraints) {
    auto problems = validate_chains(model, constraints.chains);
    std::set<std::string> chained;
    for (const auto& c : constraints.chains) chained.insert(c.parameters().begin(), c.parameters().end());
    for (const auto& [name, shape] : constraints.priors) {
        if (!model.free_index(name)) problems.push_back("prior names unknown or non-free parameter '" + name + "'");
        if (chained.count(name)) problems.push_back("prior given for chain parameter '" + name + "'");
        if (!(shape.a > 0.0 && shape.b > 0.0)) problems.push_back("non-positive beta shape for '" + name + "'");
    }
    return problems;
}

MptModel apply_roles(const MptModel& model, const ConstraintSet& constraints) {
    std::map<std::string, ParameterRole> roles;
    for (const auto& [name, target] : constraints.aliases) roles[name] = AliasRole{target};
    for (const auto& [name, value] : constraints.fixed) roles[name] = FixedRole{value};
    if (roles.empty()) return model;
    return model.with_roles(roles);
}

MptModel collapse_chains(const MptModel& model, const std::vector<OrderChain>& chains) {
    std::map<std::string, ParameterRole> roles;
    for (const auto& chain : chains)
        for (std::size_t i = 1; i < chain.size(); ++i) roles[chain.parameters()[i]] = AliasRole{chain.parameters().front()};
    if (roles.empty()) return model;
    return model.with_roles(roles);
}

}  // namespace mptbf
