#include "mptbf/cli.hpp"

#include "mptbf/constraints.hpp"
#include "mptbf/csv.hpp"
#include "mptbf/eqn.hpp"
#include "mptbf/inference.hpp"
#include "mptbf/oracle.hpp"
#include "mptbf/random.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace mptbf::cli {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Bundle {
    std::optional<MptModel> model;
    ConstraintSet constraints;
    std::optional<Dataset> data;
};

/// Loads the model, constraints and data; collects every problem found.
Bundle load_bundle(const std::string& model_path, const std::string& constraints_path, const std::string& data_path,
                   std::vector<std::string>& problems) {
    Bundle b;
    try {
        b.model = parse_eqn(read_file(model_path));
    } catch (const std::exception& e) {
        problems.push_back(model_path + ": " + e.what());
        return b;
    }
    if (!constraints_path.empty()) {
        try {
            b.constraints = parse_constraints(read_file(constraints_path));
            b.model = apply_roles(*b.model, b.constraints);
        } catch (const std::exception& e) {
            problems.push_back(constraints_path + ": " + e.what());
        }
    }
    for (const auto& p : b.model->validate()) problems.push_back(model_path + ": " + p);
    for (const auto& p : validate_constraints(*b.model, b.constraints))
        problems.push_back((constraints_path.empty() ? model_path : constraints_path) + ": " + p);
    if (!data_path.empty()) {
        try {
            b.data = Dataset::parse_csv(read_file(data_path));
            Likelihood check(*b.model, *b.data);
        } catch (const std::exception& e) {
            problems.push_back(data_path + ": " + e.what());
        }
    }
    return b;
}

Bundle load_or_throw(const std::string& model_path, const std::string& constraints_path, const std::string& data_path) {
    std::vector<std::string> problems;
    auto b = load_bundle(model_path, constraints_path, data_path, problems);
    if (!problems.empty()) {
        std::string msg;
        for (const auto& p : problems) msg += (msg.empty() ? "" : "\n") + p;
        throw UsageError(msg);
    }
    return b;
}

// Canonical order fixes the seed streams of each model.
const std::vector<std::string> kModelNames = {"full", "balanced", "unbalanced", "null"};

struct ModelVariant {
    std::string name;
    MptModel model;
    PriorSpec prior;
};

std::map<std::string, BetaShape> priors_for(const MptModel& model, const ConstraintSet& c) {
    std::map<std::string, BetaShape> out;
    for (const auto& [name, shape] : c.priors)
        if (model.free_index(name)) out.emplace(name, shape);
    return out;
}

ModelVariant make_variant(const std::string& kind, const MptModel& model, const ConstraintSet& constraints,
                          std::optional<Method> method, bool direct) {
    auto chains = constraints.chains;
    if (method)
        for (auto& c : chains) c = c.with_method(*method);
    const auto& free = model.free_parameters();
    const auto betas = priors_for(model, constraints);
    if (kind == "full") return {kind, model, PriorSpec::full_uniform(free, betas)};
    if (chains.empty()) throw UsageError("model '" + kind + "' needs order constraints (--constraints)");
    if (kind == "balanced" || kind == "adjusted") {
        if (direct) return {kind, model, PriorSpec::balanced(free, chains, betas)};
        return {kind, model, PriorSpec::reparameterized(free, chains, true, std::nullopt, betas)};
    }
    if (kind == "unbalanced") return {kind, model, PriorSpec::reparameterized(free, chains, false, std::nullopt, betas)};
    if (kind == "null") {
        auto collapsed = collapse_chains(model, chains);
        return {kind, collapsed, PriorSpec::full_uniform(collapsed.free_parameters(), priors_for(collapsed, constraints))};
    }
    throw UsageError("unknown model kind '" + kind + "'");
}

std::string fmt_real(double v, int precision = 6) {
    if (std::isnan(v)) return "NA";
    if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
    return fmt::format("{:.{}f}", v, precision);
}

std::string fmt_sci(double v) {
    if (!std::isfinite(v) || (v != 0.0 && !std::isnormal(v))) return "NA";
    return fmt::format("{:.6e}", v);
}

std::string fmt_draw(double v) { return fmt::format("{:.10g}", v); }

std::string join_warnings(const std::vector<std::string>& w) {
    std::string s;
    for (const auto& x : w) s += (s.empty() ? "" : "; ") + x;
    return s;
}

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) {
        if (!path.empty() && path != "-") {
            file_.open(path, std::ios::binary);
            if (!file_) throw UsageError("cannot write '" + path + "'");
        }
        os_ = file_.is_open() ? static_cast<std::ostream*>(&file_) : &fallback;
    }
    std::ostream& operator*() { return *os_; }

private:
    std::ofstream file_;
    std::ostream* os_;
};

void write_matrix_csv(std::ostream& os, const std::vector<std::string>& header, const Eigen::MatrixXd& m) {
    os << csv::join(header) << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << fmt_draw(m(r, c));
        os << '\n';
    }
}

struct SamplerFlags {
    std::size_t draws = 25000;
    std::size_t warmup = 5000;
    std::size_t thin = 1;
    std::size_t chains = 4;
    std::size_t is_samples = 100000;
    double defense = 0.05;
    std::size_t workers = 0;
};

void add_sampler_flags(CLI::App* cmd, SamplerFlags& f) {
    cmd->add_option("--draws", f.draws, "Retained posterior draws per chain")->envname("MPTBF_DRAWS")->capture_default_str();
    cmd->add_option("--warmup", f.warmup, "Adaptation iterations per chain")->envname("MPTBF_WARMUP")->capture_default_str();
    cmd->add_option("--thin", f.thin, "Keep every n-th iteration")->envname("MPTBF_THIN")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--chains", f.chains, "Independent chains")->envname("MPTBF_CHAINS")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--workers", f.workers, "Worker threads (0: all cores); results do not depend on it")
        ->envname("MPTBF_WORKERS");
}

SamplerConfig sampler_config(const SamplerFlags& f, std::uint64_t seed) {
    SamplerConfig cfg;
    cfg.draws = f.draws;
    cfg.warmup = f.warmup;
    cfg.thin = f.thin;
    cfg.chains = f.chains;
    cfg.seed = seed;
    cfg.workers = f.workers;
    return cfg;
}

struct Row {
    std::string model;
    MarginalLikelihoodEstimate est;
    std::uint64_t seed_posterior = 0;
    std::uint64_t seed_is = 0;
    double max_rhat = std::numeric_limits<double>::quiet_NaN();
    std::vector<ParameterSummary> summary;
};

int cmd_validate(const std::string& model, const std::string& constraints, const std::string& data, std::ostream& out) {
    std::vector<std::string> problems;
    load_bundle(model, constraints, data, problems);
    if (problems.empty()) {
        out << "OK\n";
        return 0;
    }
    for (const auto& p : problems) out << "error: " << p << '\n';
    return 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bayes factors for order-constrained multinomial processing tree models", "mptbf"};
    app.require_subcommand(1);

    std::string model_path, constraints_path, data_path, out_path;
    std::string prior_kind = "balanced";
    std::string method_str;
    std::uint64_t seed = 1;
    bool direct = false;
    SamplerFlags sf;

    auto add_common = [&](CLI::App* cmd, bool needs_data) {
        cmd->add_option("--model", model_path, "EQN model file")->required()->check(CLI::ExistingFile)->envname("MPTBF_MODEL");
        cmd->add_option("--constraints", constraints_path, "Constraint file")->check(CLI::ExistingFile)->envname("MPTBF_CONSTRAINTS");
        auto* d = cmd->add_option("--data", data_path, "CSV tree,category,count")->check(CLI::ExistingFile)->envname("MPTBF_DATA");
        if (needs_data) d->required();
    };
    auto add_prior = [&](CLI::App* cmd) {
        cmd->add_option("--prior", prior_kind, "Prior variant")
            ->check(CLI::IsMember({"full", "balanced", "unbalanced", "adjusted", "null"}))
            ->envname("MPTBF_PRIOR")
            ->capture_default_str();
        cmd->add_option("--method", method_str, "Reparameterization for every chain (default: per chain)")
            ->check(CLI::IsMember({"A", "B"}))
            ->envname("MPTBF_METHOD");
        cmd->add_flag("--direct", direct, "Sample balanced models on theta with the cone indicator");
    };
    auto add_seed_out = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "Base random seed")->envname("MPTBF_SEED")->capture_default_str();
        cmd->add_option("--out", out_path, "Output file (default: stdout)")->envname("MPTBF_OUT");
    };

    auto* validate = app.add_subcommand("validate", "Check model, constraints and data");
    add_common(validate, false);

    auto* prior_sample = app.add_subcommand("prior-sample", "Draw theta from a prior, as CSV");
    std::size_t n_prior = 10000;
    add_common(prior_sample, false);
    add_prior(prior_sample);
    add_seed_out(prior_sample);
    prior_sample->add_option("--n", n_prior, "Number of draws")->envname("MPTBF_N")->capture_default_str();

    auto* posterior = app.add_subcommand("posterior", "Posterior summaries (mean, 2.5% and 97.5% quantiles)");
    std::string draws_out;
    add_common(posterior, true);
    add_prior(posterior);
    add_seed_out(posterior);
    add_sampler_flags(posterior, sf);
    posterior->add_option("--draws-out", draws_out, "Also write all posterior draws as CSV");

    auto* compare = app.add_subcommand("compare", "Marginal likelihoods and Bayes factors");
    std::string models_str = "full,balanced,unbalanced,null";
    std::string format = "csv";
    std::string summary_out;
    bool with_oracle = false, with_encompassing = false;
    add_common(compare, true);
    compare->add_option("--models", models_str, "Comma-separated subset of full,balanced,unbalanced,null")
        ->envname("MPTBF_MODELS")
        ->capture_default_str();
    compare->add_option("--method", method_str, "Reparameterization for every chain (default: per chain)")
        ->check(CLI::IsMember({"A", "B"}))
        ->envname("MPTBF_METHOD");
    compare->add_flag("--direct", direct, "Estimate the balanced model on theta with the cone indicator");
    add_seed_out(compare);
    add_sampler_flags(compare, sf);
    compare->add_option("--is-samples", sf.is_samples, "Importance samples per model")->envname("MPTBF_IS_SAMPLES")->capture_default_str();
    compare->add_option("--defense", sf.defense, "Weight of the prior in the importance density")
        ->check(CLI::Range(0.0, 1.0))
        ->envname("MPTBF_DEFENSE")
        ->capture_default_str();
    compare->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "kv"}))->envname("MPTBF_FORMAT")->capture_default_str();
    compare->add_option("--summary-out", summary_out, "Posterior summaries as CSV (model,parameter,mean,q025,q975)");
    compare->add_flag("--oracle", with_oracle, "Add grid-quadrature rows for models with at most 3 free parameters");
    compare->add_flag("--encompassing", with_encompassing, "Add an encompassing-prior row for the balanced model");

    auto* simulate = app.add_subcommand("simulate", "Simulate a dataset from a prior draw");
    long long total = 100;
    std::vector<std::string> tree_totals;
    std::string theta_out;
    add_common(simulate, false);
    add_prior(simulate);
    add_seed_out(simulate);
    simulate->add_option("--total", total, "Responses per tree")->check(CLI::NonNegativeNumber)->capture_default_str();
    simulate->add_option("--tree-total", tree_totals, "Per-tree override, tree=N (repeatable)");
    simulate->add_option("--theta-out", theta_out, "Write the generating theta as CSV");

    std::vector<const char*> argv;
    argv.push_back("mptbf");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        const std::optional<Method> method = method_str.empty() ? std::nullopt : std::optional(method_from_string(method_str));

        if (*validate) return cmd_validate(model_path, constraints_path, data_path, out);

        if (*prior_sample) {
            auto b = load_or_throw(model_path, constraints_path, "");
            const auto v = make_variant(prior_kind, *b.model, b.constraints, method, direct);
            Output o(out_path, out);
            const Eigen::MatrixXd draws = n_prior ? sample_prior(v.prior, n_prior, seed) : Eigen::MatrixXd(0, static_cast<Eigen::Index>(v.prior.dimension()));
            write_matrix_csv(*o, v.prior.parameters(), draws);
            return 0;
        }

        if (*simulate) {
            auto b = load_or_throw(model_path, constraints_path, "");
            const auto v = make_variant(prior_kind, *b.model, b.constraints, method, direct);
            std::map<std::string, long long> per_tree;
            for (const auto& t : tree_totals) {
                const auto eq = t.find('=');
                if (eq == std::string::npos) throw UsageError("--tree-total expects tree=N, got '" + t + "'");
                per_tree[t.substr(0, eq)] = std::stoll(t.substr(eq + 1));
            }
            const Eigen::MatrixXd th = sample_prior(v.prior, 1, derive_seed(seed, 0));
            std::vector<double> theta(th.data(), th.data() + th.size());
            const auto p = v.model.category_probabilities(theta);
            auto rng = make_rng(derive_seed(seed, 1));
            std::vector<CountRecord> records;
            for (std::size_t t = 0; t < v.model.trees().size(); ++t) {
                const auto& tree = v.model.trees()[t];
                long long remaining = per_tree.count(tree.id) ? per_tree.at(tree.id) : total;
                const auto [first, last] = v.model.tree_category_range(t);
                double mass = 1.0;
                for (std::size_t c = first; c < last; ++c) {
                    long long k = remaining;
                    if (c + 1 < last) {
                        const double q = mass > 0.0 ? std::clamp(p[c] / mass, 0.0, 1.0) : 0.0;
                        k = std::binomial_distribution<long long>(remaining, q)(rng);
                    }
                    records.push_back({tree.id, v.model.categories()[c].name, k});
                    remaining -= k;
                    mass -= p[c];
                }
            }
            Output o(out_path, out);
            *o << Dataset(records).to_csv();
            if (!theta_out.empty()) {
                Output to(theta_out, out);
                write_matrix_csv(*to, v.prior.parameters(), th);
            }
            return 0;
        }

        if (*posterior) {
            auto b = load_or_throw(model_path, constraints_path, data_path);
            const auto v = make_variant(prior_kind, *b.model, b.constraints, method, direct);
            const Likelihood lik(v.model, *b.data);
            const auto post = sample_posterior(lik, v.prior, sampler_config(sf, seed));
            Output o(out_path, out);
            *o << "parameter,mean,q025,q975,rhat\n";
            const auto summary = summarize(post);
            for (std::size_t j = 0; j < summary.size(); ++j)
                *o << csv::join({summary[j].name, fmt_real(summary[j].mean), fmt_real(summary[j].q025),
                                 fmt_real(summary[j].q975), fmt_real(post.rhat[j], 4)})
                   << '\n';
            if (!draws_out.empty()) {
                Output d(draws_out, out);
                write_matrix_csv(*d, post.parameters, post.theta);
            }
            return 0;
        }

        if (*compare) {
            auto b = load_or_throw(model_path, constraints_path, data_path);
            std::vector<std::string> requested;
            {
                std::set<std::string> seen;
                std::stringstream ss(models_str);
                std::string m;
                while (std::getline(ss, m, ',')) {
                    if (m.empty()) continue;
                    if (std::find(kModelNames.begin(), kModelNames.end(), m) == kModelNames.end())
                        throw UsageError("unknown model '" + m + "' in --models");
                    if (seen.insert(m).second) requested.push_back(m);
                }
            }
            if (requested.empty()) throw UsageError("--models is empty");

            std::vector<Row> rows;
            std::optional<PosteriorChain> full_posterior;
            std::optional<MarginalLikelihoodEstimate> full_estimate;
            std::vector<Row> extra;
            for (const auto& name : requested) {
                const auto stream = static_cast<std::uint64_t>(
                    std::find(kModelNames.begin(), kModelNames.end(), name) - kModelNames.begin());
                const auto v = make_variant(name, *b.model, b.constraints, method, direct);
                const Likelihood lik(v.model, *b.data);
                Row row;
                row.model = name;
                row.seed_posterior = derive_seed(seed, 2 * stream);
                row.seed_is = derive_seed(seed, 2 * stream + 1);
                const auto post = sample_posterior(lik, v.prior, sampler_config(sf, row.seed_posterior));
                ImportanceConfig ic;
                ic.samples = sf.is_samples;
                ic.seed = row.seed_is;
                ic.defense_weight = sf.defense;
                ic.workers = sf.workers;
                row.est = estimate_ml_importance(lik, v.prior, post, ic);
                row.max_rhat = post.max_rhat();
                if (row.max_rhat > 1.05)
                    row.est.warnings.push_back(fmt::format("max R-hat {:.3f} exceeds 1.05", row.max_rhat));
                row.summary = summarize(post);
                if (name == "full") {
                    full_posterior = post;
                    full_estimate = row.est;
                }
                if (with_oracle && v.prior.dimension() <= 3) {
                    Row q;
                    q.model = name;
                    const auto g = oracle::grid_ml(lik, v.prior, 128);
                    q.est.log_ml = g.extrapolated();
                    q.est.se_log = g.doubling_delta();
                    q.est.estimator = Estimator::Quadrature;
                    q.est.n_samples = 256;
                    extra.push_back(q);
                }
                rows.push_back(std::move(row));
            }
            if (with_encompassing) {
                if (!full_posterior || b.constraints.chains.empty())
                    throw UsageError("--encompassing needs the full model and order constraints");
                Row e;
                e.model = "balanced";
                e.est = estimate_ml_encompassing(*full_posterior, *full_estimate, b.constraints.chains);
                const auto full_row = std::find_if(rows.begin(), rows.end(), [](const Row& r) { return r.model == "full"; });
                e.seed_posterior = full_row->seed_posterior;
                e.seed_is = full_row->seed_is;
                extra.push_back(e);
            }

            std::vector<BayesFactorResult> bfs;
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (std::size_t j = i + 1; j < rows.size(); ++j)
                    if (std::isfinite(rows[i].est.log_ml) && std::isfinite(rows[j].est.log_ml))
                        bfs.push_back(bayes_factor(rows[i].est, rows[j].est, rows[i].model, rows[j].model));

            auto all_rows = rows;
            all_rows.insert(all_rows.end(), extra.begin(), extra.end());
            Output o(out_path, out);
            auto p_of = [](const MarginalLikelihoodEstimate& e) { return std::exp(e.log_ml); };
            if (format == "csv") {
                *o << "kind,model,versus,estimator,log_value,se_log,p,se_p,n_samples,ess,seed_posterior,seed_is,max_rhat,warnings\n";
                for (const auto& r : all_rows) {
                    const double p = p_of(r.est);
                    *o << csv::join({"ml", r.model, "", to_string(r.est.estimator), fmt_real(r.est.log_ml, 4),
                                     fmt_real(r.est.se_log, 4), fmt_sci(p), fmt_sci(p * r.est.se_log),
                                     std::to_string(r.est.n_samples), fmt_real(r.est.ess, 1),
                                     std::to_string(r.seed_posterior), std::to_string(r.seed_is),
                                     fmt_real(r.max_rhat, 4), join_warnings(r.est.warnings)})
                       << '\n';
                }
                for (const auto& bf : bfs)
                    *o << csv::join({"bf", bf.first, bf.second, "importance", fmt_real(bf.log_bf, 4),
                                     fmt_real(bf.se_log_bf, 4), fmt_sci(std::exp(bf.log_bf)), "", "", "", "", "", "", ""})
                       << '\n';
            } else {
                *o << "seed = " << seed << '\n';
                for (const auto& r : all_rows) {
                    const std::string key = "model." + r.model + "." + to_string(r.est.estimator) + ".";
                    const double p = p_of(r.est);
                    *o << key << "log_ml = " << fmt_real(r.est.log_ml, 4) << '\n'
                       << key << "se_log = " << fmt_real(r.est.se_log, 4) << '\n'
                       << key << "p = " << fmt_sci(p) << '\n'
                       << key << "se_p = " << fmt_sci(p * r.est.se_log) << '\n'
                       << key << "n_samples = " << r.est.n_samples << '\n'
                       << key << "ess = " << fmt_real(r.est.ess, 1) << '\n'
                       << key << "seed_posterior = " << r.seed_posterior << '\n'
                       << key << "seed_is = " << r.seed_is << '\n'
                       << key << "max_rhat = " << fmt_real(r.max_rhat, 4) << '\n'
                       << key << "warnings = " << join_warnings(r.est.warnings) << '\n';
                    for (const auto& s : r.summary)
                        *o << key << "posterior." << s.name << " = " << fmt_real(s.mean) << ' ' << fmt_real(s.q025)
                           << ' ' << fmt_real(s.q975) << '\n';
                }
                for (const auto& bf : bfs)
                    *o << "bf." << bf.first << "." << bf.second << ".log_bf = " << fmt_real(bf.log_bf, 4) << '\n'
                       << "bf." << bf.first << "." << bf.second << ".se = " << fmt_real(bf.se_log_bf, 4) << '\n';
            }
            if (!summary_out.empty()) {
                Output s(summary_out, out);
                *s << "model,parameter,mean,q025,q975\n";
                for (const auto& r : rows)
                    for (const auto& p : r.summary)
                        *s << csv::join({r.model, p.name, fmt_real(p.mean), fmt_real(p.q025), fmt_real(p.q975)}) << '\n';
            }
            return 0;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace mptbf::cli
