// simlearn: train similarity models and separators, certify bounds, run experiments.

#include <simlearn/bounds.hpp>
#include <simlearn/data.hpp>
#include <simlearn/errors.hpp>
#include <simlearn/experiment.hpp>
#include <simlearn/format.hpp>
#include <simlearn/io.hpp>
#include <simlearn/separator.hpp>
#include <simlearn/similarity.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

using namespace simlearn;

namespace {

struct Options {
    std::string data, model, separator, out, config, output_dir, norm = "fro", f_values, kind = "two_gaussians";
    double lambda = 0.1, margin = 1.0, step0 = 1.0, rel_tol = 1e-8, delta = 0.05, p = 2, q = 4;
    double mean_separation = 2.0, noise_sigma = 1.0;
    int max_iters = 2000, mc_draws = 1000;
    long long m = 100, d = 2, irrelevant_dims = 0;
    std::uint64_t seed = 0;
};

std::string experiment_help() {
    std::string s = "Config JSON keys: generator {kind, mean_separation, noise_sigma, irrelevant_dims}, m_values, "
                    "d_values, norm_kinds, lambda, margin, delta, trials, mc_draws, seed, output_dir, and optional "
                    "holdout_size (10000), max_iters (2000), step0 (1).\n"
                    "Writes <output_dir>/runs.csv and <output_dir>/summary.json.\n"
                    "runs.csv columns, in order:\n  ";
    const auto &cols = experiment_csv_columns();
    for (std::size_t k = 0; k < cols.size(); ++k)
        s += (k ? "," : "") + cols[k];
    s += "\ngap = e_holdout - e_z. theorem1_holds is gap <= theorem1_bound; theorem2_holds is "
         "sep_hinge_holdout <= theorem2_bound.";
    return s;
}

void write_or_print(const std::string &out, const json &j) {
    if (out.empty())
        std::cout << j.dump(2) << '\n';
    else
        write_json_file(out, j);
}

int cmd_train(const Options &o) {
    const Dataset data = load_csv(o.data);
    SimilarityConfig cfg;
    cfg.norm_kind = parse_norm_kind(o.norm);
    cfg.lambda    = o.lambda;
    cfg.margin    = o.margin;
    cfg.max_iters = o.max_iters;
    cfg.step0     = o.step0;
    cfg.rel_tol   = o.rel_tol;
    cfg.seed      = o.seed;
    const SimilarityModel model = train_similarity(data, cfg);
    write_json_file(o.out, to_json(model));
    std::cout << "objective " << format_double(model.final_objective) << " after " << model.iterations_run
              << " iterations\n";
    return 0;
}

int cmd_separator(const Options &o) {
    const SimilarityModel model = model_from_json(read_json_file(o.model));
    const Dataset data          = load_csv(o.data);
    const Separator sep         = train_separator(model, data, SeparatorConfig{o.max_iters, o.step0, o.seed});
    write_json_file(o.out, to_json(sep));
    std::cout << "hinge " << format_double(empirical_hinge_error(sep, data)) << " similarity_error "
              << format_double(empirical_similarity_error(model.a, data, model.config.margin)) << '\n';
    return 0;
}

int cmd_bounds(const Options &o) {
    const SimilarityModel model = model_from_json(read_json_file(o.model));
    const Dataset data          = load_csv(o.data);
    const BoundReport rep       = build_bound_report(model, data, o.delta, o.mc_draws, o.seed);
    write_json_file(o.out, to_json(rep));
    return 0;
}

int cmd_eval(const Options &o) {
    const SimilarityModel model = model_from_json(read_json_file(o.model));
    const Dataset data          = load_csv(o.data);
    json j{{"m", data.m()},
           {"similarity_error", empirical_similarity_error(model.a, data, model.config.margin)},
           {"objective", similarity_objective(model.a, data, model.config)}};
    if (!o.separator.empty()) {
        const Separator sep    = separator_from_json(read_json_file(o.separator));
        j["hinge_error"]       = empirical_hinge_error(sep, data);
        j["zero_one_error"]    = zero_one_error(sep, data);
        j["alpha_l1"]          = sep.l1_budget();
    }
    write_or_print(o.out, j);
    return 0;
}

int cmd_experiment(const Options &o) {
    ExperimentConfig cfg = experiment_config_from_json(read_json_file(o.config));
    if (!o.output_dir.empty())
        cfg.output_dir = o.output_dir;
    const auto rows = run_experiment(cfg);
    write_experiment_outputs(cfg, rows);
    std::cout << rows.size() << " runs written to " << cfg.output_dir << '\n';
    return 0;
}

int cmd_khinchin(const Options &o) {
    std::vector<double> vals;
    std::string_view rest = o.f_values;
    while (true) {
        const auto comma = rest.find(',');
        const auto v     = parse_double(trim(rest.substr(0, comma)));
        if (!v)
            throw std::invalid_argument("--f: not a number list: '" + o.f_values + "'");
        vals.push_back(*v);
        if (comma == std::string_view::npos)
            break;
        rest.remove_prefix(comma + 1);
    }
    const Vector f = Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
    KhinchinMode mode = KhinchinExact{};
    if (o.mc_draws > 0 && static_cast<Index>(vals.size()) > khinchin_exact_max_n)
        mode = KhinchinMonteCarlo{o.mc_draws, o.seed};
    const auto r = khinchin_check(f, o.p, o.q, mode);
    write_or_print(o.out, json{{"n", vals.size()},
                               {"p", o.p},
                               {"q", o.q},
                               {"mode", std::holds_alternative<KhinchinExact>(mode) ? "exact" : "monte_carlo"},
                               {"lhs", r.lhs},
                               {"rhs", r.rhs},
                               {"holds", r.holds}});
    return 0;
}

int cmd_generate(const Options &o) {
    GeneratorSpec spec;
    spec.kind            = parse_generator_kind(o.kind);
    spec.d               = o.d;
    spec.mean_separation = o.mean_separation;
    spec.noise_sigma     = o.noise_sigma;
    spec.irrelevant_dims = o.irrelevant_dims;
    spec.seed            = o.seed;
    save_csv(o.out, generate(spec, o.m));
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Similarity learning with matrix-norm regularization and bound certification"};
    app.require_subcommand(1);
    Options o;

    auto *train = app.add_subcommand("train", "Learn a similarity matrix from a CSV dataset");
    train->add_option("--data", o.data, "Training CSV (label,x1,...,xd)")->required();
    train->add_option("--norm", o.norm, "Regularizer: l1, fro, mixed21 or trace")
        ->check(CLI::IsMember({"l1", "fro", "mixed21", "trace"}));
    train->add_option("--lambda", o.lambda, "Regularization weight")->capture_default_str();
    train->add_option("--margin", o.margin, "Margin r")->capture_default_str();
    train->add_option("--max-iters", o.max_iters, "Iteration budget")->capture_default_str();
    train->add_option("--step0", o.step0, "Initial step size")->capture_default_str();
    train->add_option("--rel-tol", o.rel_tol, "Early-stop tolerance, 0 disables")->capture_default_str();
    train->add_option("--seed", o.seed, "Seed recorded with the model")->capture_default_str();
    train->add_option("--out", o.out, "Output model JSON")->required();

    auto *sep = app.add_subcommand("separator", "Train the L1-constrained separator over a learnt similarity");
    sep->add_option("--model", o.model, "Model JSON")->required();
    sep->add_option("--data", o.data, "Training CSV")->required();
    sep->add_option("--max-iters", o.max_iters, "Iteration budget")->capture_default_str();
    sep->add_option("--step0", o.step0, "Initial step size")->capture_default_str();
    sep->add_option("--seed", o.seed, "Seed (the solver is deterministic)")->capture_default_str();
    sep->add_option("--out", o.out, "Output separator JSON")->required();

    auto *bounds = app.add_subcommand("bounds", "Compute Rademacher estimates and generalization bounds");
    bounds->add_option("--model", o.model, "Model JSON")->required();
    bounds->add_option("--data", o.data, "Training CSV the model was fit on")->required();
    bounds->add_option("--delta", o.delta, "Confidence parameter in (0,1)")->capture_default_str();
    bounds->add_option("--mc-draws", o.mc_draws, "Monte-Carlo sign draws")->capture_default_str();
    bounds->add_option("--seed", o.seed, "Monte-Carlo seed")->capture_default_str();
    bounds->add_option("--out", o.out, "Output report JSON")->required();

    auto *eval = app.add_subcommand("eval", "Evaluate a model (and optionally a separator) on a CSV dataset");
    eval->add_option("--model", o.model, "Model JSON")->required();
    eval->add_option("--data", o.data, "Evaluation CSV")->required();
    eval->add_option("--separator", o.separator, "Separator JSON");
    eval->add_option("--out", o.out, "Output JSON (stdout if omitted)");

    auto *exp = app.add_subcommand("experiment", "Run a multi-trial certification experiment");
    exp->add_option("--config", o.config, "Experiment config JSON")->required();
    exp->add_option("--output-dir", o.output_dir, "Overrides output_dir from the config");
    exp->footer(experiment_help());

    auto *kh = app.add_subcommand("khinchin", "Check the Khinchin-type moment inequality for one vector");
    kh->add_option("--f", o.f_values, "Comma-separated coefficients")->required();
    kh->add_option("--p", o.p, "Lower moment, > 1")->capture_default_str();
    kh->add_option("--q", o.q, "Upper moment, > p")->capture_default_str();
    kh->add_option("--mc-draws", o.mc_draws, "Draws used when n exceeds 20")->capture_default_str();
    kh->add_option("--seed", o.seed, "Monte-Carlo seed")->capture_default_str();
    kh->add_option("--out", o.out, "Output JSON (stdout if omitted)");

    auto *gen = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
    gen->add_option("--kind", o.kind, "two_gaussians or sparse_blobs")->capture_default_str();
    gen->add_option("--m", o.m, "Sample count")->capture_default_str();
    gen->add_option("--d", o.d, "Dimension")->capture_default_str();
    gen->add_option("--mean-separation", o.mean_separation)->capture_default_str();
    gen->add_option("--noise-sigma", o.noise_sigma)->capture_default_str();
    gen->add_option("--irrelevant-dims", o.irrelevant_dims)->capture_default_str();
    gen->add_option("--seed", o.seed)->capture_default_str();
    gen->add_option("--out", o.out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        std::cerr << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return 1;
    }

    try {
        if (*train)
            return cmd_train(o);
        if (*sep)
            return cmd_separator(o);
        if (*bounds)
            return cmd_bounds(o);
        if (*eval)
            return cmd_eval(o);
        if (*exp)
            return cmd_experiment(o);
        if (*kh)
            return cmd_khinchin(o);
        if (*gen)
            return cmd_generate(o);
    } catch (const numeric_error &e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
