#pragma once

// Multi-trial certification runs over a grid of (m, d, norm) cells.

#include <simlearn/bounds.hpp>
#include <simlearn/data.hpp>
#include <simlearn/errors.hpp>
#include <simlearn/format.hpp>
#include <simlearn/io.hpp>
#include <simlearn/rng.hpp>
#include <simlearn/separator.hpp>
#include <simlearn/similarity.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

namespace simlearn {

struct ExperimentConfig {
    GeneratorSpec generator; // d and seed are overridden per cell / trial
    std::vector<Index> m_values;
    std::vector<Index> d_values;
    std::vector<NormKind> norm_kinds;
    double lambda      = 0.1;
    double margin      = 1.0;
    double delta       = 0.05;
    int trials         = 1;
    int mc_draws       = 1000;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    Index holdout_size     = 10000;
    int max_iters          = 2000; // both solvers
    double step0           = 1.0;

    void validate() const {
        if (m_values.empty() || d_values.empty() || norm_kinds.empty())
            throw std::invalid_argument("experiment: m_values, d_values and norm_kinds must be nonempty");
        for (Index m : m_values)
            if (m < 1)
                throw std::invalid_argument("experiment: m values must be positive");
        for (Index d : d_values) {
            GeneratorSpec g = generator;
            g.d             = d;
            g.validate();
        }
        if (trials < 1)
            throw std::invalid_argument("experiment: trials must be at least 1");
        if (mc_draws < 1)
            throw std::invalid_argument("experiment: mc_draws must be at least 1");
        if (!(delta > 0 && delta < 1))
            throw std::invalid_argument("experiment: delta must lie in (0, 1)");
        if (holdout_size < 1)
            throw std::invalid_argument("experiment: holdout_size must be positive");
        similarity_config(NormKind::Frobenius, 0).validate();
    }

    SimilarityConfig similarity_config(NormKind kind, std::uint64_t trial_seed) const {
        SimilarityConfig c;
        c.lambda    = lambda;
        c.margin    = margin;
        c.norm_kind = kind;
        c.max_iters = max_iters;
        c.step0     = step0;
        c.seed      = trial_seed;
        return c;
    }
};

/// One (m, d, norm, trial) run.
struct ExperimentRow {
    Index m = 0, d = 0;
    NormKind norm_kind = NormKind::Frobenius;
    int trial          = 0;
    std::uint64_t seed = 0;
    double a_norm = 0, objective = 0;
    int iterations = 0;
    double e_z = 0, e_holdout = 0, gap = 0;
    double anchor_hinge = 0; // hinge error of the alpha^0 separator on train
    double sep_hinge_train = 0, sep_hinge_holdout = 0, sep_zero_one_holdout = 0;
    double alpha_l1 = 0;
    double x_star = 0, r_m_empirical = 0, r_m_std_error = 0, r_m_analytic = 0, r_m_used = 0;
    double theorem1_bound = 0, theorem2_bound = 0;
    bool theorem1_holds = false, theorem2_holds = false;
};

inline const std::vector<std::string> &experiment_csv_columns() {
    static const std::vector<std::string> cols{
        "m",              "d",              "norm",           "trial",         "seed",
        "a_norm",         "objective",      "iterations",     "e_z",           "e_holdout",
        "gap",            "anchor_hinge",   "sep_hinge_train", "sep_hinge_holdout", "sep_zero_one_holdout",
        "alpha_l1",       "x_star",         "r_m_empirical",  "r_m_std_error", "r_m_analytic",
        "r_m_used",       "theorem1_bound", "theorem2_bound", "theorem1_holds", "theorem2_holds"};
    return cols;
}

/// Seeds for one trial. Depends only on (master, m, d, norm, trial).
inline std::uint64_t trial_seed(std::uint64_t master, Index m, Index d, NormKind kind, int trial) {
    return derive_seed(master, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(d),
                                static_cast<std::uint64_t>(norm_index(kind)), static_cast<std::uint64_t>(trial)});
}

inline ExperimentRow run_trial(const ExperimentConfig &cfg, Index m, Index d, NormKind kind, int trial) {
    ExperimentRow row;
    row.m         = m;
    row.d         = d;
    row.norm_kind = kind;
    row.trial     = trial;
    row.seed      = trial_seed(cfg.seed, m, d, kind, trial);

    GeneratorSpec spec = cfg.generator;
    spec.d             = d;
    spec.seed          = derive_seed(row.seed, {0});
    const Dataset train = generate(spec, m);
    spec.seed           = derive_seed(row.seed, {1});
    const Dataset holdout = generate(spec, cfg.holdout_size);

    const SimilarityModel model = train_similarity(train, cfg.similarity_config(kind, row.seed));
    row.a_norm     = norm(model.a, kind);
    row.objective  = model.final_objective;
    row.iterations = model.iterations_run;
    row.e_z        = empirical_similarity_error(model.a, train, cfg.margin);
    row.e_holdout  = true_similarity_error(model.a, holdout, cfg.margin);
    row.gap        = row.e_holdout - row.e_z;

    row.anchor_hinge = empirical_hinge_error(make_separator(model, train, anchor_alpha(train, cfg.margin)), train);
    const Separator sep   = train_separator(model, train, SeparatorConfig{cfg.max_iters, cfg.step0, row.seed});
    row.sep_hinge_train   = empirical_hinge_error(sep, train);
    row.sep_hinge_holdout = true_hinge_error(sep, holdout);
    row.sep_zero_one_holdout = zero_one_error(sep, holdout);
    row.alpha_l1             = sep.l1_budget();

    const BoundReport rep = build_bound_report(model, train, cfg.delta, cfg.mc_draws, derive_seed(row.seed, {2}));
    row.x_star         = rep.x_star;
    row.r_m_empirical  = rep.r_m_empirical;
    row.r_m_std_error  = rep.r_m_std_error;
    row.r_m_analytic   = rep.r_m_analytic;
    row.r_m_used       = rep.r_m_used;
    row.theorem1_bound = rep.theorem1_bound;
    row.theorem2_bound = rep.theorem2_bound;
    row.theorem1_holds = row.gap <= rep.theorem1_bound;
    row.theorem2_holds = row.sep_hinge_holdout <= rep.theorem2_bound;
    return row;
}

/// Runs every cell in (m, d, norm, trial) order. `on_row` sees each row as
/// it is produced. Failures are rethrown with the cell and trial attached.
inline std::vector<ExperimentRow> run_experiment(const ExperimentConfig &cfg,
                                                 const std::function<void(const ExperimentRow &)> &on_row = {}) {
    cfg.validate();
    std::vector<ExperimentRow> rows;
    for (Index m : cfg.m_values)
        for (Index d : cfg.d_values)
            for (NormKind kind : cfg.norm_kinds)
                for (int trial = 0; trial < cfg.trials; ++trial) {
                    auto context = [&] {
                        return "cell m=" + std::to_string(m) + " d=" + std::to_string(d) + " norm=" +
                               std::string(to_string(kind)) + " trial=" + std::to_string(trial) + ": ";
                    };
                    try {
                        rows.push_back(run_trial(cfg, m, d, kind, trial));
                    } catch (const numeric_error &e) {
                        throw numeric_error(context() + e.what());
                    } catch (const data_error &e) {
                        throw data_error(context() + e.what());
                    } catch (const std::invalid_argument &e) {
                        throw std::invalid_argument(context() + e.what());
                    }
                    if (on_row)
                        on_row(rows.back());
                }
    return rows;
}

inline void write_experiment_csv(std::ostream &out, const std::vector<ExperimentRow> &rows) {
    const auto &cols = experiment_csv_columns();
    for (std::size_t k = 0; k < cols.size(); ++k)
        out << (k ? "," : "") << cols[k];
    out << '\n';
    auto f = [](double v) { return format_double(v); };
    for (const auto &r : rows) {
        out << r.m << ',' << r.d << ',' << to_string(r.norm_kind) << ',' << r.trial << ',' << r.seed << ','
            << f(r.a_norm) << ',' << f(r.objective) << ',' << r.iterations << ',' << f(r.e_z) << ','
            << f(r.e_holdout) << ',' << f(r.gap) << ',' << f(r.anchor_hinge) << ',' << f(r.sep_hinge_train) << ','
            << f(r.sep_hinge_holdout) << ',' << f(r.sep_zero_one_holdout) << ',' << f(r.alpha_l1) << ','
            << f(r.x_star) << ',' << f(r.r_m_empirical) << ',' << f(r.r_m_std_error) << ',' << f(r.r_m_analytic)
            << ',' << f(r.r_m_used) << ',' << f(r.theorem1_bound) << ',' << f(r.theorem2_bound) << ','
            << int(r.theorem1_holds) << ',' << int(r.theorem2_holds) << '\n';
    }
}

/// Least-squares slope of log(y) against log(x).
inline double log_log_slope(const std::vector<double> &x, const std::vector<double> &y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("log_log_slope: need at least two matching points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0)
        throw std::invalid_argument("log_log_slope: x values must differ");
    return (n * sxy - sx * sy) / denom;
}

/// Per-cell violation frequencies and, for every (d, norm) with at least two
/// m values, the slope of mean r_m_empirical against m on log-log axes.
inline json experiment_summary(const ExperimentConfig &cfg, const std::vector<ExperimentRow> &rows) {
    struct Cell {
        int n = 0, v1 = 0, v2 = 0;
        double gap = 0, rm = 0, hinge = 0;
    };
    // key order: (m, d, norm) ascending, matching the run order for sorted grids
    std::map<std::tuple<Index, Index, int>, Cell> cells;
    for (const auto &r : rows) {
        Cell &c = cells[{r.m, r.d, norm_index(r.norm_kind)}];
        ++c.n;
        c.v1 += !r.theorem1_holds;
        c.v2 += !r.theorem2_holds;
        c.gap += r.gap;
        c.rm += r.r_m_empirical;
        c.hinge += r.sep_hinge_holdout;
    }
    json jc = json::array();
    for (const auto &[key, c] : cells) {
        const auto [m, d, k] = key;
        jc.push_back({{"m", m},
                      {"d", d},
                      {"norm", std::string(to_string(all_norm_kinds[static_cast<std::size_t>(k)]))},
                      {"trials", c.n},
                      {"theorem1_violation_frequency", double(c.v1) / c.n},
                      {"theorem2_violation_frequency", double(c.v2) / c.n},
                      {"mean_gap", c.gap / c.n},
                      {"mean_sep_hinge_holdout", c.hinge / c.n},
                      {"mean_r_m_empirical", c.rm / c.n}});
    }
    json slopes = json::array();
    for (Index d : cfg.d_values)
        for (NormKind kind : cfg.norm_kinds) {
            std::vector<double> xs, ys;
            for (const auto &[key, c] : cells)
                if (std::get<1>(key) == d && std::get<2>(key) == norm_index(kind) && c.rm > 0) {
                    xs.push_back(static_cast<double>(std::get<0>(key)));
                    ys.push_back(c.rm / c.n);
                }
            if (xs.size() >= 2)
                slopes.push_back({{"d", d}, {"norm", std::string(to_string(kind))}, {"slope", log_log_slope(xs, ys)}});
        }
    return json{{"runs", rows.size()}, {"seed", cfg.seed}, {"cells", jc}, {"r_m_slopes", slopes}};
}

inline ExperimentConfig experiment_config_from_json(const json &j) {
    return detail::guarded("experiment config", [&] {
        ExperimentConfig c;
        const auto &g = j.at("generator");
        c.generator.kind            = parse_generator_kind(g.at("kind").get<std::string>());
        c.generator.mean_separation = g.value("mean_separation", c.generator.mean_separation);
        c.generator.noise_sigma     = g.value("noise_sigma", c.generator.noise_sigma);
        c.generator.irrelevant_dims = g.value("irrelevant_dims", c.generator.irrelevant_dims);
        c.m_values                  = j.at("m_values").get<std::vector<Index>>();
        c.d_values                  = j.at("d_values").get<std::vector<Index>>();
        for (const auto &n : j.at("norm_kinds"))
            c.norm_kinds.push_back(parse_norm_kind(n.get<std::string>()));
        c.lambda       = j.at("lambda").get<double>();
        c.margin       = j.at("margin").get<double>();
        c.delta        = j.at("delta").get<double>();
        c.trials       = j.at("trials").get<int>();
        c.mc_draws     = j.at("mc_draws").get<int>();
        c.seed         = j.at("seed").get<std::uint64_t>();
        c.output_dir   = j.value("output_dir", c.output_dir);
        c.holdout_size = j.value("holdout_size", c.holdout_size);
        c.max_iters    = j.value("max_iters", c.max_iters);
        c.step0        = j.value("step0", c.step0);
        c.validate();
        return c;
    });
}

/// Writes runs.csv and summary.json under cfg.output_dir.
inline void write_experiment_outputs(const ExperimentConfig &cfg, const std::vector<ExperimentRow> &rows) {
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir / "runs.csv", std::ios::binary);
    if (!csv)
        throw data_error("cannot write " + (dir / "runs.csv").string());
    write_experiment_csv(csv, rows);
    write_json_file((dir / "summary.json").string(), experiment_summary(cfg, rows));
}

} // namespace simlearn
