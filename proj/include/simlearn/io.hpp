#pragma once

// JSON documents for models, separators, bound reports and datasets.

#include <simlearn/bounds.hpp>
#include <simlearn/data.hpp>
#include <simlearn/errors.hpp>
#include <simlearn/separator.hpp>
#include <simlearn/similarity.hpp>

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace simlearn {

using json = nlohmann::json;

namespace detail {

inline json row_major(const Matrix &m) {
    json out = json::array();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            out.push_back(m(i, j));
    return out;
}

inline Matrix matrix_from(const json &entries, Index rows, Index cols, const char *what) {
    if (!entries.is_array() || entries.size() != static_cast<std::size_t>(rows * cols))
        throw data_error(std::string(what) + ": expected " + std::to_string(rows * cols) + " entries");
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j)
            m(i, j) = entries.at(static_cast<std::size_t>(i * cols + j)).get<double>();
    return m;
}

template <class F>
auto guarded(const char *what, F &&f) {
    try {
        return f();
    } catch (const data_error &) {
        throw;
    } catch (const std::exception &e) {
        throw data_error(std::string(what) + ": " + e.what());
    }
}

} // namespace detail

inline json to_json(const SimilarityModel &model) {
    return json{
        {"dim", model.a.dim()},
        {"norm_kind", std::string(to_string(model.config.norm_kind))},
        {"lambda", model.config.lambda},
        {"margin", model.config.margin},
        {"entries", detail::row_major(model.a.matrix())},
        {"final_objective", model.final_objective},
        {"iterations_run", model.iterations_run},
        {"solver",
         {{"max_iters", model.config.max_iters},
          {"step0", model.config.step0},
          {"rel_tol", model.config.rel_tol},
          {"seed", model.config.seed}}},
    };
}

inline SimilarityModel model_from_json(const json &j) {
    return detail::guarded("similarity model", [&] {
        const auto dim = j.at("dim").get<Index>();
        if (dim < 1)
            throw data_error("similarity model: dim must be at least 1");
        SimilarityConfig cfg;
        cfg.norm_kind = parse_norm_kind(j.at("norm_kind").get<std::string>());
        cfg.lambda    = j.at("lambda").get<double>();
        cfg.margin    = j.at("margin").get<double>();
        if (j.contains("solver")) {
            const auto &s = j.at("solver");
            cfg.max_iters = s.value("max_iters", cfg.max_iters);
            cfg.step0     = s.value("step0", cfg.step0);
            cfg.rel_tol   = s.value("rel_tol", cfg.rel_tol);
            cfg.seed      = s.value("seed", cfg.seed);
        }
        cfg.validate();
        Matrix a = detail::matrix_from(j.at("entries"), dim, dim, "similarity model entries");
        if (!a.allFinite())
            throw data_error("similarity model: entries must be finite");
        return SimilarityModel{SymMatrix(std::move(a)), cfg, j.at("final_objective").get<double>(),
                               j.at("iterations_run").get<int>()};
    });
}

inline json to_json(const Separator &sep) {
    json alpha = json::array();
    for (Index i = 0; i < sep.alpha.size(); ++i)
        alpha.push_back(sep.alpha(i));
    return json{
        {"alpha", alpha},
        {"margin", sep.margin},
        {"anchor_features", detail::row_major(sep.anchors)},
        {"model", to_json(sep.model)},
    };
}

inline Separator separator_from_json(const json &j) {
    return detail::guarded("separator", [&] {
        SimilarityModel model = model_from_json(j.at("model"));
        const auto &a         = j.at("alpha");
        const auto m          = static_cast<Index>(a.size());
        Vector alpha(m);
        for (Index i = 0; i < m; ++i)
            alpha(i) = a.at(static_cast<std::size_t>(i)).get<double>();
        Matrix anchors = detail::matrix_from(j.at("anchor_features"), m, model.a.dim(), "separator anchors");
        Separator sep{std::move(alpha), j.at("margin").get<double>(), std::move(anchors), std::move(model)};
        detail::check_separator(sep);
        return sep;
    });
}

inline json to_json(const BoundReport &r) {
    return json{
        {"norm_kind", std::string(to_string(r.norm_kind))},
        {"x_star", r.x_star},
        {"r_m_empirical", r.r_m_empirical},
        {"r_m_std_error", r.r_m_std_error},
        {"r_m_analytic", r.r_m_analytic},
        {"r_m_used", r.r_m_used},
        {"delta", r.delta},
        {"m", r.m},
        {"lambda", r.lambda},
        {"margin", r.margin},
        {"e_z", r.e_z},
        {"theorem1_bound", r.theorem1_bound},
        {"theorem2_bound", r.theorem2_bound},
        {"mc_draws", r.mc_draws},
        {"seed", r.seed},
    };
}

inline BoundReport bound_report_from_json(const json &j) {
    return detail::guarded("bound report", [&] {
        BoundReport r;
        r.norm_kind      = parse_norm_kind(j.at("norm_kind").get<std::string>());
        r.x_star         = j.at("x_star").get<double>();
        r.r_m_empirical  = j.at("r_m_empirical").get<double>();
        r.r_m_std_error  = j.at("r_m_std_error").get<double>();
        r.r_m_analytic   = j.at("r_m_analytic").get<double>();
        r.r_m_used       = j.at("r_m_used").get<double>();
        r.delta          = j.at("delta").get<double>();
        r.m              = j.at("m").get<Index>();
        r.lambda         = j.at("lambda").get<double>();
        r.margin         = j.at("margin").get<double>();
        r.e_z            = j.at("e_z").get<double>();
        r.theorem1_bound = j.at("theorem1_bound").get<double>();
        r.theorem2_bound = j.at("theorem2_bound").get<double>();
        r.mc_draws       = j.at("mc_draws").get<int>();
        r.seed           = j.at("seed").get<std::uint64_t>();
        return r;
    });
}

/// Mirrors the CSV content: {m, d, labels, features (row-major)}.
inline json to_json(const Dataset &data) {
    json labels = json::array();
    for (Index i = 0; i < data.m(); ++i)
        labels.push_back(static_cast<int>(data.y(i)));
    return json{{"m", data.m()}, {"d", data.d()}, {"labels", labels}, {"features", detail::row_major(data.features())}};
}

inline Dataset dataset_from_json(const json &j) {
    return detail::guarded("dataset", [&] {
        const auto m = j.at("m").get<Index>();
        const auto d = j.at("d").get<Index>();
        Vector y(m);
        const auto &labels = j.at("labels");
        if (labels.size() != static_cast<std::size_t>(m))
            throw data_error("dataset: label count does not match m");
        for (Index i = 0; i < m; ++i)
            y(i) = labels.at(static_cast<std::size_t>(i)).get<double>();
        return Dataset(detail::matrix_from(j.at("features"), m, d, "dataset features"), std::move(y));
    });
}

inline json read_json_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw data_error("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw data_error(path + ": " + e.what());
    }
}

/// Two-space indented JSON followed by a newline.
inline void write_json_file(const std::string &path, const json &j) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw data_error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
    if (!out)
        throw data_error("write failed for '" + path + "'");
}

} // namespace simlearn
