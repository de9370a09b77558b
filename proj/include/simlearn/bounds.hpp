#pragma once

#include <simlearn/data.hpp>
#include <simlearn/norms.hpp>
#include <simlearn/rng.hpp>
#include <simlearn/similarity.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace simlearn {

namespace detail {

/// Vector norm of the anchor x~ in the rank-1 factorization of the dual norm:
/// ||v x~^T||_* = ||v||_a * ||x~||_b. Returns the norm `b`.
inline double anchor_norm(const Vector &x, NormKind kind) {
    return kind == NormKind::L1 ? x.lpNorm<Eigen::Infinity>() : x.norm();
}

inline Index argmax_anchor(const Dataset &data, NormKind kind) {
    Index best      = 0;
    double best_val = -1;
    for (Index i = 0; i < data.m(); ++i) {
        const double v = anchor_norm(data.features().row(i).transpose(), kind);
        if (v > best_val) {
            best_val = v;
            best     = i;
        }
    }
    return best;
}

inline double max_row_inf(const Matrix &x) { return x.cwiseAbs().maxCoeff(); }
inline double max_row_l2(const Matrix &x) { return x.rowwise().norm().maxCoeff(); }

inline void check_bound_args(double margin, double lambda, double delta, Index m, const char *who) {
    if (!(margin > 0) || !(lambda > 0))
        throw std::invalid_argument(std::string(who) + ": margin and lambda must be positive");
    if (!(delta > 0 && delta < 1))
        throw std::invalid_argument(std::string(who) + ": delta must lie in (0, 1)");
    if (m < 1)
        throw std::invalid_argument(std::string(who) + ": m must be at least 1");
}

} // namespace detail

/// sup over sample pairs of ||x' x^T||_*.
inline double x_star(const Dataset &data, NormKind kind) {
    const Matrix &x = data.features();
    switch (kind) {
        case NormKind::L1: {
            const double a = detail::max_row_inf(x);
            return a * a;
        }
        case NormKind::Frobenius:
        case NormKind::Trace: {
            const double a = detail::max_row_l2(x);
            return a * a;
        }
        case NormKind::Mixed21: return detail::max_row_inf(x) * detail::max_row_l2(x);
    }
    throw std::invalid_argument("x_star: bad kind");
}

struct RademacherEstimate {
    double estimate  = 0;
    double std_error = 0;
};

/// Value of one Rademacher draw: sup over sample anchors x~ of
/// ||(1/m) sum_i sigma_i y_i x_i x~^T||_*.
inline double rademacher_draw(const Dataset &data, NormKind kind, std::uint64_t seed, std::uint64_t draw,
                              const Vector &anchor) {
    CounterStream rng(seed, draw);
    Vector v = Vector::Zero(data.d());
    for (Index i = 0; i < data.m(); ++i)
        v += (rng.sign() * data.y(i)) * data.features().row(i).transpose();
    v /= static_cast<double>(data.m());
    return dual_norm_rank1(v, anchor, kind);
}

/// Monte-Carlo estimate of the sample-conditional Rademacher average.
///
/// Draw k uses Philox substream k of `seed`, so each draw's value does not
/// depend on evaluation order; mean and standard error are reduced in draw
/// order.
inline RademacherEstimate rademacher_empirical(const Dataset &data, NormKind kind, int mc_draws,
                                               std::uint64_t seed) {
    if (mc_draws < 1)
        throw std::invalid_argument("rademacher_empirical: mc_draws must be at least 1");
    // The sup over x~ factorizes; only the sample point of largest anchor norm matters.
    const Vector anchor = data.x(detail::argmax_anchor(data, kind));
    std::vector<double> values(static_cast<std::size_t>(mc_draws));
    for (int k = 0; k < mc_draws; ++k)
        values[static_cast<std::size_t>(k)] = rademacher_draw(data, kind, seed, static_cast<std::uint64_t>(k), anchor);

    double sum = 0;
    for (double v : values)
        sum += v;
    const double mean = sum / mc_draws;
    if (mc_draws == 1)
        return {mean, 0.0};
    double ss = 0;
    for (double v : values)
        ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (mc_draws - 1));
    return {mean, sd / std::sqrt(static_cast<double>(mc_draws))};
}

/// Closed-form upper estimates from sample statistics. `m` is real so the
/// formulas can be evaluated off the integer grid.
///   L1       2 max_inf^2 sqrt(e ln(d+1) / m)
///   Frob.    2 max_l2^2 / sqrt(m)
///   Mixed21  2 max_l2 max_inf sqrt(e ln(d+1) / m)
///   Trace    max_l2 sqrt(total_sq) / m, total_sq = sum_j ||x_j||_2^2
inline double rademacher_analytic_value(NormKind kind, double max_inf, double max_l2, double total_sq, double m,
                                        double d) {
    if (!(m > 0) || !(d >= 1))
        throw std::invalid_argument("rademacher_analytic_value: need m > 0 and d >= 1");
    const double khinchin_factor = std::sqrt(std::numbers::e * std::log(d + 1) / m);
    switch (kind) {
        case NormKind::L1: return 2 * max_inf * max_inf * khinchin_factor;
        case NormKind::Frobenius: return 2 * max_l2 * max_l2 / std::sqrt(m);
        case NormKind::Mixed21: return 2 * max_l2 * max_inf * khinchin_factor;
        case NormKind::Trace: return max_l2 * std::sqrt(total_sq) / m;
    }
    throw std::invalid_argument("rademacher_analytic_value: bad kind");
}

inline double rademacher_analytic(const Dataset &data, NormKind kind) {
    const Matrix &x = data.features();
    return rademacher_analytic_value(kind, detail::max_row_inf(x), detail::max_row_l2(x), x.squaredNorm(),
                                     static_cast<double>(data.m()), static_cast<double>(data.d()));
}

/// Bound on E(A_z) - E_z(A_z) holding with probability 1 - delta.
inline double theorem1_bound(double x_star_value, double r_m, double margin, double lambda, double delta, Index m) {
    detail::check_bound_args(margin, lambda, delta, m, "theorem1_bound");
    const double scale = margin * lambda;
    return 6 * r_m / scale +
           (2 * x_star_value / scale) * std::sqrt(2 * std::log(1 / delta) / static_cast<double>(m));
}

/// Bound on the true hinge error of the separator in terms of E_z(A_z).
inline double theorem2_bound(double e_z_of_a, double x_star_value, double r_m, double margin, double lambda,
                             double delta, Index m) {
    detail::check_bound_args(margin, lambda, delta, m, "theorem2_bound");
    if (!(e_z_of_a >= 0))
        throw std::invalid_argument("theorem2_bound: empirical error must be nonnegative");
    const double scale = lambda * margin;
    return e_z_of_a + 4 * r_m / scale +
           (2 * x_star_value / scale) * std::sqrt(2 * std::log(1 / delta) / static_cast<double>(m));
}

// ---------------------------------------------------------------------------
// Khinchin-type moment inequality for Rademacher sums:
//   (E|sum sigma_i f_i|^q)^(1/q) <= sqrt((q-1)/(p-1)) (E|sum sigma_i f_i|^p)^(1/p)

struct KhinchinExact {};
struct KhinchinMonteCarlo {
    int draws          = 10000;
    std::uint64_t seed = 0;
};
using KhinchinMode = std::variant<KhinchinExact, KhinchinMonteCarlo>;

struct KhinchinResult {
    double lhs = 0;
    double rhs = 0;
    bool holds = false;
};

inline constexpr Index khinchin_exact_max_n = 20;

/// Exact mode enumerates all 2^n sign vectors (n <= 20); Monte-Carlo mode
/// samples them, in which case `holds` is only an empirical indication.
inline KhinchinResult khinchin_check(const Vector &f, double p, double q, KhinchinMode mode = KhinchinExact{}) {
    if (!(p > 1) || !(q > p) || !std::isfinite(q))
        throw std::invalid_argument("khinchin_check: need 1 < p < q < inf");
    const Index n = f.size();
    if (n < 1)
        throw std::invalid_argument("khinchin_check: f must be nonempty");

    double sum_p = 0, sum_q = 0, count = 0;
    auto accumulate = [&](double s) {
        const double a = std::abs(s);
        sum_p += std::pow(a, p);
        sum_q += std::pow(a, q);
        count += 1;
    };

    if (std::holds_alternative<KhinchinExact>(mode)) {
        if (n > khinchin_exact_max_n)
            throw std::invalid_argument("khinchin_check: exact mode supports n <= 20, got " + std::to_string(n));
        const std::uint64_t patterns = std::uint64_t{1} << n;
        for (std::uint64_t bits = 0; bits < patterns; ++bits) {
            double s = 0;
            for (Index i = 0; i < n; ++i)
                s += ((bits >> i) & 1u) ? f(i) : -f(i);
            accumulate(s);
        }
    } else {
        const auto &mc = std::get<KhinchinMonteCarlo>(mode);
        if (mc.draws < 1)
            throw std::invalid_argument("khinchin_check: draws must be at least 1");
        for (int k = 0; k < mc.draws; ++k) {
            CounterStream rng(mc.seed, static_cast<std::uint64_t>(k));
            double s = 0;
            for (Index i = 0; i < n; ++i)
                s += rng.sign() * f(i);
            accumulate(s);
        }
    }
    KhinchinResult out;
    out.lhs   = std::pow(sum_q / count, 1 / q);
    out.rhs   = std::sqrt((q - 1) / (p - 1)) * std::pow(sum_p / count, 1 / p);
    out.holds = out.lhs <= out.rhs + 1e-12;
    return out;
}

// ---------------------------------------------------------------------------

struct BoundReport {
    NormKind norm_kind      = NormKind::Frobenius;
    double x_star           = 0;
    double r_m_empirical    = 0;
    double r_m_std_error    = 0;
    double r_m_analytic     = 0;
    double r_m_used         = 0; // min(empirical, analytic), used in both bounds
    double delta            = 0.05;
    Index m                 = 0;
    double lambda           = 0;
    double margin           = 0;
    double e_z              = 0; // E_z(A_z) on the training data
    double theorem1_bound   = 0;
    double theorem2_bound   = 0;
    int mc_draws            = 0;
    std::uint64_t seed      = 0;
};

inline BoundReport build_bound_report(const SimilarityModel &model, const Dataset &data, double delta, int mc_draws,
                                      std::uint64_t seed) {
    detail::check_dims(model.a, data, "build_bound_report");
    const auto &cfg = model.config;
    BoundReport rep;
    rep.norm_kind     = cfg.norm_kind;
    rep.delta         = delta;
    rep.m             = data.m();
    rep.lambda        = cfg.lambda;
    rep.margin        = cfg.margin;
    rep.mc_draws      = mc_draws;
    rep.seed          = seed;
    rep.x_star        = x_star(data, cfg.norm_kind);
    const auto mc     = rademacher_empirical(data, cfg.norm_kind, mc_draws, seed);
    rep.r_m_empirical = mc.estimate;
    rep.r_m_std_error = mc.std_error;
    rep.r_m_analytic  = rademacher_analytic(data, cfg.norm_kind);
    rep.r_m_used      = std::min(rep.r_m_empirical, rep.r_m_analytic);
    rep.e_z           = empirical_similarity_error(model.a, data, cfg.margin);
    rep.theorem1_bound = simlearn::theorem1_bound(rep.x_star, rep.r_m_used, rep.margin, rep.lambda, delta, rep.m);
    rep.theorem2_bound =
        simlearn::theorem2_bound(rep.e_z, rep.x_star, rep.r_m_used, rep.margin, rep.lambda, delta, rep.m);
    return rep;
}

} // namespace simlearn
