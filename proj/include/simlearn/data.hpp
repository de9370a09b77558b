#pragma once

#include <simlearn/errors.hpp>
#include <simlearn/format.hpp>
#include <simlearn/norms.hpp>
#include <simlearn/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace simlearn {

/// Labeled sample: m rows of d features with labels in {-1, +1}.
class Dataset {
  public:
    Dataset(Matrix features, Vector labels) : x_(std::move(features)), y_(std::move(labels)) {
        if (x_.rows() < 1 || x_.cols() < 1)
            throw std::invalid_argument("Dataset: need at least one sample and one feature");
        if (y_.size() != x_.rows())
            throw std::invalid_argument("Dataset: label count does not match sample count");
        for (Index i = 0; i < y_.size(); ++i)
            if (y_(i) != 1.0 && y_(i) != -1.0)
                throw std::invalid_argument("Dataset: label at row " + std::to_string(i + 1) +
                                            " is not -1 or +1");
    }

    Index m() const { return x_.rows(); }
    Index d() const { return x_.cols(); }
    const Matrix &features() const { return x_; }
    const Vector &labels() const { return y_; }
    Vector x(Index i) const { return x_.row(i).transpose(); }
    double y(Index i) const { return y_(i); }

    /// Dataset made of the given rows, in order.
    Dataset subset(const std::vector<Index> &rows) const {
        Matrix f(static_cast<Index>(rows.size()), d());
        Vector l(static_cast<Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) {
            f.row(static_cast<Index>(k)) = x_.row(rows[k]);
            l(static_cast<Index>(k))     = y_(rows[k]);
        }
        return Dataset(std::move(f), std::move(l));
    }

    friend bool operator==(const Dataset &a, const Dataset &b) {
        return a.x_.rows() == b.x_.rows() && a.x_.cols() == b.x_.cols() && a.x_ == b.x_ && a.y_ == b.y_;
    }

  private:
    Matrix x_;
    Vector y_;
};

enum class GeneratorKind { TwoGaussians, SparseBlobs };

inline std::string_view to_string(GeneratorKind k) {
    return k == GeneratorKind::TwoGaussians ? "two_gaussians" : "sparse_blobs";
}

inline GeneratorKind parse_generator_kind(std::string_view s) {
    if (s == "two_gaussians")
        return GeneratorKind::TwoGaussians;
    if (s == "sparse_blobs")
        return GeneratorKind::SparseBlobs;
    throw std::invalid_argument("unknown generator kind '" + std::string(s) +
                                "' (expected two_gaussians or sparse_blobs)");
}

struct GeneratorSpec {
    GeneratorKind kind     = GeneratorKind::TwoGaussians;
    Index d                = 2;
    double mean_separation = 2.0;
    double noise_sigma     = 1.0;
    Index irrelevant_dims  = 0; // SparseBlobs only
    std::uint64_t seed     = 0;

    void validate() const {
        if (d < 1)
            throw std::invalid_argument("GeneratorSpec: d must be at least 1");
        if (!(noise_sigma > 0) || !std::isfinite(noise_sigma))
            throw std::invalid_argument("GeneratorSpec: noise_sigma must be positive");
        if (!std::isfinite(mean_separation))
            throw std::invalid_argument("GeneratorSpec: mean_separation must be finite");
        if (irrelevant_dims < 0)
            throw std::invalid_argument("GeneratorSpec: irrelevant_dims must be nonnegative");
        if (kind == GeneratorKind::SparseBlobs && irrelevant_dims >= d)
            throw std::invalid_argument("GeneratorSpec: irrelevant_dims must be smaller than d");
    }
};

/// Draws m labeled points. Labels are fair coin flips; class y has mean
/// y * (mean_separation / 2) / sqrt(k) on each of its k informative
/// coordinates and isotropic Gaussian noise of scale noise_sigma. Normals come
/// from Box-Muller over a single Philox stream keyed by `spec.seed`, so the
/// output is fixed by (spec, m).
inline Dataset generate(const GeneratorSpec &spec, Index m) {
    spec.validate();
    if (m < 1)
        throw std::invalid_argument("generate: m must be at least 1");
    const Index informative = spec.kind == GeneratorKind::SparseBlobs ? spec.d - spec.irrelevant_dims : spec.d;
    const double mu         = spec.mean_separation / 2.0 / std::sqrt(static_cast<double>(informative));

    CounterStream rng(spec.seed, 0);
    Matrix x(m, spec.d);
    Vector y(m);
    for (Index i = 0; i < m; ++i) {
        y(i) = rng.sign();
        for (Index k = 0; k < spec.d; ++k) {
            const double mean = k < informative ? y(i) * mu : 0.0;
            x(i, k)           = mean + spec.noise_sigma * rng.normal();
        }
    }
    return Dataset(std::move(x), std::move(y));
}

/// Seeded shuffle, then the first ceil(f*m) rows go to train.
inline std::pair<Dataset, Dataset> split(const Dataset &data, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0 && train_fraction < 1))
        throw std::invalid_argument("split: train_fraction must lie in (0, 1)");
    const Index m       = data.m();
    const auto n_train  = static_cast<Index>(std::ceil(train_fraction * static_cast<double>(m)));
    if (n_train < 1 || n_train >= m)
        throw std::invalid_argument("split: degenerate split (" + std::to_string(n_train) + " of " +
                                    std::to_string(m) + " rows to train)");
    std::vector<Index> perm(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i)
        perm[static_cast<std::size_t>(i)] = i;
    CounterStream rng(seed, 1);
    for (std::size_t i = perm.size() - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.below(i + 1)]);
    std::vector<Index> tr(perm.begin(), perm.begin() + n_train);
    std::vector<Index> te(perm.begin() + n_train, perm.end());
    return {data.subset(tr), data.subset(te)};
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        cells.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return cells;
}

} // namespace detail

/// Parses `label,feat_1,...,feat_d` rows. Labels must be -1, 1 or +1. A
/// header is accepted only when its first cell is `label`. Blank lines are
/// skipped. Error messages name the 1-based line number.
inline Dataset parse_csv(std::istream &in, const std::string &source = "<stream>") {
    std::vector<double> feats;
    std::vector<double> labels;
    Index d = -1;
    std::string line;
    int lineno = 0;
    auto fail  = [&](const std::string &what) {
        throw data_error(source + ": row " + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = trim(line);
        if (view.empty())
            continue;
        auto cells = detail::split_commas(view);
        if (lineno == 1 && trim(cells[0]) == "label")
            continue;
        if (cells.size() < 2)
            fail("expected a label and at least one feature");
        const auto label = trim(cells[0]);
        if (label == "1" || label == "+1")
            labels.push_back(1.0);
        else if (label == "-1")
            labels.push_back(-1.0);
        else
            fail("label '" + std::string(label) + "' is not -1 or +1");
        const auto width = static_cast<Index>(cells.size() - 1);
        if (d < 0)
            d = width;
        else if (width != d)
            fail("expected " + std::to_string(d) + " features, found " + std::to_string(width));
        for (std::size_t c = 1; c < cells.size(); ++c) {
            auto v = parse_double(cells[c]);
            if (!v || !std::isfinite(*v))
                fail("feature " + std::to_string(c) + " ('" + std::string(trim(cells[c])) + "') is not a finite number");
            feats.push_back(*v);
        }
    }
    if (labels.empty())
        throw data_error(source + ": no data rows");
    const auto m = static_cast<Index>(labels.size());
    Matrix x(m, d);
    for (Index i = 0; i < m; ++i)
        for (Index k = 0; k < d; ++k)
            x(i, k) = feats[static_cast<std::size_t>(i * d + k)];
    return Dataset(std::move(x), Eigen::Map<Vector>(labels.data(), m));
}

inline Dataset load_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw data_error("cannot open '" + path + "'");
    return parse_csv(in, path);
}

/// Header `label,x1,...,xd`, then one row per sample with shortest
/// round-trip decimals.
inline void write_csv(std::ostream &out, const Dataset &data) {
    out << "label";
    for (Index k = 0; k < data.d(); ++k)
        out << ",x" << (k + 1);
    out << '\n';
    for (Index i = 0; i < data.m(); ++i) {
        out << (data.y(i) > 0 ? "1" : "-1");
        for (Index k = 0; k < data.d(); ++k)
            out << ',' << format_double(data.features()(i, k));
        out << '\n';
    }
}

inline void save_csv(const std::string &path, const Dataset &data) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw data_error("cannot write '" + path + "'");
    write_csv(out, data);
    if (!out)
        throw data_error("write failed for '" + path + "'");
}

} // namespace simlearn
