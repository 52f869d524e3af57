#pragma once

// Multi-column ensemble: N networks trained on rotating folds of the
// training data, posteriors averaged with uniform weights.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "namelink/error.hpp"
#include "namelink/model.hpp"
#include "namelink/parallel.hpp"
#include "namelink/random.hpp"

namespace namelink {

/// Correctly rounded sum of finite doubles (Shewchuk partials with a
/// half-way correction). The result does not depend on input order.
inline double exact_sum(std::span<const double> values) {
    std::vector<double> partials;
    for (double x : values) {
        std::size_t i = 0;
        for (double y : partials) {
            if (std::abs(x) < std::abs(y)) std::swap(x, y);
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0) partials[i++] = lo;
            x = hi;
        }
        partials.resize(i);
        partials.push_back(x);
    }
    std::size_t n = partials.size();
    if (n == 0) return 0.0;
    double hi = partials[--n];
    double lo = 0.0;
    while (n > 0) {
        const double x = hi;
        const double y = partials[--n];
        hi = x + y;
        const double yr = hi - x;
        lo = y - yr;
        if (lo != 0.0) break;
    }
    if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
        const double y = lo * 2.0;
        const double x = hi + y;
        if (y == x - hi) hi = x;
    }
    return hi;
}

namespace detail {

/// Sign of the exact value of sum(values).
inline int exact_sign(std::span<const double> values) {
    const double s = exact_sum(values);
    return (s > 0.0) - (s < 0.0);
}

} // namespace detail

/// Correctly rounded arithmetic mean: sum(values) / n evaluated exactly and
/// rounded once to nearest, ties to even. Equal inputs give that value back.
inline double exact_mean(std::span<const double> values) {
    if (values.empty()) throw ConfigError("mean of no values");
    const double n = static_cast<double>(values.size());
    double q = exact_sum(values) / n;
    std::vector<double> terms(values.begin(), values.end());
    const std::size_t base = terms.size();
    // Sign of sum - n * (q + offset), with n * q split exactly by fma.
    auto compare = [&](double q, double offset) {
        terms.resize(base);
        const double p = n * q;
        terms.push_back(-p);
        terms.push_back(-std::fma(n, q, -p));
        terms.push_back(-n * offset);
        return detail::exact_sign(terms);
    };
    for (;;) {
        const double up = std::nextafter(q, std::numeric_limits<double>::infinity());
        const double down = std::nextafter(q, -std::numeric_limits<double>::infinity());
        const int above = compare(q, (up - q) / 2);
        if (above > 0) {
            q = up;
            continue;
        }
        if (above == 0) {
            const bool q_even = (std::bit_cast<std::uint64_t>(q) & 1u) == 0;
            return q_even ? q : up;
        }
        const int below = compare(q, (down - q) / 2);
        if (below < 0) {
            q = down;
            continue;
        }
        if (below == 0) {
            const bool q_even = (std::bit_cast<std::uint64_t>(q) & 1u) == 0;
            return q_even ? q : down;
        }
        return q;
    }
}

struct EnsembleModel {
    std::vector<MlpModel> columns;
    std::uint64_t fold_seed = 0;

    std::size_t n_columns() const noexcept { return columns.size(); }

    int feature_schema_version() const {
        if (columns.empty()) throw ConfigError("ensemble has no columns");
        return columns.front().feature_schema_version;
    }

    void validate() const {
        if (columns.empty()) throw ConfigError("ensemble needs at least one column");
        for (const auto& c : columns) {
            if (c.config.input_dim != columns.front().config.input_dim ||
                c.feature_schema_version != columns.front().feature_schema_version)
                throw CompatibilityError("ensemble columns disagree on input layout");
        }
    }

    /// Averaged class posteriors, classes x samples:
    /// P(c | x) = (1/N) * sum_n p_n(c | x), correctly rounded.
    Eigen::MatrixXd posteriors(const Eigen::MatrixXd& inputs) const {
        validate();
        std::vector<Eigen::MatrixXd> per_column;
        per_column.reserve(columns.size());
        for (const auto& c : columns) per_column.push_back(c.posteriors(inputs));
        Eigen::MatrixXd avg(per_column.front().rows(), per_column.front().cols());
        std::vector<double> terms(columns.size());
        for (Eigen::Index s = 0; s < avg.cols(); ++s)
            for (Eigen::Index k = 0; k < avg.rows(); ++k) {
                for (std::size_t i = 0; i < columns.size(); ++i) terms[i] = per_column[i](k, s);
                avg(k, s) = exact_mean(terms);
            }
        return avg;
    }

    bool operator==(const EnsembleModel&) const = default;
};

inline Prediction predict_ensemble(const EnsembleModel& model, std::span<const double> x) {
    model.validate();
    if (x.size() != model.columns.front().config.input_dim)
        throw CompatibilityError("input has " + std::to_string(x.size()) + " features, model expects " +
                                 std::to_string(model.columns.front().config.input_dim));
    const Eigen::Map<const Eigen::MatrixXd> col(x.data(), static_cast<Eigen::Index>(x.size()), 1);
    return make_prediction(model.posteriors(col)(1, 0));
}

inline Prediction predict_ensemble(const EnsembleModel& model, const FeatureVector& x) {
    check_schema(model.feature_schema_version(), x.schema_version);
    return predict_ensemble(model, x.span());
}

struct ColumnSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

/// Share of the data held out for early stopping when there is one column.
inline constexpr double kSingleColumnValidationFraction = 0.1;

/// Shuffle [0, n) with `seed` and cut it into `n_columns` folds of sizes
/// differing by at most one; column i validates on fold i and trains on the
/// rest. With one column, a 90/10 split is used instead. Index lists are
/// returned sorted.
inline std::vector<ColumnSplit> column_splits(std::size_t n_samples, std::size_t n_columns,
                                              std::uint64_t seed) {
    if (n_columns == 0) throw ConfigError("n_columns must be positive");
    if (n_samples < 2 * n_columns)
        throw ConfigError("dataset of " + std::to_string(n_samples) + " samples is too small for " +
                          std::to_string(n_columns) + " columns (need at least " +
                          std::to_string(2 * n_columns) + ")");
    std::vector<std::size_t> order(n_samples);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, {0xF01D}));
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<std::pair<std::size_t, std::size_t>> folds; // [begin, end) into order
    if (n_columns == 1) {
        auto held = static_cast<std::size_t>(
            std::llround(kSingleColumnValidationFraction * static_cast<double>(n_samples)));
        held = std::clamp<std::size_t>(held, 1, n_samples - 1);
        folds.emplace_back(n_samples - held, n_samples);
    } else {
        std::size_t begin = 0;
        for (std::size_t i = 0; i < n_columns; ++i) {
            const std::size_t size = n_samples / n_columns + (i < n_samples % n_columns ? 1 : 0);
            folds.emplace_back(begin, begin + size);
            begin += size;
        }
    }

    std::vector<ColumnSplit> splits;
    for (auto [b, e] : folds) {
        ColumnSplit s;
        for (std::size_t k = 0; k < n_samples; ++k)
            (k >= b && k < e ? s.validation : s.train).push_back(order[k]);
        std::sort(s.train.begin(), s.train.end());
        std::sort(s.validation.begin(), s.validation.end());
        splits.push_back(std::move(s));
    }
    return splits;
}

struct EnsembleTrainResult {
    EnsembleModel model;
    std::vector<TrainingLog> logs;
    std::vector<ColumnSplit> splits;
};

/// Train `n_columns` networks on rotating folds. Column i uses init seed
/// derive_seed(seed, {i}) and early-stops on its own validation fold.
/// Columns train independently; `workers` only changes wall time.
inline EnsembleTrainResult train_multicolumn(const ExampleSet& train_set, const NetworkConfig& config,
                                             std::size_t n_columns, std::uint64_t seed,
                                             const TrainOptions& options = {},
                                             std::size_t workers = 0) {
    EnsembleTrainResult out;
    out.splits = column_splits(train_set.size(), n_columns, seed);
    out.model.fold_seed = seed;
    out.model.columns.resize(n_columns);
    out.logs.resize(n_columns);
    parallel_for(
        n_columns,
        [&](std::size_t i) {
            NetworkConfig column_config = config;
            column_config.seed = derive_seed(seed, {i});
            TrainResult r = train(train_set.subset(out.splits[i].train),
                                  train_set.subset(out.splits[i].validation), column_config, options);
            out.model.columns[i] = std::move(r.model);
            out.logs[i] = std::move(r.log);
        },
        workers);
    return out;
}

// Ensemble container:
//   namelink-ensemble 1
//   n_columns <N>
//   fold_seed <u64>
//   column <i>
//   <model payload>      (N times)
//   end-ensemble

inline constexpr int kEnsembleFormatVersion = 1;

inline void write_ensemble(std::ostream& out, const EnsembleModel& model) {
    out << "namelink-ensemble " << kEnsembleFormatVersion << '\n'
        << "n_columns " << model.n_columns() << '\n'
        << "fold_seed " << model.fold_seed << '\n';
    for (std::size_t i = 0; i < model.columns.size(); ++i) {
        out << "column " << i << '\n';
        write_model(out, model.columns[i]);
    }
    out << "end-ensemble\n";
}

inline EnsembleModel read_ensemble(std::istream& in, const std::string& source = "<ensemble>") {
    detail::TokenReader rd(in, source);
    detail::read_format_header(rd, "namelink-ensemble", kEnsembleFormatVersion);
    EnsembleModel m;
    const auto n = rd.keyed_integer<std::size_t>("n_columns");
    if (n == 0) throw ParseError(source + ": n_columns must be positive");
    m.fold_seed = rd.keyed_integer<std::uint64_t>("fold_seed");
    for (std::size_t i = 0; i < n; ++i) {
        if (rd.keyed_integer<std::size_t>("column") != i)
            throw ParseError(source + ": columns out of order");
        detail::read_format_header(rd, "namelink-mlp", kModelFormatVersion);
        m.columns.push_back(detail::read_model_body(rd));
    }
    rd.expect("end-ensemble");
    try {
        m.validate();
    } catch (const Error& e) {
        throw ParseError(source + ": " + e.what());
    }
    return m;
}

inline void save_ensemble(const std::string& path, const EnsembleModel& model) {
    auto out = detail::open_output(path);
    write_ensemble(out, model);
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline EnsembleModel load_ensemble(const std::string& path) {
    auto in = detail::open_input(path);
    return read_ensemble(in, path);
}

} // namespace namelink
