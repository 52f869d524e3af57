#pragma once

// Evaluation protocol: stratified hold-out and k-fold splits, network-size
// grid search by cross-validated accuracy, and confusion-matrix reports.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "namelink/ensemble.hpp"
#include "namelink/error.hpp"
#include "namelink/io.hpp"
#include "namelink/model.hpp"
#include "namelink/parallel.hpp"
#include "namelink/random.hpp"
#include "namelink/records.hpp"

namespace namelink {

struct SplitSpec {
    double test_fraction = 0.2;
    std::size_t k_folds = 5;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(test_fraction > 0.0 && test_fraction < 1.0))
            throw ConfigError("test_fraction must be in (0,1)");
        if (k_folds < 2) throw ConfigError("k_folds must be at least 2");
    }
};

struct HoldoutSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

struct FoldSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

namespace detail {

/// Indices of each label value, ascending; labels must be 0 or 1.
inline std::array<std::vector<std::size_t>, 2> indices_by_class(std::span<const int> labels) {
    std::array<std::vector<std::size_t>, 2> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw ConfigError("label " + std::to_string(labels[i]) + " is not 0 or 1");
        out[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    return out;
}

} // namespace detail

/// Per-class shuffle, then round(test_fraction * class size) samples of each
/// class go to the test side (at least one, and at least one left over).
/// Both sides are returned in ascending index order.
inline HoldoutSplit stratified_holdout(std::span<const int> labels, const SplitSpec& spec) {
    spec.validate();
    auto by_class = detail::indices_by_class(labels);
    HoldoutSplit out;
    for (std::size_t c = 0; c < 2; ++c) {
        auto& idx = by_class[c];
        if (idx.size() < 2)
            throw ConfigError("class " + std::to_string(c) + " has " + std::to_string(idx.size()) +
                              " samples; stratified hold-out needs at least 2");
        Rng rng(derive_seed(spec.seed, {0x401D, c}));
        std::shuffle(idx.begin(), idx.end(), rng);
        auto n_test = static_cast<std::size_t>(
            std::llround(spec.test_fraction * static_cast<double>(idx.size())));
        n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
        out.test.insert(out.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
        out.train.insert(out.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

/// Stratified k-fold: each class is shuffled and dealt round-robin over the
/// folds, continuing where the previous class stopped so fold sizes differ
/// by at most one. Every sample validates exactly once.
inline std::vector<FoldSplit> kfold_splits(std::span<const int> labels, std::size_t k,
                                           std::uint64_t seed) {
    if (k < 2) throw ConfigError("k must be at least 2");
    auto by_class = detail::indices_by_class(labels);
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t cursor = 0;
    for (std::size_t c = 0; c < 2; ++c) {
        auto& idx = by_class[c];
        if (idx.size() < k)
            throw ConfigError("class " + std::to_string(c) + " has " + std::to_string(idx.size()) +
                              " samples; " + std::to_string(k) + "-fold split needs at least " +
                              std::to_string(k));
        Rng rng(derive_seed(seed, {0xF01D5, c}));
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t i : idx) folds[cursor++ % k].push_back(i);
    }
    std::vector<FoldSplit> out(k);
    for (std::size_t f = 0; f < k; ++f) {
        out[f].validation = folds[f];
        for (std::size_t g = 0; g < k; ++g)
            if (g != f) out[f].train.insert(out[f].train.end(), folds[g].begin(), folds[g].end());
        std::sort(out[f].train.begin(), out[f].train.end());
        std::sort(out[f].validation.begin(), out[f].validation.end());
    }
    return out;
}

/// Pairs at `indices`, sharing the full record map.
inline PairDataset subset_pairs(const PairDataset& ds, std::span<const std::size_t> indices) {
    PairDataset out;
    out.records = ds.records;
    out.provenance = ds.provenance;
    out.pairs.reserve(indices.size());
    for (std::size_t i : indices) out.pairs.push_back(ds.pairs.at(i));
    return out;
}

/// Labels of a fully labeled pair dataset.
inline std::vector<int> pair_labels(const PairDataset& ds) {
    std::vector<int> out;
    out.reserve(ds.pairs.size());
    for (const auto& p : ds.pairs) {
        if (!p.label) throw IntegrityError("pair (" + p.left_id + "," + p.right_id + ") is unlabeled");
        out.push_back(*p.label);
    }
    return out;
}

struct GridSpec {
    std::vector<std::size_t> depths{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<std::size_t> widths{10, 25, 50, 75, 100};
    NetworkConfig base;
    TrainOptions train;

    void validate() const {
        if (depths.empty() || widths.empty()) throw ConfigError("grid needs at least one depth and width");
        for (auto d : depths)
            if (d == 0) throw ConfigError("grid depths must be positive");
        for (auto w : widths)
            if (w == 0) throw ConfigError("grid widths must be positive");
    }
};

struct GridRow {
    std::size_t depth = 0;
    std::size_t width = 0;
    double mean_validation_accuracy = 0.0;
    std::vector<double> fold_accuracies;
};

/// Cross-validated accuracy of every (depth, width) cell, one network per
/// fold, best first. Ties are ordered by (depth, width) ascending. Fold f of
/// every cell uses init seed derive_seed(spec.seed, {f}).
inline std::vector<GridRow> grid_search(const ExampleSet& data, const GridSpec& grid,
                                        const SplitSpec& split, std::size_t workers = 0) {
    grid.validate();
    if (split.k_folds < 2) throw ConfigError("k_folds must be at least 2");
    const auto folds = kfold_splits(data.labels, split.k_folds, split.seed);

    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (auto d : grid.depths)
        for (auto w : grid.widths)
            if (std::find(cells.begin(), cells.end(), std::pair{d, w}) == cells.end())
                cells.emplace_back(d, w);

    const std::size_t k = folds.size();
    std::vector<double> acc(cells.size() * k);
    parallel_for(
        acc.size(),
        [&](std::size_t job) {
            const auto [depth, width] = cells[job / k];
            const std::size_t f = job % k;
            NetworkConfig config = grid.base;
            config.input_dim = data.dim();
            config.hidden_layers = depth;
            config.hidden_width = width;
            config.seed = derive_seed(split.seed, {f});
            const ExampleSet validation = data.subset(folds[f].validation);
            const TrainResult r = train(data.subset(folds[f].train), validation, config, grid.train);
            acc[job] = accuracy(r.model.posteriors(validation.inputs), validation.labels);
        },
        workers);

    std::vector<GridRow> rows;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        GridRow row{cells[c].first, cells[c].second, 0.0, {}};
        row.fold_accuracies.assign(acc.begin() + static_cast<std::ptrdiff_t>(c * k),
                                   acc.begin() + static_cast<std::ptrdiff_t>((c + 1) * k));
        row.mean_validation_accuracy =
            std::accumulate(row.fold_accuracies.begin(), row.fold_accuracies.end(), 0.0) /
            static_cast<double>(k);
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const GridRow& a, const GridRow& b) {
        if (a.mean_validation_accuracy != b.mean_validation_accuracy)
            return a.mean_validation_accuracy > b.mean_validation_accuracy;
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.width < b.width;
    });
    return rows;
}

inline void write_grid_csv(std::ostream& out, std::span<const GridRow> rows) {
    out << "depth,width,mean_val_accuracy\n";
    for (const auto& r : rows)
        out << r.depth << ',' << r.width << ',' << format_double(r.mean_validation_accuracy) << '\n';
}

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    bool operator==(const ConfusionCounts&) const = default;
};

struct EvalReport {
    ConfusionCounts confusion;
    double accuracy = 0.0;
    double error = 0.0;
    // Index 0 describes label 0, index 1 label 1. An undefined ratio (empty
    // denominator) is reported as 0.
    std::array<double, 2> precision{};
    std::array<double, 2> recall{};
};

/// Report from decided labels against ground truth.
inline EvalReport evaluate_predictions(std::span<const int> predicted, std::span<const int> actual) {
    if (predicted.size() != actual.size()) throw ConfigError("prediction/label count mismatch");
    if (actual.empty()) throw ConfigError("cannot evaluate on an empty test set");
    EvalReport r;
    auto& c = r.confusion;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const bool p = predicted[i] == 1;
        const bool a = actual[i] == 1;
        if (p && a) ++c.tp;
        else if (p) ++c.fp;
        else if (a) ++c.fn;
        else ++c.tn;
    }
    const auto ratio = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    r.accuracy = ratio(c.tp + c.tn, c.total());
    r.error = ratio(c.fp + c.fn, c.total());
    r.precision = {ratio(c.tn, c.tn + c.fn), ratio(c.tp, c.tp + c.fp)};
    r.recall = {ratio(c.tn, c.tn + c.fp), ratio(c.tp, c.tp + c.fn)};
    return r;
}

inline std::vector<int> decide_all(const Eigen::MatrixXd& posteriors) {
    std::vector<int> out(static_cast<std::size_t>(posteriors.cols()));
    for (Eigen::Index c = 0; c < posteriors.cols(); ++c)
        out[static_cast<std::size_t>(c)] = decide(posteriors(1, c));
    return out;
}

template <class Model>
    requires requires(const Model& m, const Eigen::MatrixXd& x) {
        { m.posteriors(x) } -> std::convertible_to<Eigen::MatrixXd>;
    }
EvalReport evaluate(const Model& model, const ExampleSet& test_set) {
    if (test_set.empty()) throw ConfigError("cannot evaluate on an empty test set");
    return evaluate_predictions(decide_all(model.posteriors(test_set.inputs)), test_set.labels);
}

/// `metric,value` rows followed by a confusion-matrix block.
inline void write_eval_csv(std::ostream& out, const EvalReport& r) {
    const auto& c = r.confusion;
    out << "metric,value\n"
        << "accuracy," << format_double(r.accuracy) << '\n'
        << "error," << format_double(r.error) << '\n'
        << "precision_0," << format_double(r.precision[0]) << '\n'
        << "recall_0," << format_double(r.recall[0]) << '\n'
        << "precision_1," << format_double(r.precision[1]) << '\n'
        << "recall_1," << format_double(r.recall[1]) << '\n'
        << "total," << c.total() << '\n'
        << '\n'
        << "confusion,predicted_0,predicted_1\n"
        << "actual_0," << c.tn << ',' << c.fp << '\n'
        << "actual_1," << c.fn << ',' << c.tp << '\n';
}

inline void write_eval_summary(std::ostream& out, const EvalReport& r) {
    const auto& c = r.confusion;
    auto pct = [](double v) { return std::round(v * 10000.0) / 100.0; };
    out << "evaluated pairs: " << c.total() << '\n'
        << "accuracy: " << pct(r.accuracy) << "%\n"
        << "error: " << pct(r.error) << "%\n"
        << "confusion: tp=" << c.tp << " fp=" << c.fp << " tn=" << c.tn << " fn=" << c.fn << '\n'
        << "label 1: precision=" << pct(r.precision[1]) << "% recall=" << pct(r.recall[1]) << "%\n"
        << "label 0: precision=" << pct(r.precision[0]) << "% recall=" << pct(r.recall[0]) << "%\n";
}

} // namespace namelink
