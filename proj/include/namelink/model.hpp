#pragma once

// Trained single networks: full-batch iRprop- training with early stopping
// on validation accuracy, the >= 0.5 decision rule, and persistence.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "namelink/error.hpp"
#include "namelink/features.hpp"
#include "namelink/io.hpp"
#include "namelink/mlp.hpp"
#include "namelink/rprop.hpp"

namespace namelink {

/// Labeled samples as a dim x n matrix plus one label per column.
struct ExampleSet {
    Eigen::MatrixXd inputs;
    std::vector<int> labels;
    int schema_version = kFeatureSchemaVersion;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(inputs.rows()); }
    bool empty() const noexcept { return labels.empty(); }

    static ExampleSet from_rows(const std::vector<std::vector<double>>& rows,
                                std::vector<int> labels) {
        if (rows.size() != labels.size()) throw ConfigError("row/label count mismatch");
        ExampleSet s;
        const std::size_t dim = rows.empty() ? 0 : rows.front().size();
        s.inputs.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(rows.size()));
        for (std::size_t c = 0; c < rows.size(); ++c) {
            if (rows[c].size() != dim) throw ConfigError("ragged rows");
            for (std::size_t r = 0; r < dim; ++r)
                s.inputs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[c][r];
        }
        s.labels = std::move(labels);
        return s;
    }

    static ExampleSet from_features(const LabeledFeatures& data) {
        if (data.vectors.size() != data.labels.size()) throw ConfigError("feature/label count mismatch");
        ExampleSet s;
        s.schema_version = data.schema.version;
        s.inputs.resize(static_cast<Eigen::Index>(kFeatureCount),
                        static_cast<Eigen::Index>(data.vectors.size()));
        for (std::size_t c = 0; c < data.vectors.size(); ++c)
            for (std::size_t r = 0; r < kFeatureCount; ++r)
                s.inputs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    data.vectors[c].values[r];
        s.labels = data.labels;
        return s;
    }

    /// Columns at `indices`, in that order.
    ExampleSet subset(std::span<const std::size_t> indices) const {
        ExampleSet s;
        s.schema_version = schema_version;
        s.inputs.resize(inputs.rows(), static_cast<Eigen::Index>(indices.size()));
        s.labels.reserve(indices.size());
        for (std::size_t k = 0; k < indices.size(); ++k) {
            s.inputs.col(static_cast<Eigen::Index>(k)) = inputs.col(static_cast<Eigen::Index>(indices[k]));
            s.labels.push_back(labels.at(indices[k]));
        }
        return s;
    }
};

struct Prediction {
    double posterior = 0.0; // p(y = 1 | x)
    int label = 0;
};

/// Same author iff p >= 0.5; a tie goes to label 1.
inline constexpr int decide(double posterior) noexcept { return posterior >= 0.5 ? 1 : 0; }

inline Prediction make_prediction(double posterior) noexcept { return {posterior, decide(posterior)}; }

/// Fraction of columns whose decided label matches.
inline double accuracy(const Eigen::MatrixXd& posteriors, std::span<const int> labels) {
    if (labels.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t c = 0; c < labels.size(); ++c)
        if (decide(posteriors(1, static_cast<Eigen::Index>(c))) == labels[c]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

struct MlpModel {
    NetworkConfig config;
    Parameters layers;
    int feature_schema_version = kFeatureSchemaVersion;

    Eigen::MatrixXd posteriors(const Eigen::MatrixXd& inputs) const {
        return namelink::posteriors(layers, config.activation, inputs);
    }

    bool operator==(const MlpModel&) const = default;
};

inline Prediction predict(const MlpModel& model, std::span<const double> x) {
    if (x.size() != model.config.input_dim)
        throw CompatibilityError("input has " + std::to_string(x.size()) +
                                 " features, model expects " + std::to_string(model.config.input_dim));
    const Eigen::Map<const Eigen::MatrixXd> col(x.data(), static_cast<Eigen::Index>(x.size()), 1);
    return make_prediction(model.posteriors(col)(1, 0));
}

inline void check_schema(int model_version, int data_version) {
    if (model_version != data_version)
        throw CompatibilityError("model feature schema version " + std::to_string(model_version) +
                                 " does not match data feature schema version " +
                                 std::to_string(data_version));
}

inline Prediction predict(const MlpModel& model, const FeatureVector& x) {
    check_schema(model.feature_schema_version, x.schema_version);
    return predict(model, x.span());
}

struct TrainOptions {
    std::size_t max_epochs = 1000;
    std::size_t patience = 25;
    RpropHyperparams rprop;
};

struct EpochLog {
    std::size_t epoch = 0;
    double loss = 0.0;
    double train_accuracy = 0.0;
    double validation_accuracy = 0.0;
    double validation_loss = 0.0;
};

struct TrainingLog {
    std::vector<EpochLog> epochs;
    std::size_t best_epoch = 0;
    double best_validation_accuracy = 0.0;
};

struct TrainResult {
    MlpModel model;
    TrainingLog log;
};

namespace detail {
inline double mean_log_loss(const Eigen::MatrixXd& post, std::span<const int> labels) {
    double loss = 0.0;
    for (std::size_t c = 0; c < labels.size(); ++c) {
        const double p = post(labels[c], static_cast<Eigen::Index>(c));
        loss -= std::log(std::max(p, std::numeric_limits<double>::min()));
    }
    return loss / static_cast<double>(labels.size());
}
} // namespace detail

/// Full-batch iRprop- training. After every update the log records the
/// training loss and both accuracies of the updated parameters; the
/// parameters with the highest validation accuracy (earliest on ties) are
/// returned. Training stops after `patience` epochs in which neither
/// validation accuracy nor validation loss improved, or at `max_epochs`.
inline TrainResult train(const ExampleSet& train_set, const ExampleSet& validation_set,
                         const NetworkConfig& config, const TrainOptions& options = {}) {
    config.validate();
    if (train_set.empty()) throw ConfigError("training set is empty");
    if (validation_set.empty()) throw ConfigError("validation set is empty");
    if (train_set.dim() != config.input_dim || validation_set.dim() != config.input_dim)
        throw ConfigError("feature dimension " + std::to_string(train_set.dim()) +
                          " does not match network input_dim " + std::to_string(config.input_dim));
    if (train_set.schema_version != validation_set.schema_version)
        throw CompatibilityError("training and validation sets use different feature schemas");
    if (options.max_epochs == 0) throw ConfigError("max_epochs must be positive");

    Parameters params = init_network(config);
    RpropState state(params, options.rprop);

    TrainResult result;
    result.model.config = config;
    result.model.feature_schema_version = train_set.schema_version;
    result.model.layers = params;
    double best = -1.0;
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;

    for (std::size_t epoch = 1; epoch <= options.max_epochs; ++epoch) {
        const LossAndGradients lg =
            loss_and_gradients(params, config.activation, train_set.inputs, train_set.labels);
        state.step(params, lg.gradients);
        if (!all_finite(params)) throw NumericFault("non-finite parameter after update");

        EpochLog entry;
        entry.epoch = epoch;
        const Eigen::MatrixXd train_post = posteriors(params, config.activation, train_set.inputs);
        const Eigen::MatrixXd val_post = posteriors(params, config.activation, validation_set.inputs);
        entry.loss = detail::mean_log_loss(train_post, train_set.labels);
        entry.train_accuracy = accuracy(train_post, train_set.labels);
        entry.validation_loss = detail::mean_log_loss(val_post, validation_set.labels);
        entry.validation_accuracy = accuracy(val_post, validation_set.labels);
        result.log.epochs.push_back(entry);

        // Parameters are selected on validation accuracy; the patience
        // counter also resets while validation loss is still falling, so
        // a long majority-class plateau does not end training.
        ++since_best;
        if (entry.validation_accuracy > best) {
            best = entry.validation_accuracy;
            result.model.layers = params;
            result.log.best_epoch = epoch;
            result.log.best_validation_accuracy = best;
            since_best = 0;
        }
        if (entry.validation_loss < best_loss) {
            best_loss = entry.validation_loss;
            since_best = 0;
        }
        if (since_best >= options.patience) break;
    }
    return result;
}

// Model text format, one token group per line:
//   namelink-mlp 1
//   feature_schema <int>
//   input_dim <n> / hidden_layers <n> / hidden_width <n> / output_classes <n>
//   activation <name> / seed <u64>
//   layer <index> <fan_out> <fan_in>
//   w <fan_in numbers>      (fan_out lines)
//   b <fan_out numbers>
//   end

inline constexpr int kModelFormatVersion = 1;

inline void write_model(std::ostream& out, const MlpModel& model) {
    const auto& c = model.config;
    out << "namelink-mlp " << kModelFormatVersion << '\n'
        << "feature_schema " << model.feature_schema_version << '\n'
        << "input_dim " << c.input_dim << '\n'
        << "hidden_layers " << c.hidden_layers << '\n'
        << "hidden_width " << c.hidden_width << '\n'
        << "output_classes " << c.output_classes << '\n'
        << "activation " << activation_name(c.activation) << '\n'
        << "seed " << c.seed << '\n';
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        out << "layer " << l << ' ' << layer.weights.rows() << ' ' << layer.weights.cols() << '\n';
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            out << 'w';
            for (Eigen::Index k = 0; k < layer.weights.cols(); ++k)
                out << ' ' << format_double(layer.weights(r, k));
            out << '\n';
        }
        out << 'b';
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out << ' ' << format_double(layer.bias(r));
        out << '\n';
    }
    out << "end\n";
}

namespace detail {

/// Whitespace token reader with uniform error reporting.
class TokenReader {
public:
    TokenReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    std::string next() {
        std::string tok;
        if (!(in_ >> tok)) throw ParseError(source_ + ": unexpected end of input");
        return tok;
    }

    void expect(std::string_view word) {
        const std::string tok = next();
        if (tok != word)
            throw ParseError(source_ + ": expected '" + std::string(word) + "', found '" + tok + "'");
    }

    template <class Int>
    Int integer() {
        return parse_integer<Int>(next(), source_ + ": ");
    }

    double number() { return parse_double(next(), source_ + ": "); }

    template <class Int>
    Int keyed_integer(std::string_view key) {
        expect(key);
        return integer<Int>();
    }

    const std::string& source() const noexcept { return source_; }

private:
    std::istream& in_;
    std::string source_;
};

inline MlpModel read_model_body(TokenReader& rd) {
    MlpModel m;
    m.feature_schema_version = rd.keyed_integer<int>("feature_schema");
    m.config.input_dim = rd.keyed_integer<std::size_t>("input_dim");
    m.config.hidden_layers = rd.keyed_integer<std::size_t>("hidden_layers");
    m.config.hidden_width = rd.keyed_integer<std::size_t>("hidden_width");
    m.config.output_classes = rd.keyed_integer<std::size_t>("output_classes");
    rd.expect("activation");
    try {
        m.config.activation = parse_activation(rd.next());
    } catch (const ConfigError& e) {
        throw ParseError(rd.source() + ": " + e.what());
    }
    m.config.seed = rd.keyed_integer<std::uint64_t>("seed");
    try {
        m.config.validate();
    } catch (const ConfigError& e) {
        throw ParseError(rd.source() + ": " + e.what());
    }

    std::size_t fan_in = m.config.input_dim;
    for (std::size_t l = 0; l <= m.config.hidden_layers; ++l) {
        const std::size_t expected_out =
            l == m.config.hidden_layers ? m.config.output_classes : m.config.hidden_width;
        rd.expect("layer");
        const auto index = rd.integer<std::size_t>();
        const auto rows = rd.integer<std::size_t>();
        const auto cols = rd.integer<std::size_t>();
        if (index != l || rows != expected_out || cols != fan_in)
            throw ParseError(rd.source() + ": layer " + std::to_string(l) + " has unexpected shape");
        LayerParams layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
        for (std::size_t r = 0; r < rows; ++r) {
            rd.expect("w");
            for (std::size_t k = 0; k < cols; ++k)
                layer.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = rd.number();
        }
        rd.expect("b");
        for (std::size_t r = 0; r < rows; ++r) layer.bias(static_cast<Eigen::Index>(r)) = rd.number();
        m.layers.push_back(std::move(layer));
        fan_in = rows;
    }
    rd.expect("end");
    if (!all_finite(m.layers)) throw ParseError(rd.source() + ": non-finite parameter");
    return m;
}

inline void read_format_header(TokenReader& rd, std::string_view magic, int supported) {
    rd.expect(magic);
    const int version = rd.integer<int>();
    if (version != supported)
        throw CompatibilityError(rd.source() + ": " + std::string(magic) + " format version " +
                                 std::to_string(version) + " is not supported (expected " +
                                 std::to_string(supported) + ")");
}

} // namespace detail

inline MlpModel read_model(std::istream& in, const std::string& source = "<model>") {
    detail::TokenReader rd(in, source);
    detail::read_format_header(rd, "namelink-mlp", kModelFormatVersion);
    return detail::read_model_body(rd);
}

inline void save_model(const std::string& path, const MlpModel& model) {
    auto out = detail::open_output(path);
    write_model(out, model);
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline MlpModel load_model(const std::string& path) {
    auto in = detail::open_input(path);
    return read_model(in, path);
}

} // namespace namelink
