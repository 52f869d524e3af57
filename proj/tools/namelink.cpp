// namelink command-line tool: featurize, train, grid-search, evaluate,
// predict, gen-synthetic and split.
//
// Exit codes: 0 success, 2 input or validation error, 3 compatibility
// error, 1 internal fault.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "namelink/namelink.hpp"

namespace nl = namelink;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitCompatibility = 3;

// JSON config: an object whose keys are long option names (with '-' or
// '_'). A nested object named after a subcommand overrides top-level keys
// for that subcommand. Keys naming options of other subcommands are
// skipped; keys unknown to every subcommand are an error.
class JsonConfig {
public:
    JsonConfig(std::string command, std::set<std::string> own, std::set<std::string> any,
               std::set<std::string> commands)
        : command_(std::move(command)), own_(std::move(own)), any_(std::move(any)),
          commands_(std::move(commands)) {}

    /// Option name -> raw values, for the options this command owns.
    std::map<std::string, std::vector<std::string>> read(const std::string& path) const {
        std::ifstream in(path);
        if (!in) throw nl::IoError("cannot open config file '" + path + "'");
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw nl::ParseError("config '" + path + "': " + e.what());
        }
        if (!doc.is_object()) throw nl::ConfigError("config: top level must be a JSON object");

        std::map<std::string, nlohmann::json> merged;
        auto take = [&](const nlohmann::json& obj, bool nested) {
            for (const auto& [raw_key, value] : obj.items()) {
                std::string key = raw_key;
                std::replace(key.begin(), key.end(), '_', '-');
                if (!nested && value.is_object()) {
                    if (!commands_.contains(key))
                        throw nl::ConfigError("config: unknown section '" + raw_key + "'");
                    continue;
                }
                if (key == "config") throw nl::ConfigError("config: nested config files are not supported");
                if (!any_.contains(key)) throw nl::ConfigError("config: unknown option '" + raw_key + "'");
                if (own_.contains(key)) merged[key] = value;
            }
        };
        take(doc, false);
        for (const auto& [raw_key, value] : doc.items()) {
            std::string key = raw_key;
            std::replace(key.begin(), key.end(), '_', '-');
            if (key == command_ && value.is_object()) take(value, true);
        }

        std::map<std::string, std::vector<std::string>> items;
        for (const auto& [key, value] : merged) {
            auto scalar = [&](const nlohmann::json& v) -> std::string {
                if (v.is_string()) return v.get<std::string>();
                if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
                if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
                if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
                if (v.is_number_float()) return nl::format_double(v.get<double>());
                throw nl::ConfigError("config: option '" + key + "' has an unsupported value");
            };
            auto& inputs = items[key];
            if (value.is_array())
                for (const auto& v : value) inputs.push_back(scalar(v));
            else
                inputs.push_back(scalar(value));
        }
        return items;
    }

private:
    std::string command_;
    std::set<std::string> own_;
    std::set<std::string> any_;
    std::set<std::string> commands_;
};

struct Options {
    std::uint64_t seed = 0;
    std::string records, pairs, model, out, features, log;
    std::size_t workers = 0;

    // network and training
    std::size_t hidden_layers = 7;
    std::size_t hidden_width = 50;
    std::size_t columns = 5;
    std::string activation = "softsign";
    std::size_t max_epochs = nl::TrainOptions{}.max_epochs;
    std::size_t patience = nl::TrainOptions{}.patience;

    // protocol
    std::vector<std::size_t> depths = nl::GridSpec{}.depths;
    std::vector<std::size_t> widths = nl::GridSpec{}.widths;
    std::size_t folds = nl::SplitSpec{}.k_folds;
    double test_fraction = nl::SplitSpec{}.test_fraction;
    std::string train_out, test_out;

    // synthetic
    nl::SyntheticSpec synthetic;
    std::vector<std::string> variant_ops{"permutation", "middle", "initials", "diacritics", "typo"};
};

nl::NetworkConfig network_config(const Options& o) {
    nl::NetworkConfig c;
    c.hidden_layers = o.hidden_layers;
    c.hidden_width = o.hidden_width;
    c.activation = nl::parse_activation(o.activation);
    c.validate();
    return c;
}

nl::TrainOptions train_options(const Options& o) {
    nl::TrainOptions t;
    t.max_epochs = o.max_epochs;
    t.patience = o.patience;
    return t;
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw nl::ConfigError(std::string(flag) + " is required");
}

/// Labeled examples from --features, or from --records and --pairs.
nl::ExampleSet load_examples(const Options& o) {
    if (!o.features.empty()) return nl::ExampleSet::from_features(nl::load_feature_csv(o.features).labeled());
    require(o.records, "--records (or --features)");
    require(o.pairs, "--pairs");
    const auto ds = nl::load_dataset(o.records, o.pairs);
    return nl::ExampleSet::from_features(nl::featurize_dataset(ds));
}

std::ofstream open_out(const std::string& path) { return nl::detail::open_output(path); }

void finish(std::ofstream& out, const std::string& path) {
    out.close();
    if (!out) throw nl::IoError("failed writing '" + path + "'");
}

int cmd_featurize(const Options& o) {
    require(o.records, "--records");
    require(o.pairs, "--pairs");
    require(o.out, "--out");
    auto ds = nl::load_dataset(o.records, o.pairs);
    const auto vectors = nl::featurize_pairs(ds);
    std::vector<std::optional<int>> labels;
    for (const auto& p : ds.pairs) labels.push_back(p.label);
    auto out = open_out(o.out);
    nl::write_feature_csv(out, nl::FeatureSchema::basic(), vectors, labels);
    finish(out, o.out);
    const auto counts = ds.class_counts();
    std::cout << "featurized " << vectors.size() << " pairs (label 1: " << counts.positive
              << ", label 0: " << counts.negative << ", unlabeled: " << counts.unlabeled << ") -> "
              << o.out << '\n';
    return kExitOk;
}

int cmd_train(const Options& o) {
    require(o.model, "--model");
    const auto config = network_config(o);
    const auto data = load_examples(o);
    const auto result = nl::train_multicolumn(data, config, o.columns, o.seed, train_options(o), o.workers);

    auto out = open_out(o.model);
    nl::write_ensemble(out, result.model);
    finish(out, o.model);

    const std::string log_path = o.log.empty() ? o.model + ".log.csv" : o.log;
    auto log = open_out(log_path);
    log << "column,epoch,loss,train_accuracy,validation_accuracy,validation_loss\n";
    for (std::size_t c = 0; c < result.logs.size(); ++c)
        for (const auto& e : result.logs[c].epochs)
            log << c << ',' << e.epoch << ',' << nl::format_double(e.loss) << ','
                << nl::format_double(e.train_accuracy) << ',' << nl::format_double(e.validation_accuracy)
                << ',' << nl::format_double(e.validation_loss) << '\n';
    finish(log, log_path);

    std::cout << "trained " << result.model.n_columns() << " column(s) of " << config.hidden_layers << "x"
              << config.hidden_width << " " << nl::activation_name(config.activation) << " on "
              << data.size() << " pairs\n";
    for (std::size_t c = 0; c < result.logs.size(); ++c)
        std::cout << "column " << c << ": epochs=" << result.logs[c].epochs.size()
                  << " best_epoch=" << result.logs[c].best_epoch
                  << " validation_accuracy=" << result.logs[c].best_validation_accuracy << '\n';
    std::cout << "model -> " << o.model << "\nlog -> " << log_path << '\n';
    return kExitOk;
}

int cmd_grid(const Options& o) {
    require(o.out, "--out");
    nl::GridSpec grid;
    grid.depths = o.depths;
    grid.widths = o.widths;
    grid.base.activation = nl::parse_activation(o.activation);
    grid.train = train_options(o);
    grid.validate();
    nl::SplitSpec split;
    split.k_folds = o.folds;
    split.seed = o.seed;
    const auto data = load_examples(o);
    const auto rows = nl::grid_search(data, grid, split, o.workers);

    auto out = open_out(o.out);
    nl::write_grid_csv(out, rows);
    finish(out, o.out);
    std::cout << "grid search: " << rows.size() << " cell(s), " << split.k_folds << " folds, " << data.size()
              << " pairs\n";
    for (const auto& r : rows)
        std::cout << r.depth << "x" << r.width << ": mean_val_accuracy=" << r.mean_validation_accuracy << '\n';
    return kExitOk;
}

nl::EnsembleModel load_model_checked(const std::string& path) {
    require(path, "--model");
    return nl::load_ensemble(path);
}

int cmd_evaluate(const Options& o) {
    const auto model = load_model_checked(o.model);
    nl::ExampleSet data;
    if (!o.features.empty()) {
        const auto table = nl::load_feature_csv(o.features);
        nl::check_schema(model.feature_schema_version(), table.schema.version);
        data = nl::ExampleSet::from_features(table.labeled());
    } else {
        data = load_examples(o);
    }
    nl::check_schema(model.feature_schema_version(), data.schema_version);
    const auto report = nl::evaluate(model, data);
    if (!o.out.empty()) {
        auto out = open_out(o.out);
        nl::write_eval_csv(out, report);
        finish(out, o.out);
    }
    nl::write_eval_summary(std::cout, report);
    return kExitOk;
}

int cmd_predict(const Options& o) {
    require(o.out, "--out");
    const auto model = load_model_checked(o.model);
    auto out = open_out(o.out);
    if (!o.features.empty()) {
        const auto table = nl::load_feature_csv(o.features);
        out << "row,posterior,label\n";
        for (std::size_t i = 0; i < table.vectors.size(); ++i) {
            const auto p = nl::predict_ensemble(model, table.vectors[i]);
            out << i + 1 << ',' << nl::format_double(p.posterior) << ',' << p.label << '\n';
        }
    } else {
        require(o.records, "--records (or --features)");
        require(o.pairs, "--pairs");
        auto ds = nl::load_dataset(o.records, o.pairs);
            const auto vectors = nl::featurize_pairs(ds);
        out << "left_id,right_id,posterior,label\n";
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            const auto p = nl::predict_ensemble(model, vectors[i]);
            out << ds.pairs[i].left_id << ',' << ds.pairs[i].right_id << ',' << nl::format_double(p.posterior)
                << ',' << p.label << '\n';
        }
    }
    finish(out, o.out);
    std::cout << "predictions -> " << o.out << '\n';
    return kExitOk;
}

int cmd_gen_synthetic(const Options& o) {
    require(o.records, "--records");
    require(o.pairs, "--pairs");
    nl::SyntheticSpec spec = o.synthetic;
    spec.seed = o.seed;
    spec.variant_ops.clear();
    for (const auto& v : o.variant_ops)
        if (v != "none") spec.variant_ops.insert(nl::parse_name_variant(v));
    const auto ds = nl::generate_synthetic(spec);
    nl::save_records(o.records, ds.records);
    nl::save_pairs(o.pairs, ds.pairs);
    const auto c = ds.class_counts();
    const double share = ds.pairs.empty() ? 0.0 : static_cast<double>(c.positive) / ds.pairs.size();
    std::cout << "generated " << ds.records.size() << " records, " << ds.pairs.size() << " pairs (label 1: "
              << c.positive << " = " << share * 100.0 << "%, label 0: " << c.negative << ")\n"
              << "records -> " << o.records << "\npairs -> " << o.pairs << '\n';
    return kExitOk;
}

int cmd_split(const Options& o) {
    require(o.pairs, "--pairs");
    require(o.train_out, "--train-out");
    require(o.test_out, "--test-out");
    auto in = nl::detail::open_input(o.pairs);
    nl::PairDataset ds;
    ds.pairs = nl::parse_pairs(in, o.pairs);
    if (!o.records.empty()) nl::check_pairs_resolve(ds.pairs, nl::index_records(nl::load_records(o.records)));
    const auto labels = nl::pair_labels(ds);
    nl::SplitSpec spec;
    spec.test_fraction = o.test_fraction;
    spec.seed = o.seed;
    const auto split = nl::stratified_holdout(labels, spec);
    nl::save_pairs(o.train_out, nl::subset_pairs(ds, split.train).pairs);
    nl::save_pairs(o.test_out, nl::subset_pairs(ds, split.test).pairs);
    std::cout << "split " << ds.pairs.size() << " pairs: train " << split.train.size() << " -> " << o.train_out
              << ", test " << split.test.size() << " -> " << o.test_out << '\n';
    return kExitOk;
}

std::string long_name(const CLI::Option* opt) {
    const auto& names = opt->get_lnames();
    return names.empty() ? std::string{} : names.front();
}

} // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"namelink: decide whether two publication records belong to the same author"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    struct Command {
        CLI::App* app;
        int (*run)(const Options&);
        bool needs_seed;
    };
    std::vector<Command> commands;
    std::string config_path;
    auto add = [&](const char* name, const char* help, int (*run)(const Options&), bool needs_seed) {
        CLI::App* sub = app.add_subcommand(name, help);
        commands.push_back({sub, run, needs_seed});
        sub->add_option("--seed", o.seed, needs_seed ? "Random seed (required)" : "Random seed");
        sub->add_option("--config", config_path, "JSON file of option defaults; command-line flags take precedence");
        return sub;
    };

    auto* featurize = add("featurize", "Compute the 30-value feature vector of every pair", cmd_featurize, false);
    featurize->add_option("--records", o.records, "Records file (JSON Lines)");
    featurize->add_option("--pairs", o.pairs, "Pairs file (CSV left_id,right_id,label)");
    featurize->add_option("--out", o.out, "Feature CSV to write");

    auto data_inputs = [&](CLI::App* sub) {
        sub->add_option("--features", o.features, "Feature CSV from 'featurize'");
        sub->add_option("--records", o.records, "Records file, used with --pairs instead of --features");
        sub->add_option("--pairs", o.pairs, "Labeled pairs file, used with --records");
    };
    auto training_flags = [&](CLI::App* sub) {
        sub->add_option("--activation", o.activation, "Hidden activation: softsign, tanh or rectifier")
            ->capture_default_str();
        sub->add_option("--max-epochs", o.max_epochs, "Epoch limit per network")->capture_default_str();
        sub->add_option("--patience", o.patience, "Early-stopping patience in epochs")->capture_default_str();
        sub->add_option("--workers", o.workers, "Worker threads (0 = all cores); results do not depend on it");
    };

    auto* train = add("train", "Train a multi-column ensemble", cmd_train, true);
    data_inputs(train);
    train->add_option("--model", o.model, "Ensemble model file to write");
    train->add_option("--log", o.log, "Per-epoch training log CSV (default: <model>.log.csv)");
    train->add_option("--hidden-layers", o.hidden_layers, "Hidden layers per network")->capture_default_str();
    train->add_option("--hidden-width", o.hidden_width, "Units per hidden layer")->capture_default_str();
    train->add_option("--columns", o.columns, "Networks in the ensemble")->capture_default_str();
    training_flags(train);

    auto* grid = add("grid-search", "Cross-validated search over network depth and width", cmd_grid, true);
    data_inputs(grid);
    grid->add_option("--out", o.out, "Ranked CSV to write (depth,width,mean_val_accuracy)");
    grid->add_option("--depths", o.depths, "Hidden-layer counts to try")->delimiter(',')->capture_default_str();
    grid->add_option("--widths", o.widths, "Hidden widths to try")->delimiter(',')->capture_default_str();
    grid->add_option("--folds", o.folds, "Cross-validation folds")->capture_default_str();
    training_flags(grid);

    auto* evaluate = add("evaluate", "Score an ensemble on labeled pairs", cmd_evaluate, false);
    evaluate->add_option("--model", o.model, "Ensemble model file");
    data_inputs(evaluate);
    evaluate->add_option("--out", o.out, "Report CSV to write (metric,value plus confusion block)");

    auto* predict = add("predict", "Posterior and decision for candidate pairs", cmd_predict, false);
    predict->add_option("--model", o.model, "Ensemble model file");
    predict->add_option("--records", o.records, "Records file");
    predict->add_option("--pairs", o.pairs, "Candidate pairs; the label column may be empty");
    predict->add_option("--features", o.features, "Feature CSV instead of records and pairs");
    predict->add_option("--out", o.out, "Prediction CSV to write");

    auto* synth = add("gen-synthetic", "Generate a synthetic ambiguous-author dataset", cmd_gen_synthetic, true);
    synth->add_option("--records", o.records, "Records file to write");
    synth->add_option("--pairs", o.pairs, "Pairs file to write");
    synth->add_option("--authors", o.synthetic.n_authors, "Number of authors")->capture_default_str();
    synth->add_option("--records-per-author", o.synthetic.records_per_author, "Records per author")
        ->capture_default_str();
    synth->add_option("--positive-pairs-per-author", o.synthetic.positive_pairs_per_author,
                      "Same-author pairs sampled per author (0 = all)")
        ->capture_default_str();
    synth->add_option("--negative-ratio", o.synthetic.negative_pair_ratio, "Negative pairs per positive pair")
        ->capture_default_str();
    synth->add_option("--variant-ops", o.variant_ops,
                      "Name variant operations: permutation, middle, initials, diacritics, typo, or none")
        ->delimiter(',')
        ->capture_default_str();
    synth->add_option("--variant-rate", o.synthetic.variant_rate, "Chance that each variant op fires")
        ->capture_default_str();
    synth->add_option("--missing-coauthors", o.synthetic.missing.coauthors, "Coauthor missingness")
        ->capture_default_str();
    synth->add_option("--missing-affiliation", o.synthetic.missing.affiliation, "Affiliation missingness")
        ->capture_default_str();
    synth->add_option("--missing-paper-keywords", o.synthetic.missing.paper_keywords,
                      "Paper keyword missingness")
        ->capture_default_str();
    synth->add_option("--missing-interest-keywords", o.synthetic.missing.interest_keywords,
                      "Interest keyword missingness")
        ->capture_default_str();

    auto* split = add("split", "Stratified hold-out split of a labeled pairs file", cmd_split, true);
    split->add_option("--pairs", o.pairs, "Labeled pairs file");
    split->add_option("--records", o.records, "Optional records file to check ids against");
    split->add_option("--test-fraction", o.test_fraction, "Share of each class held out")->capture_default_str();
    split->add_option("--train-out", o.train_out, "Training pairs file to write");
    split->add_option("--test-out", o.test_out, "Test pairs file to write");

    // Config file support, wired after all options exist so each command
    // knows which keys belong to it.
    std::set<std::string> any, names;
    std::map<CLI::App*, std::set<std::string>> own;
    for (const auto& c : commands) {
        names.insert(c.app->get_name());
        for (const auto* opt : c.app->get_options()) {
            const auto n = long_name(opt);
            if (n.empty() || n == "help" || n == "config") continue;
            own[c.app].insert(n);
            any.insert(n);
        }
    }

    try {
        app.parse(argc, argv);
        for (const auto& c : commands) {
            if (!c.app->parsed()) continue;
            if (!config_path.empty()) {
                const JsonConfig config(c.app->get_name(), own[c.app], any, names);
                for (const auto& [name, inputs] : config.read(config_path)) {
                    CLI::Option* opt = c.app->get_option("--" + name);
                    if (opt->count() > 0) continue;
                    opt->add_result(inputs);
                    opt->run_callback();
                }
            }
            if (c.needs_seed && c.app->get_option("--seed")->count() == 0)
                throw CLI::RequiredError("--seed");
            return c.run(o);
        }
        return kExitInternal;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    } catch (const nl::CompatibilityError& e) {
        std::cerr << "error: incompatible input: " << e.what() << '\n';
        return kExitCompatibility;
    } catch (const nl::NumericFault& e) {
        std::cerr << "error: numeric fault: " << e.what() << '\n';
        return kExitInternal;
    } catch (const nl::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}
