// Integration tests for the namelink executable. NAMELINK_CLI is the path
// of the built tool.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "namelink/namelink.hpp"

namespace fs = std::filesystem;
namespace nl = namelink;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("namelink_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    /// Exit status of the tool; stdout and stderr land in out_ / err_.
    int run(const std::string& args) {
        const std::string cmd = std::string(NAMELINK_CLI) + " " + args + " > " + path("stdout.txt") + " 2> " +
                                path("stderr.txt");
        const int status = std::system(cmd.c_str());
        out_ = slurp(path("stdout.txt"));
        err_ = slurp(path("stderr.txt"));
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    void write(const std::string& name, const std::string& text) const {
        std::ofstream(path(name), std::ios::binary) << text;
    }

    /// Small synthetic corpus shared by several tests.
    void small_corpus() {
        ASSERT_EQ(run("gen-synthetic --seed 3 --authors 4 --records-per-author 8 --positive-pairs-per-author 10"
                      " --records " + path("r.jsonl") + " --pairs " + path("p.csv")),
                  0)
            << err_;
    }

    fs::path dir_;
    std::string out_, err_;
};

} // namespace

TEST_F(Cli, FeaturizeWritesThirtyOneColumns) {
    small_corpus();
    ASSERT_EQ(run("featurize --records " + path("r.jsonl") + " --pairs " + path("p.csv") + " --out " + path("f.csv")), 0)
        << err_;
    std::ifstream in(path("f.csv"));
    std::string version, header, row;
    std::getline(in, version);
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(std::count(header.begin(), header.end(), ','), 30);
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), 30);
}

TEST_F(Cli, MissingRecordsFileIsInputError) {
    write("p.csv", "left_id,right_id,label\n");
    EXPECT_EQ(run("featurize --records " + path("nope.jsonl") + " --pairs " + path("p.csv") + " --out " + path("f.csv")),
              2);
    EXPECT_NE(err_.find(path("nope.jsonl")), std::string::npos) << err_;
}

TEST_F(Cli, EmptyPairsFileGivesHeaderOnly) {
    write("r.jsonl", R"({"record_id":"a","author_name":"x","coauthors":[]})" "\n");
    write("p.csv", "");
    ASSERT_EQ(run("featurize --records " + path("r.jsonl") + " --pairs " + path("p.csv") + " --out " + path("f.csv")), 0)
        << err_;
    const auto table = nl::load_feature_csv(path("f.csv"));
    EXPECT_TRUE(table.vectors.empty());
    EXPECT_NE(slurp(path("f.csv")).find(",label\n"), std::string::npos);
}

TEST_F(Cli, TrainWritesModelAndLogAndIsDeterministic) {
    small_corpus();
    const std::string common = "train --seed 5 --records " + path("r.jsonl") + " --pairs " + path("p.csv") +
                               " --hidden-layers 2 --hidden-width 8 --columns 3 --max-epochs 20";
    ASSERT_EQ(run(common + " --model " + path("m1.txt")), 0) << err_;
    ASSERT_EQ(run(common + " --model " + path("m2.txt") + " --workers 1"), 0) << err_;
    EXPECT_EQ(slurp(path("m1.txt")), slurp(path("m2.txt")));
    const auto model = nl::load_ensemble(path("m1.txt"));
    EXPECT_EQ(model.n_columns(), 3u);
    const std::string log = slurp(path("m1.txt.log.csv"));
    for (const char* col : {"\n0,1,", "\n1,1,", "\n2,1,"}) EXPECT_NE(log.find(col), std::string::npos);
}

TEST_F(Cli, ZeroWidthIsValidationError) {
    small_corpus();
    EXPECT_EQ(run("train --seed 1 --records " + path("r.jsonl") + " --pairs " + path("p.csv") +
                  " --hidden-width 0 --model " + path("m.txt")),
              2);
    EXPECT_NE(err_.find("hidden_width"), std::string::npos) << err_;
}

TEST_F(Cli, SeedIsMandatoryForTraining) {
    small_corpus();
    EXPECT_EQ(run("train --records " + path("r.jsonl") + " --pairs " + path("p.csv") + " --model " + path("m.txt")), 2);
    EXPECT_NE(err_.find("--seed"), std::string::npos) << err_;
    EXPECT_EQ(run("gen-synthetic --records " + path("x.jsonl") + " --pairs " + path("x.csv")), 2);
}

TEST_F(Cli, ConfigFileSuppliesDefaultsAndFlagsWin) {
    small_corpus();
    write("cfg.json", R"({"seed": 5, "max_epochs": 3, "train": {"hidden-layers": 1, "hidden-width": 4, "columns": 2},
                          "grid-search": {"folds": 9}})");
    ASSERT_EQ(run("train --config " + path("cfg.json") + " --records " + path("r.jsonl") + " --pairs " + path("p.csv") +
                  " --columns 3 --model " + path("m.txt")),
              0)
        << err_;
    const auto m = nl::load_ensemble(path("m.txt"));
    EXPECT_EQ(m.n_columns(), 3u);
    EXPECT_EQ(m.columns[0].config.hidden_layers, 1u);
    EXPECT_EQ(m.columns[0].config.hidden_width, 4u);
    EXPECT_EQ(m.fold_seed, 5u);
    write("bad.json", R"({"seed": 5, "bogus": 1})");
    EXPECT_EQ(run("train --config " + path("bad.json") + " --records " + path("r.jsonl") + " --pairs " +
                  path("p.csv") + " --model " + path("m.txt")),
              2);
}

TEST_F(Cli, GridSearchSortsAndRepeats) {
    small_corpus();
    const std::string args = "grid-search --seed 2 --records " + path("r.jsonl") + " --pairs " + path("p.csv") +
                             " --depths 2,1 --widths 6,2 --folds 3 --max-epochs 15 --out ";
    ASSERT_EQ(run(args + path("g1.csv")), 0) << err_;
    ASSERT_EQ(run(args + path("g2.csv") + " --workers 1"), 0) << err_;
    const std::string g = slurp(path("g1.csv"));
    EXPECT_EQ(g, slurp(path("g2.csv")));
    std::istringstream in(g);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "depth,width,mean_val_accuracy");
    double prev = 2.0;
    int rows = 0;
    while (std::getline(in, line)) {
        const double v = std::stod(line.substr(line.rfind(',') + 1));
        EXPECT_LE(v, prev);
        prev = v;
        ++rows;
    }
    EXPECT_EQ(rows, 4);
    ASSERT_EQ(run("grid-search --seed 2 --records " + path("r.jsonl") + " --pairs " + path("p.csv") +
                  " --depths 1 --widths 3 --folds 3 --max-epochs 5 --out " + path("g3.csv")),
              0);
    const std::string single = slurp(path("g3.csv"));
    EXPECT_EQ(std::count(single.begin(), single.end(), '\n'), 2);
}

TEST_F(Cli, EvaluateAndPredict) {
    small_corpus();
    ASSERT_EQ(run("split --seed 4 --pairs " + path("p.csv") + " --train-out " + path("tr.csv") + " --test-out " +
                  path("te.csv")),
              0)
        << err_;
    ASSERT_EQ(run("train --seed 5 --records " + path("r.jsonl") + " --pairs " + path("tr.csv") +
                  " --hidden-layers 1 --hidden-width 6 --columns 2 --max-epochs 30 --model " + path("m.txt")),
              0)
        << err_;
    ASSERT_EQ(run("evaluate --model " + path("m.txt") + " --records " + path("r.jsonl") + " --pairs " + path("te.csv") +
                  " --out " + path("report.csv")),
              0)
        << err_;
    EXPECT_NE(out_.find("accuracy:"), std::string::npos);
    EXPECT_TRUE(slurp(path("report.csv")).starts_with("metric,value\naccuracy,"));

    // Unlabeled candidates are accepted by predict.
    std::string unlabeled = "left_id,right_id,label\n";
    std::istringstream te(slurp(path("te.csv")));
    std::string line;
    std::getline(te, line);
    while (std::getline(te, line)) unlabeled += line.substr(0, line.rfind(',') + 1) + "\n";
    write("cand.csv", unlabeled);
    ASSERT_EQ(run("predict --model " + path("m.txt") + " --records " + path("r.jsonl") + " --pairs " + path("cand.csv") +
                  " --out " + path("pred.csv")),
              0)
        << err_;
    std::istringstream pred(slurp(path("pred.csv")));
    std::getline(pred, line);
    EXPECT_EQ(line, "left_id,right_id,posterior,label");
    int rows = 0;
    while (std::getline(pred, line)) {
        const auto last = line.rfind(','), before = line.rfind(',', last - 1);
        const double p = std::stod(line.substr(before + 1, last - before - 1));
        const int label = std::stoi(line.substr(last + 1));
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
        EXPECT_EQ(label, p >= 0.5 ? 1 : 0);
        ++rows;
    }
    EXPECT_EQ(rows, static_cast<int>(std::count(unlabeled.begin(), unlabeled.end(), '\n')) - 1);
}

TEST_F(Cli, MissingModelIsInputError) {
    small_corpus();
    EXPECT_EQ(run("evaluate --model " + path("none.txt") + " --records " + path("r.jsonl") + " --pairs " +
                  path("p.csv")),
              2);
}

TEST_F(Cli, SchemaMismatchIsCompatibilityError) {
    small_corpus();
    ASSERT_EQ(run("featurize --records " + path("r.jsonl") + " --pairs " + path("p.csv") + " --out " + path("f.csv")), 0);
    ASSERT_EQ(run("train --seed 1 --features " + path("f.csv") +
                  " --hidden-layers 1 --hidden-width 3 --columns 1 --max-epochs 2 --model " + path("m.txt")),
              0)
        << err_;
    std::string model = slurp(path("m.txt"));
    for (std::size_t at = model.find("feature_schema 1"); at != std::string::npos; at = model.find("feature_schema 1"))
        model.replace(at, 16, "feature_schema 4");
    write("m4.txt", model);
    EXPECT_EQ(run("evaluate --model " + path("m4.txt") + " --features " + path("f.csv")), 3);
    EXPECT_NE(err_.find('4'), std::string::npos) << err_;
    EXPECT_NE(err_.find('1'), std::string::npos) << err_;
}

TEST_F(Cli, FileAndInProcessPipelinesAgree) {
    small_corpus();
    ASSERT_EQ(run("featurize --records " + path("r.jsonl") + " --pairs " + path("p.csv") + " --out " + path("f.csv")), 0);
    ASSERT_EQ(run("train --seed 9 --features " + path("f.csv") +
                  " --hidden-layers 1 --hidden-width 5 --columns 2 --max-epochs 10 --model " + path("m.txt")),
              0);
    ASSERT_EQ(run("evaluate --model " + path("m.txt") + " --features " + path("f.csv") + " --out " + path("e.csv")), 0);

    const auto ds = nl::load_dataset(path("r.jsonl"), path("p.csv"));
    const auto data = nl::ExampleSet::from_features(nl::featurize_dataset(ds));
    nl::NetworkConfig c;
    c.hidden_layers = 1;
    c.hidden_width = 5;
    nl::TrainOptions opt;
    opt.max_epochs = 10;
    const auto model = nl::train_multicolumn(data, c, 2, 9, opt).model;
    std::ostringstream m, e;
    nl::write_ensemble(m, model);
    nl::write_eval_csv(e, nl::evaluate(model, data));
    EXPECT_EQ(slurp(path("m.txt")), m.str());
    EXPECT_EQ(slurp(path("e.csv")), e.str());
}

TEST_F(Cli, GenSyntheticLabelShareAndUnknownCommand) {
    ASSERT_EQ(run("gen-synthetic --seed 1 --records " + path("r.jsonl") + " --pairs " + path("p.csv")), 0) << err_;
    const auto ds = nl::load_dataset(path("r.jsonl"), path("p.csv"));
    const auto c = ds.class_counts();
    EXPECT_NEAR(static_cast<double>(c.positive) / ds.pairs.size(), 0.1293, 0.01);
    EXPECT_EQ(run("frobnicate"), 2);
    EXPECT_EQ(run("gen-synthetic --seed 1 --variant-ops bogus --records " + path("r.jsonl") + " --pairs " +
                  path("p.csv")),
              2);
}
