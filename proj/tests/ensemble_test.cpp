#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "namelink/ensemble.hpp"
#include "oracles.hpp"

namespace nl = namelink;

namespace {

/// A one-hidden-layer column whose class-1 posterior is `p` for every input.
nl::MlpModel constant_column(double p) {
    nl::NetworkConfig c;
    c.hidden_layers = 1;
    c.hidden_width = 2;
    nl::MlpModel m{c, nl::zeros_like(nl::init_network(c)), nl::kFeatureSchemaVersion};
    m.layers.back().bias(1) = std::log(p / (1 - p));
    return m;
}

nl::EnsembleModel random_ensemble(std::mt19937_64& rng, std::size_t n) {
    nl::EnsembleModel e;
    for (std::size_t i = 0; i < n; ++i) {
        nl::NetworkConfig c;
        c.hidden_layers = 1 + rng() % 2;
        c.hidden_width = 3 + rng() % 5;
        c.seed = rng();
        auto params = nl::init_network(c);
        for (auto& l : params) l.bias.setRandom();
        e.columns.push_back({c, params, nl::kFeatureSchemaVersion});
    }
    return e;
}

nl::ExampleSet separable_set(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto x = gradcheck::random_inputs(rng, 30, n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = x(0, i) + x(1, i) > 1.0 ? 1 : 0;
    return {x, y};
}

} // namespace

TEST(ExactSum, OrderIndependentAndCorrectlyRounded) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 20000; ++k) {
        std::vector<double> xs(1 + rng() % 9);
        for (auto& x : xs) x = u(rng) * std::pow(2.0, -static_cast<int>(rng() % 60));
        const double s = nl::exact_sum(xs), m = nl::exact_mean(xs);
        ASSERT_EQ(s, oracle::exact_sum(xs));
        ASSERT_EQ(m, oracle::exact_mean(xs));
        std::shuffle(xs.begin(), xs.end(), rng);
        ASSERT_EQ(nl::exact_sum(xs), s);
        ASSERT_EQ(nl::exact_mean(xs), m);
    }
    const std::vector<double> cancel{1e100, 1.0, -1e100};
    EXPECT_EQ(nl::exact_sum(cancel), 1.0);
    EXPECT_EQ(nl::exact_sum(std::vector<double>{}), 0.0);
    EXPECT_THROW(nl::exact_mean(std::vector<double>{}), nl::ConfigError);
}

TEST(ExactMean, EqualValuesAndHalfwayCases) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 5000; ++k) {
        const double p = u(rng);
        const std::vector<double> same(1 + rng() % 12, p);
        ASSERT_EQ(nl::exact_mean(same), p);
    }
    // 1 and 1 + 2^-52 average to a halfway point; ties go to the even one.
    const double a = 1.0, b = std::nextafter(1.0, 2.0);
    EXPECT_EQ(nl::exact_mean(std::vector<double>{a, b}), 1.0);
    const double c = std::nextafter(b, 2.0);
    EXPECT_EQ(nl::exact_mean(std::vector<double>{b, c}), c);
}

TEST(EnsemblePredict, Examples) {
    nl::EnsembleModel e;
    e.columns = {constant_column(0.9), constant_column(0.6), constant_column(0.3)};
    const std::vector<double> x(30, 0.5);
    std::vector<double> ps;
    for (const auto& c : e.columns) ps.push_back(nl::predict(c, std::span<const double>(x)).posterior);
    const auto p = nl::predict_ensemble(e, x);
    EXPECT_EQ(p.posterior, oracle::exact_mean(ps));
    EXPECT_NEAR(p.posterior, 0.6, 1e-15);
    EXPECT_EQ(p.label, 1);

    e.columns = {constant_column(0.4), constant_column(0.4)};
    EXPECT_NEAR(nl::predict_ensemble(e, x).posterior, 0.4, 1e-15);
    EXPECT_EQ(nl::predict_ensemble(e, x).label, 0);
}

TEST(EnsemblePredict, IdenticalColumnsEqualOneColumn) {
    std::mt19937_64 rng(2);
    const auto e1 = random_ensemble(rng, 1);
    nl::EnsembleModel e3{{e1.columns[0], e1.columns[0], e1.columns[0]}, 0};
    const auto x = gradcheck::random_inputs(rng, 30, 50);
    EXPECT_EQ(e3.posteriors(x), e1.columns[0].posteriors(x));
    EXPECT_EQ(e1.posteriors(x), e1.columns[0].posteriors(x));
}

TEST(EnsemblePredict, MeanAndPermutationExact) {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
        auto e = random_ensemble(rng, 2 + k % 6);
        const auto x = gradcheck::random_inputs(rng, 30, 20);
        const auto avg = e.posteriors(x);
        for (Eigen::Index s = 0; s < x.cols(); ++s) {
            std::vector<double> p1;
            for (const auto& c : e.columns) p1.push_back(c.posteriors(x.col(s))(1, 0));
            ASSERT_EQ(avg(1, s), oracle::exact_mean(p1));
            ASSERT_LT(std::abs(avg.col(s).sum() - 1.0), 1e-12);
        }
        std::shuffle(e.columns.begin(), e.columns.end(), rng);
        ASSERT_EQ(e.posteriors(x), avg);
    }
}

TEST(EnsemblePredict, SchemaAndShapeChecks) {
    nl::EnsembleModel e;
    EXPECT_THROW(e.validate(), nl::ConfigError);
    e.columns = {constant_column(0.5)};
    e.columns[0].feature_schema_version = 3;
    nl::FeatureVector v;
    EXPECT_THROW(nl::predict_ensemble(e, v), nl::CompatibilityError);
    const std::vector<double> short_x(29, 0.0);
    EXPECT_THROW(nl::predict_ensemble(e, short_x), nl::CompatibilityError);
}

TEST(ColumnSplits, FiveColumnsOnHundred) {
    const auto splits = nl::column_splits(100, 5, 9);
    ASSERT_EQ(splits.size(), 5u);
    std::vector<int> validated(100, 0), trained(100, 0);
    for (const auto& s : splits) {
        EXPECT_EQ(s.train.size(), 80u);
        EXPECT_EQ(s.validation.size(), 20u);
        for (auto i : s.validation) ++validated[i];
        for (auto i : s.train) ++trained[i];
    }
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(validated[i], 1);
        EXPECT_EQ(trained[i], 4);
    }
    EXPECT_EQ(nl::column_splits(100, 5, 9)[2].validation, splits[2].validation);
}

TEST(ColumnSplits, UnevenSizesAndSingleColumn) {
    const auto splits = nl::column_splits(23, 4, 1);
    std::set<std::size_t> sizes;
    for (const auto& s : splits) sizes.insert(s.validation.size());
    EXPECT_LE(*sizes.rbegin() - *sizes.begin(), 1u);
    const auto one = nl::column_splits(100, 1, 1);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].train.size(), 90u);
    EXPECT_EQ(one[0].validation.size(), 10u);
    EXPECT_THROW(nl::column_splits(9, 5, 1), nl::ConfigError);
    EXPECT_THROW(nl::column_splits(10, 0, 1), nl::ConfigError);
}

TEST(TrainMulticolumn, SingleColumnMatchesItsModel) {
    const auto data = separable_set(120, 4);
    nl::NetworkConfig c;
    c.hidden_layers = 1;
    c.hidden_width = 6;
    nl::TrainOptions opt;
    opt.max_epochs = 40;
    const auto r = nl::train_multicolumn(data, c, 1, 77, opt);
    ASSERT_EQ(r.model.n_columns(), 1u);
    EXPECT_EQ(r.splits[0].train.size(), 108u);
    EXPECT_EQ(r.model.posteriors(data.inputs), r.model.columns[0].posteriors(data.inputs));
    for (Eigen::Index i = 0; i < 10; ++i) {
        std::vector<double> x(data.inputs.col(i).data(), data.inputs.col(i).data() + 30);
        EXPECT_EQ(nl::predict_ensemble(r.model, x).posterior, nl::predict(r.model.columns[0], x).posterior);
    }
    // The column is exactly what train() gives on the same split and seed.
    c.seed = nl::derive_seed(77, {0});
    const auto direct = nl::train(data.subset(r.splits[0].train), data.subset(r.splits[0].validation), c, opt);
    EXPECT_EQ(direct.model, r.model.columns[0]);
}

TEST(TrainMulticolumn, DeterministicAcrossWorkerCounts) {
    const auto data = separable_set(100, 5);
    nl::NetworkConfig c;
    c.hidden_layers = 1;
    c.hidden_width = 5;
    nl::TrainOptions opt;
    opt.max_epochs = 30;
    const auto a = nl::train_multicolumn(data, c, 3, 8, opt, 1);
    const auto b = nl::train_multicolumn(data, c, 3, 8, opt, 3);
    EXPECT_EQ(a.model, b.model);
    EXPECT_NE(a.model.columns[0], a.model.columns[1]);
}

TEST(EnsembleFile, RoundTrip) {
    std::mt19937_64 rng(6);
    const auto e = random_ensemble(rng, 3);
    std::stringstream s;
    nl::write_ensemble(s, e);
    const std::string text = s.str();
    EXPECT_EQ(nl::read_ensemble(s), e);
    std::istringstream in(text);
    std::stringstream again;
    nl::write_ensemble(again, nl::read_ensemble(in));
    EXPECT_EQ(again.str(), text);
    std::istringstream bad("namelink-ensemble 2\n");
    EXPECT_THROW(nl::read_ensemble(bad), nl::CompatibilityError);
}
