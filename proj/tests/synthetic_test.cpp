#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "namelink/features.hpp"
#include "namelink/synthetic.hpp"

namespace nl = namelink;

namespace {

std::string dump(const nl::PairDataset& ds) {
    std::ostringstream s;
    nl::write_records(s, ds.records);
    nl::write_pairs(s, ds.pairs);
    return s.str();
}

nl::PairDataset normalized(nl::PairDataset ds) {
    for (auto& [id, r] : ds.records) r = nl::normalize_record(r);
    return ds;
}

} // namespace

TEST(Synthetic, DeterministicPerSeed) {
    nl::SyntheticSpec spec;
    spec.seed = 12;
    EXPECT_EQ(dump(nl::generate_synthetic(spec)), dump(nl::generate_synthetic(spec)));
    auto other = spec;
    other.seed = 13;
    EXPECT_NE(dump(nl::generate_synthetic(spec)), dump(nl::generate_synthetic(other)));
}

TEST(Synthetic, ReferenceLabelShare) {
    for (std::uint64_t seed : {1, 2, 3}) {
        nl::SyntheticSpec spec;
        spec.seed = seed;
        const auto ds = nl::generate_synthetic(spec);
        const auto c = ds.class_counts();
        EXPECT_EQ(c.unlabeled, 0u);
        EXPECT_EQ(ds.records.size(), 200u);
        const double share = static_cast<double>(c.positive) / static_cast<double>(ds.pairs.size());
        EXPECT_NEAR(share, 0.1293, 0.01);
        EXPECT_GT(ds.pairs.size(), 2500u);
        EXPECT_LT(ds.pairs.size(), 3500u);
    }
}

TEST(Synthetic, PairsAreValidAndUnique) {
    nl::SyntheticSpec spec;
    spec.seed = 4;
    const auto ds = nl::generate_synthetic(spec);
    std::set<nl::PairKey> seen;
    for (const auto& p : ds.pairs) {
        EXPECT_TRUE(seen.insert(nl::pair_key(p.left_id, p.right_id)).second);
        ASSERT_TRUE(ds.records.contains(p.left_id));
        ASSERT_TRUE(ds.records.contains(p.right_id));
        // Ground truth by construction: the id prefix names the author.
        EXPECT_EQ(*p.label == 1, p.left_id.substr(0, 4) == p.right_id.substr(0, 4));
    }
}

TEST(Synthetic, NoVariantsNoMissingnessGivesExactNames) {
    nl::SyntheticSpec spec;
    spec.seed = 5;
    spec.variant_ops.clear();
    spec.missing = {0, 0, 0, 0};
    const auto ds = normalized(nl::generate_synthetic(spec));
    std::size_t positives = 0;
    for (const auto& p : ds.pairs) {
        if (*p.label != 1) continue;
        ++positives;
        const auto v = nl::featurize_pair(ds.record(p.left_id), ds.record(p.right_id));
        for (auto m : nl::kAllMeasures) ASSERT_EQ(v.at(nl::feature_index(nl::Attribute::author_name, m)), 1.0);
    }
    EXPECT_GT(positives, 0u);
}

TEST(Synthetic, PositivesOutscoreNegativesOnNameMongeElkan) {
    nl::SyntheticSpec spec;
    spec.seed = 6;
    const auto ds = normalized(nl::generate_synthetic(spec));
    ASSERT_GE(ds.pairs.size(), 1000u);
    double pos = 0, neg = 0;
    std::size_t np = 0, nn = 0;
    const auto idx = nl::feature_index(nl::Attribute::author_name, nl::Measure::monge_elkan);
    for (const auto& p : ds.pairs) {
        const double v = nl::featurize_pair(ds.record(p.left_id), ds.record(p.right_id)).at(idx);
        if (*p.label == 1) {
            pos += v;
            ++np;
        } else {
            neg += v;
            ++nn;
        }
    }
    EXPECT_GE(pos / np, neg / nn);
}

TEST(Synthetic, RecordsCarryVariantsAndMarks) {
    nl::SyntheticSpec spec;
    spec.seed = 7;
    const auto ds = nl::generate_synthetic(spec);
    std::set<std::string> names;
    bool marked = false;
    for (const auto& [id, r] : ds.records) {
        names.insert(r.author_name);
        marked = marked || nl::normalize_text(r.author_name) != r.author_name;
    }
    EXPECT_GT(names.size(), 20u);
    EXPECT_TRUE(marked);
}

TEST(Synthetic, FilesRoundTripThroughLoaders) {
    nl::SyntheticSpec spec;
    spec.seed = 8;
    const auto ds = nl::generate_synthetic(spec);
    const auto dir = std::filesystem::temp_directory_path() / "namelink_synth_rt";
    std::filesystem::create_directories(dir);
    nl::save_records((dir / "r.jsonl").string(), ds.records);
    nl::save_pairs((dir / "p.csv").string(), ds.pairs);
    const auto back = nl::load_dataset((dir / "r.jsonl").string(), (dir / "p.csv").string());
    EXPECT_EQ(back.pairs, ds.pairs);
    EXPECT_EQ(back.records, normalized(ds).records);
    std::filesystem::remove_all(dir);
}

TEST(Synthetic, RejectsInvalidSpecs) {
    nl::SyntheticSpec spec;
    spec.n_authors = 1;
    EXPECT_THROW(nl::generate_synthetic(spec), nl::ConfigError);
    spec = {};
    spec.variant_rate = 1.5;
    EXPECT_THROW(nl::generate_synthetic(spec), nl::ConfigError);
    spec = {};
    spec.positive_pairs_per_author = 1000;
    EXPECT_THROW(nl::generate_synthetic(spec), nl::ConfigError);
    spec = {};
    spec.negative_pair_ratio = 1e6;
    EXPECT_THROW(nl::generate_synthetic(spec), nl::ConfigError);
    EXPECT_THROW(nl::parse_name_variant("swap"), nl::ConfigError);
}
