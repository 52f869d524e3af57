#pragma once

// Synthetic ambiguous-author corpus generator.
//
// Authors are created in confusable pairs that share family and given name
// and differ in the middle name. Each author has a private pool of
// coauthors, one or two affiliations and a research topic; records draw
// from those pools, render the author's name through random variant
// operations and drop attributes at the configured rates. Positive pairs
// join two records of one author; negative pairs join records of different
// authors, sampled with a preference for similar names. Labels are ground
// truth by construction.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "namelink/error.hpp"
#include "namelink/random.hpp"
#include "namelink/records.hpp"
#include "namelink/string_metrics.hpp"
#include "namelink/text.hpp"

namespace namelink {

/// Negative pairs per positive pair in the reference corpus (26591 / 3946,
/// i.e. 12.93% positives).
inline constexpr double kReferenceNegativeRatio = 26591.0 / 3946.0;

enum class NameVariant { part_permutation, middle_edit, initialing, diacritics, typo };

inline constexpr std::array<NameVariant, 5> kAllNameVariants{
    NameVariant::part_permutation, NameVariant::middle_edit, NameVariant::initialing,
    NameVariant::diacritics, NameVariant::typo};

inline constexpr std::string_view name_variant_name(NameVariant v) noexcept {
    switch (v) {
    case NameVariant::part_permutation: return "permutation";
    case NameVariant::middle_edit: return "middle";
    case NameVariant::initialing: return "initials";
    case NameVariant::diacritics: return "diacritics";
    case NameVariant::typo: return "typo";
    }
    return "?";
}

inline NameVariant parse_name_variant(std::string_view s) {
    for (auto v : kAllNameVariants)
        if (name_variant_name(v) == s) return v;
    throw ConfigError("unknown name variant '" + std::string(s) + "'");
}

struct MissingnessRates {
    double coauthors = 0.05;
    double affiliation = 0.3;
    double paper_keywords = 0.15;
    double interest_keywords = 0.4;
};

struct SyntheticSpec {
    std::size_t n_authors = 10;
    std::size_t records_per_author = 20;
    /// 0 means every within-author pair. With the other defaults, 39 gives
    /// 390 positives and about 3000 pairs in total.
    std::size_t positive_pairs_per_author = 39;
    std::set<NameVariant> variant_ops{kAllNameVariants.begin(), kAllNameVariants.end()};
    /// Probability that each enabled variant op fires on a record.
    double variant_rate = 0.35;
    MissingnessRates missing;
    double negative_pair_ratio = kReferenceNegativeRatio;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_authors < 2) throw ConfigError("n_authors must be at least 2");
        if (records_per_author < 2) throw ConfigError("records_per_author must be at least 2");
        auto rate = [](double r, const char* what) {
            if (!(r >= 0.0 && r <= 1.0)) throw ConfigError(std::string(what) + " must be in [0,1]");
        };
        rate(variant_rate, "variant_rate");
        rate(missing.coauthors, "coauthor missingness");
        rate(missing.affiliation, "affiliation missingness");
        rate(missing.paper_keywords, "paper keyword missingness");
        rate(missing.interest_keywords, "interest keyword missingness");
        if (!(negative_pair_ratio >= 0.0) || !std::isfinite(negative_pair_ratio))
            throw ConfigError("negative_pair_ratio must be a finite non-negative number");
        const std::size_t within = records_per_author * (records_per_author - 1) / 2;
        if (positive_pairs_per_author > within)
            throw ConfigError("positive_pairs_per_author " + std::to_string(positive_pairs_per_author) +
                              " exceeds the " + std::to_string(within) +
                              " pairs available per author");
    }
};

namespace detail::synth {

struct NamePart {
    std::string_view ascii;
    std::string_view marked;
};

inline constexpr std::array<NamePart, 17> kFamilies{{
    {"Nguyen", "Nguyễn"}, {"Tran", "Trần"}, {"Le", "Lê"},     {"Pham", "Phạm"},  {"Hoang", "Hoàng"},
    {"Phan", "Phan"},     {"Vu", "Vũ"},     {"Dang", "Đặng"}, {"Bui", "Bùi"},    {"Do", "Đỗ"},
    {"Ho", "Hồ"},         {"Ngo", "Ngô"},   {"Duong", "Dương"}, {"Ly", "Lý"},    {"Cao", "Cao"},
    {"Ha", "Hà"},         {"Dinh", "Đinh"},
}};

inline constexpr std::array<NamePart, 13> kMiddles{{
    {"Van", "Văn"},   {"Thi", "Thị"},   {"Dinh", "Đình"}, {"Quang", "Quang"}, {"Anh", "Anh"},
    {"Ngoc", "Ngọc"}, {"Hoai", "Hoài"}, {"Tu", "Tú"},     {"Minh", "Minh"},   {"Duc", "Đức"},
    {"Thanh", "Thanh"}, {"Huu", "Hữu"}, {"Xuan", "Xuân"},
}};

inline constexpr std::array<NamePart, 24> kGivens{{
    {"Kiem", "Kiếm"},   {"Tru", "Trú"},   {"Dien", "Điền"}, {"Duc", "Đức"},   {"Thuy", "Thủy"},
    {"Bao", "Bảo"},     {"Duy", "Duy"},   {"Bac", "Bắc"},   {"Thanh", "Thành"}, {"Tuoi", "Tươi"},
    {"Hung", "Hùng"},   {"Tin", "Tín"},   {"Tien", "Tiến"}, {"Nghiep", "Nghiệp"}, {"Long", "Long"},
    {"Hai", "Hải"},     {"Nam", "Nam"},   {"Phuong", "Phương"}, {"Lan", "Lan"}, {"Mai", "Mai"},
    {"Son", "Sơn"},     {"Tam", "Tâm"},   {"Hoa", "Hòa"},   {"Khoa", "Khoa"},
}};

inline constexpr std::array<std::string_view, 10> kAffiliations{
    "University of Science, VNU-HCM",
    "University of Information Technology, VNU-HCM",
    "Hanoi University of Science and Technology",
    "University of Engineering and Technology, VNU Hanoi",
    "Japan Advanced Institute of Science and Technology",
    "Ho Chi Minh City University of Technology",
    "Institute of Information Technology, VAST",
    "Can Tho University",
    "Da Nang University of Technology",
    "Posts and Telecommunications Institute of Technology",
};

inline constexpr std::array<std::array<std::string_view, 8>, 8> kTopics{{
    {"search engine", "query expansion", "ranking", "indexing", "relevance feedback",
     "digital library", "text mining", "recommender system"},
    {"neural network", "support vector machine", "classification", "clustering", "deep learning",
     "feature selection", "ensemble learning", "bayesian inference"},
    {"machine translation", "part of speech tagging", "word segmentation", "parsing",
     "named entity recognition", "vietnamese language", "corpus", "sentiment analysis"},
    {"image segmentation", "object recognition", "face detection", "image retrieval",
     "video analysis", "feature extraction", "optical character recognition", "tracking"},
    {"association rules", "frequent patterns", "knowledge discovery", "data warehouse",
     "rough sets", "outlier detection", "time series", "graph mining"},
    {"wireless sensor network", "routing protocol", "network security", "cloud computing",
     "peer to peer", "quality of service", "mobile computing", "distributed systems"},
    {"software testing", "formal methods", "model checking", "uml", "requirements engineering",
     "software architecture", "program analysis", "agile development"},
    {"ontology", "semantic web", "description logic", "knowledge base", "reasoning",
     "expert system", "fuzzy logic", "multi agent system"},
}};

struct PersonName {
    std::size_t family = 0;
    std::optional<std::size_t> middle;
    std::size_t given = 0;
};

struct AuthorProfile {
    PersonName name;
    std::vector<std::string> coauthor_pool;
    std::vector<std::string> affiliations;
    std::size_t topic = 0;
    std::vector<std::string> interests;
};

inline std::size_t pick(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline bool chance(Rng& rng, double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

/// `count` distinct values from [0, n), in draw order.
inline std::vector<std::size_t> pick_distinct(Rng& rng, std::size_t n, std::size_t count) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(std::min(count, n));
    return all;
}

inline std::string render_plain(const PersonName& n) {
    std::string s(kFamilies[n.family].marked);
    if (n.middle) (s += ' ') += kMiddles[*n.middle].marked;
    (s += ' ') += kGivens[n.given].marked;
    return s;
}

inline PersonName random_person(Rng& rng) {
    PersonName n;
    n.family = pick(rng, kFamilies.size());
    if (chance(rng, 0.8)) n.middle = pick(rng, kMiddles.size());
    n.given = pick(rng, kGivens.size());
    return n;
}

/// One-character typo in `word`: substitution, deletion, insertion or
/// adjacent transposition, on ASCII letters only.
inline std::string typo(Rng& rng, std::string word) {
    if (word.size() < 2) return word;
    const std::size_t i = 1 + pick(rng, word.size() - 1);
    const char letter = static_cast<char>('a' + pick(rng, 26));
    switch (pick(rng, 4)) {
    case 0: word[i] = letter; break;
    case 1: word.erase(i, 1); break;
    case 2: word.insert(word.begin() + static_cast<std::ptrdiff_t>(i), letter); break;
    default:
        if (i + 1 < word.size()) std::swap(word[i], word[i + 1]);
        else std::swap(word[i - 1], word[i]);
        break;
    }
    return word;
}

/// Render an author's name for one record through the enabled variant ops.
inline std::string render_variant(Rng& rng, const PersonName& base, const SyntheticSpec& spec) {
    auto enabled = [&](NameVariant v) { return spec.variant_ops.contains(v); };
    auto fires = [&](NameVariant v) { return enabled(v) && chance(rng, spec.variant_rate); };

    const bool strip = fires(NameVariant::diacritics);
    auto part = [&](const NamePart& p) { return std::string(strip ? p.ascii : p.marked); };

    std::optional<std::size_t> middle_index = base.middle;
    if (fires(NameVariant::middle_edit))
        middle_index = middle_index ? std::nullopt : std::optional(pick(rng, kMiddles.size()));
    std::string family = part(kFamilies[base.family]);
    std::string given = part(kGivens[base.given]);
    std::optional<std::string> middle;
    if (middle_index) middle = part(kMiddles[*middle_index]);

    if (fires(NameVariant::typo)) {
        // Typos go into the mark-free spelling so the edit stays one character.
        switch (pick(rng, middle ? 3 : 2)) {
        case 0: family = typo(rng, std::string(kFamilies[base.family].ascii)); break;
        case 1: given = typo(rng, std::string(kGivens[base.given].ascii)); break;
        default: middle = typo(rng, std::string(kMiddles[*middle_index].ascii)); break;
        }
    }
    if (fires(NameVariant::initialing)) {
        auto initial = [](const std::string& w) {
            const std::u32string cps = decode_utf8(w);
            return encode_utf8(cps.substr(0, 1)) + ".";
        };
        if (middle && chance(rng, 0.5)) middle = initial(*middle);
        else given = initial(given);
    }

    std::vector<std::string> parts;
    if (fires(NameVariant::part_permutation)) {
        parts.push_back(given);
        if (middle) parts.push_back(*middle);
        parts.push_back(family);
    } else {
        parts.push_back(family);
        if (middle) parts.push_back(*middle);
        parts.push_back(given);
    }
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += ' ';
        out += p;
    }
    return out;
}

inline std::vector<AuthorProfile> make_authors(Rng& rng, std::size_t n_authors) {
    std::vector<AuthorProfile> authors(n_authors);
    std::set<std::string> used_names;
    auto fresh_coauthor = [&]() {
        for (;;) {
            std::string name = render_plain(random_person(rng));
            if (used_names.insert(name).second) return name;
        }
    };
    const auto families = pick_distinct(rng, kFamilies.size(), kFamilies.size());
    const auto givens = pick_distinct(rng, kGivens.size(), kGivens.size());
    for (std::size_t a = 0; a < n_authors; ++a) {
        auto& author = authors[a];
        const std::size_t group = a / 2;
        author.name.family = families[group % families.size()];
        author.name.given = givens[group % givens.size()];
        if (a % 2 == 0) {
            author.name.middle = pick(rng, kMiddles.size());
        } else {
            // Confusable twin: same family and given name, different or no middle.
            const auto twin = authors[a - 1].name.middle;
            if (chance(rng, 0.25)) {
                author.name.middle.reset();
            } else {
                std::size_t m = pick(rng, kMiddles.size() - 1);
                if (twin && m >= *twin) ++m;
                author.name.middle = m;
            }
        }
        used_names.insert(render_plain(author.name));
        author.topic = pick(rng, kTopics.size());
        const std::size_t n_aff = 1 + pick(rng, 2);
        for (std::size_t i : pick_distinct(rng, kAffiliations.size(), n_aff))
            author.affiliations.emplace_back(kAffiliations[i]);
        for (std::size_t i : pick_distinct(rng, kTopics[author.topic].size(), 4))
            author.interests.emplace_back(kTopics[author.topic][i]);
    }
    for (auto& author : authors)
        for (int i = 0; i < 6; ++i) author.coauthor_pool.push_back(fresh_coauthor());
    return authors;
}

inline PublicationRecord make_record(Rng& rng, const AuthorProfile& author,
                                     const std::vector<AuthorProfile>& all, const SyntheticSpec& spec,
                                     std::string id) {
    PublicationRecord r;
    r.record_id = std::move(id);
    r.author_name = render_variant(rng, author.name, spec);

    if (!chance(rng, spec.missing.coauthors)) {
        const std::size_t n = 2 + pick(rng, 3);
        for (std::size_t i : pick_distinct(rng, author.coauthor_pool.size(), n))
            r.coauthors.push_back(author.coauthor_pool[i]);
        if (chance(rng, 0.1)) {
            // Occasional collaboration outside the usual circle.
            const auto& other = all[pick(rng, all.size())];
            r.coauthors.push_back(other.coauthor_pool[pick(rng, other.coauthor_pool.size())]);
        }
        std::shuffle(r.coauthors.begin(), r.coauthors.end(), rng);
    }
    if (!chance(rng, spec.missing.affiliation))
        r.affiliation = author.affiliations[pick(rng, author.affiliations.size())];
    if (!chance(rng, spec.missing.paper_keywords)) {
        std::vector<std::string> kw;
        const auto& topic = kTopics[author.topic];
        for (std::size_t i : pick_distinct(rng, topic.size(), 2 + pick(rng, 3)))
            kw.emplace_back(topic[i]);
        if (chance(rng, 0.3)) {
            const auto& other = kTopics[pick(rng, kTopics.size())];
            kw.emplace_back(other[pick(rng, other.size())]);
        }
        std::sort(kw.begin(), kw.end());
        kw.erase(std::unique(kw.begin(), kw.end()), kw.end());
        r.paper_keywords = std::move(kw);
    }
    if (!chance(rng, spec.missing.interest_keywords)) r.interest_keywords = author.interests;
    return r;
}

inline std::string record_id(std::size_t author, std::size_t index) {
    std::string a = std::to_string(author);
    std::string i = std::to_string(index);
    return "a" + std::string(a.size() < 3 ? 3 - a.size() : 0, '0') + a + "-r" +
           std::string(i.size() < 4 ? 4 - i.size() : 0, '0') + i;
}

} // namespace detail::synth

/// Generate records (raw, unnormalized text) and labeled pairs. Pairs are
/// shuffled; the same spec always produces the same dataset.
inline PairDataset generate_synthetic(const SyntheticSpec& spec) {
    using namespace detail::synth;
    spec.validate();
    Rng rng(derive_seed(spec.seed, {0x5E7}));

    const auto authors = make_authors(rng, spec.n_authors);
    std::vector<std::vector<std::string>> ids(spec.n_authors);
    PairDataset ds;
    for (std::size_t a = 0; a < spec.n_authors; ++a) {
        for (std::size_t j = 0; j < spec.records_per_author; ++j) {
            PublicationRecord r = make_record(rng, authors[a], authors, spec, record_id(a, j));
            ids[a].push_back(r.record_id);
            ds.records.emplace(r.record_id, std::move(r));
        }
    }

    // Positive pairs.
    const std::size_t rpa = spec.records_per_author;
    std::vector<std::pair<std::string, std::string>> positives;
    for (std::size_t a = 0; a < spec.n_authors; ++a) {
        std::vector<std::pair<std::size_t, std::size_t>> within;
        for (std::size_t i = 0; i < rpa; ++i)
            for (std::size_t j = i + 1; j < rpa; ++j) within.emplace_back(i, j);
        if (spec.positive_pairs_per_author > 0) {
            std::shuffle(within.begin(), within.end(), rng);
            within.resize(spec.positive_pairs_per_author);
        }
        for (auto [i, j] : within) positives.emplace_back(ids[a][i], ids[a][j]);
    }

    // Negative pairs, weighted towards similar names: Efraimidis-Spirakis
    // keys u^(1/w) with w = 0.05 + sim^2, top keys win.
    const auto n_neg = static_cast<std::size_t>(
        std::llround(static_cast<double>(positives.size()) * spec.negative_pair_ratio));
    std::vector<std::vector<std::string>> name_tokens(spec.n_authors * rpa);
    for (std::size_t a = 0; a < spec.n_authors; ++a)
        for (std::size_t j = 0; j < rpa; ++j)
            name_tokens[a * rpa + j] = split_tokens(normalize_text(ds.records.at(ids[a][j]).author_name));

    struct Candidate {
        double key;
        std::size_t left;
        std::size_t right;
    };
    std::vector<Candidate> candidates;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t x = 0; x < name_tokens.size(); ++x)
        for (std::size_t y = x + 1; y < name_tokens.size(); ++y) {
            if (x / rpa == y / rpa) continue;
            const double sim = monge_elkan(name_tokens[x], name_tokens[y]);
            const double w = 0.05 + sim * sim;
            const double u = std::max(unit(rng), 1e-300);
            candidates.push_back({std::log(u) / w, x, y});
        }
    if (n_neg > candidates.size())
        throw ConfigError("spec requests " + std::to_string(n_neg) + " negative pairs but only " +
                          std::to_string(candidates.size()) + " cross-author pairs exist");
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n_neg),
                      candidates.end(), [](const Candidate& a, const Candidate& b) {
                          if (a.key != b.key) return a.key > b.key;
                          return std::pair{a.left, a.right} < std::pair{b.left, b.right};
                      });

    for (const auto& [l, r] : positives) ds.pairs.push_back({l, r, 1});
    for (std::size_t k = 0; k < n_neg; ++k) {
        const auto& c = candidates[k];
        ds.pairs.push_back({ids[c.left / rpa][c.left % rpa], ids[c.right / rpa][c.right % rpa], 0});
    }
    std::shuffle(ds.pairs.begin(), ds.pairs.end(), rng);
    for (auto& p : ds.pairs)
        if (chance(rng, 0.5)) std::swap(p.left_id, p.right_id);

    ds.provenance = "synthetic seed=" + std::to_string(spec.seed);
    return ds;
}

} // namespace namelink
