#pragma once

// The basic feature vector of a record pair: six similarity measures over
// five record attributes, attribute-major.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "namelink/error.hpp"
#include "namelink/io.hpp"
#include "namelink/records.hpp"
#include "namelink/string_metrics.hpp"

namespace namelink {

enum class Attribute { author_name, coauthors, affiliation, paper_keywords, interest_keywords };

inline constexpr std::array<Attribute, 5> kAllAttributes{
    Attribute::author_name, Attribute::coauthors, Attribute::affiliation,
    Attribute::paper_keywords, Attribute::interest_keywords};

inline constexpr std::string_view attribute_name(Attribute a) noexcept {
    switch (a) {
    case Attribute::author_name: return "author_name";
    case Attribute::coauthors: return "coauthors";
    case Attribute::affiliation: return "affiliation";
    case Attribute::paper_keywords: return "paper_keywords";
    case Attribute::interest_keywords: return "interest_keywords";
    }
    return "?";
}

inline constexpr int kFeatureSchemaVersion = 1;
inline constexpr std::size_t kFeatureCount = kAllAttributes.size() * kAllMeasures.size();

/// Value assigned to all six features of an attribute missing on either side.
inline constexpr double kMissingFeatureValue = 0.0;

struct FeatureSchema {
    std::vector<std::string> attributes;
    std::vector<std::string> measures;
    int version = kFeatureSchemaVersion;

    std::size_t size() const noexcept { return attributes.size() * measures.size(); }

    /// `<attribute>.<measure>` in layout order.
    std::vector<std::string> column_names() const {
        std::vector<std::string> out;
        out.reserve(size());
        for (const auto& a : attributes)
            for (const auto& m : measures) out.push_back(a + "." + m);
        return out;
    }

    bool operator==(const FeatureSchema&) const = default;

    static FeatureSchema basic() {
        FeatureSchema s;
        for (Attribute a : kAllAttributes) s.attributes.emplace_back(attribute_name(a));
        for (Measure m : kAllMeasures) s.measures.emplace_back(measure_name(m));
        return s;
    }
};

inline constexpr std::size_t feature_index(Attribute a, Measure m) noexcept {
    return static_cast<std::size_t>(a) * kAllMeasures.size() + static_cast<std::size_t>(m);
}

struct FeatureVector {
    std::array<double, kFeatureCount> values{};
    int schema_version = kFeatureSchemaVersion;

    double operator[](std::size_t i) const noexcept { return values[i]; }
    double at(std::size_t i) const { return values.at(i); }
    double at(Attribute a, Measure m) const noexcept { return values[feature_index(a, m)]; }
    std::span<const double> span() const noexcept { return values; }

    bool operator==(const FeatureVector&) const = default;
};

struct LabeledFeatures {
    FeatureSchema schema = FeatureSchema::basic();
    std::vector<FeatureVector> vectors;
    std::vector<int> labels;

    std::size_t size() const noexcept { return vectors.size(); }
};

namespace detail {

// One attribute prepared for comparison: the token sequence for the
// token-level measures and the string for the character-level ones.
struct AttributeView {
    std::vector<std::string> tokens;
    std::u32string text;
};

inline std::optional<AttributeView> view_scalar(const std::optional<std::string>& value) {
    if (!value || value->empty()) return std::nullopt;
    return AttributeView{split_tokens(*value), decode_utf8(*value)};
}

inline std::optional<AttributeView> view_list(const std::vector<std::string>* items) {
    if (items == nullptr || items->empty()) return std::nullopt;
    AttributeView v;
    for (const auto& item : *items) {
        auto t = split_tokens(item);
        v.tokens.insert(v.tokens.end(), t.begin(), t.end());
    }
    std::sort(v.tokens.begin(), v.tokens.end());
    v.tokens.erase(std::unique(v.tokens.begin(), v.tokens.end()), v.tokens.end());
    if (v.tokens.empty()) return std::nullopt;

    std::vector<std::string> sorted = *items;
    std::sort(sorted.begin(), sorted.end());
    std::string joined;
    for (const auto& s : sorted) {
        if (!joined.empty()) joined += ' ';
        joined += s;
    }
    v.text = decode_utf8(joined);
    return v;
}

inline std::optional<AttributeView> view_attribute(const PublicationRecord& r, Attribute a) {
    switch (a) {
    case Attribute::author_name: return view_scalar(r.author_name);
    case Attribute::coauthors: return view_list(&r.coauthors);
    case Attribute::affiliation: return view_scalar(r.affiliation);
    case Attribute::paper_keywords: return view_list(r.paper_keywords ? &*r.paper_keywords : nullptr);
    case Attribute::interest_keywords:
        return view_list(r.interest_keywords ? &*r.interest_keywords : nullptr);
    }
    return std::nullopt;
}

} // namespace detail

/// Feature vector of a pair of normalized records. Symmetric in its
/// arguments. Attributes that are missing (or empty) on either side get
/// kMissingFeatureValue for all six measures.
inline FeatureVector featurize_pair(const PublicationRecord& left, const PublicationRecord& right) {
    FeatureVector fv;
    for (Attribute attr : kAllAttributes) {
        const auto l = detail::view_attribute(left, attr);
        const auto r = detail::view_attribute(right, attr);
        for (Measure m : kAllMeasures) {
            double v = kMissingFeatureValue;
            if (l && r) {
                switch (m) {
                case Measure::jaccard: v = jaccard_sim(TokenSet(l->tokens), TokenSet(r->tokens)); break;
                case Measure::monge_elkan: v = monge_elkan(l->tokens, r->tokens); break;
                default: v = character_similarity(m, l->text, r->text); break;
                }
            }
            fv.values[feature_index(attr, m)] = v;
        }
    }
    return fv;
}

/// One vector per pair, input order, labels ignored.
inline std::vector<FeatureVector> featurize_pairs(const PairDataset& dataset) {
    std::vector<FeatureVector> out;
    out.reserve(dataset.pairs.size());
    for (const auto& p : dataset.pairs)
        out.push_back(featurize_pair(dataset.record(p.left_id), dataset.record(p.right_id)));
    return out;
}

/// Vectors plus labels; every pair must be labeled.
inline LabeledFeatures featurize_dataset(const PairDataset& dataset) {
    LabeledFeatures out;
    out.vectors = featurize_pairs(dataset);
    out.labels.reserve(dataset.pairs.size());
    for (const auto& p : dataset.pairs) {
        if (!p.label)
            throw IntegrityError("pair (" + p.left_id + "," + p.right_id + ") is unlabeled");
        out.labels.push_back(*p.label);
    }
    return out;
}

// Feature CSV: a `# feature-schema-version: N` line, then a header of the
// schema's column names plus `label`, then one row per pair. Values are
// written with 17 significant digits so they reload exactly.

inline constexpr std::string_view kSchemaVersionPrefix = "# feature-schema-version: ";

inline void write_feature_csv(std::ostream& out, const FeatureSchema& schema,
                              std::span<const FeatureVector> vectors,
                              std::span<const std::optional<int>> labels) {
    if (vectors.size() != labels.size()) throw Error("feature/label count mismatch");
    out << kSchemaVersionPrefix << schema.version << '\n';
    for (const auto& c : schema.column_names()) out << c << ',';
    out << "label\n";
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (double v : vectors[i].values) out << format_double(v) << ',';
        if (labels[i]) out << *labels[i];
        out << '\n';
    }
}

inline void write_feature_csv(std::ostream& out, const LabeledFeatures& data) {
    std::vector<std::optional<int>> labels(data.labels.begin(), data.labels.end());
    write_feature_csv(out, data.schema, data.vectors, labels);
}

struct FeatureTable {
    FeatureSchema schema = FeatureSchema::basic();
    std::vector<FeatureVector> vectors;
    std::vector<std::optional<int>> labels;

    /// All rows must be labeled.
    LabeledFeatures labeled() const {
        LabeledFeatures out;
        out.schema = schema;
        out.vectors = vectors;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (!labels[i]) throw IntegrityError("feature row " + std::to_string(i + 1) + " is unlabeled");
            out.labels.push_back(*labels[i]);
        }
        return out;
    }
};

/// Read a feature CSV. A schema version other than the current one is
/// reported as CompatibilityError; a header that does not match the basic
/// layout is a ParseError.
inline FeatureTable parse_feature_csv(std::istream& in, const std::string& source = "<features>") {
    FeatureTable table;
    std::string line;
    std::size_t line_no = 0;
    auto where = [&] { return source + ":" + std::to_string(line_no) + ": "; };

    int version = kFeatureSchemaVersion;
    bool header_seen = false;
    const FeatureSchema expected = FeatureSchema::basic();
    std::string expected_header;
    for (const auto& c : expected.column_names()) expected_header += c + ",";
    expected_header += "label";

    while (std::getline(in, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (!header_seen) {
            if (line.starts_with(kSchemaVersionPrefix)) {
                const std::string v = line.substr(kSchemaVersionPrefix.size());
                auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), version);
                if (ec != std::errc{} || ptr != v.data() + v.size())
                    throw ParseError(where() + "bad schema version '" + v + "'");
                if (version != kFeatureSchemaVersion)
                    throw CompatibilityError(source + ": feature schema version " +
                                             std::to_string(version) + " is not supported (expected " +
                                             std::to_string(kFeatureSchemaVersion) + ")");
                continue;
            }
            if (line != expected_header) throw ParseError(where() + "unexpected feature header");
            header_seen = true;
            continue;
        }
        if (detail::is_blank(line)) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != kFeatureCount + 1)
            throw ParseError(where() + "expected " + std::to_string(kFeatureCount + 1) +
                             " fields, got " + std::to_string(fields.size()));
        FeatureVector fv;
        fv.schema_version = version;
        for (std::size_t i = 0; i < kFeatureCount; ++i) fv.values[i] = parse_double(fields[i], where());
        std::optional<int> label;
        if (fields.back() == "0") label = 0;
        else if (fields.back() == "1") label = 1;
        else if (!fields.back().empty())
            throw IntegrityError(where() + "label '" + fields.back() + "' is outside {0,1}");
        table.vectors.push_back(fv);
        table.labels.push_back(label);
    }
    if (!header_seen) throw ParseError(source + ": missing feature header");
    table.schema.version = version;
    return table;
}

inline FeatureTable load_feature_csv(const std::string& path) {
    auto in = detail::open_input(path);
    return parse_feature_csv(in, path);
}

} // namespace namelink
