#pragma once

// Publication records, labeled record pairs, and their file formats.
//
// Records file: JSON Lines, one object per line:
//   {"record_id": "...", "author_name": "...", "coauthors": [...],
//    "affiliation": "..." | null, "paper_keywords": [...] | null,
//    "interest_keywords": [...] | null}
// Pairs file: CSV with header `left_id,right_id,label`; label is 0, 1 or empty.

#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "namelink/error.hpp"
#include "namelink/io.hpp"
#include "namelink/text.hpp"

namespace namelink {

struct PublicationRecord {
    std::string record_id;
    std::string author_name;
    std::vector<std::string> coauthors;
    std::optional<std::string> affiliation;
    std::optional<std::vector<std::string>> paper_keywords;
    std::optional<std::vector<std::string>> interest_keywords;

    bool operator==(const PublicationRecord&) const = default;
};

using RecordMap = std::map<std::string, PublicationRecord, std::less<>>;

struct LabeledPair {
    std::string left_id;
    std::string right_id;
    std::optional<int> label;

    bool operator==(const LabeledPair&) const = default;
};

/// Canonical key of an unordered pair: smaller id first.
struct PairKey {
    std::string first;
    std::string second;

    auto operator<=>(const PairKey&) const = default;
};

inline PairKey pair_key(std::string_view left_id, std::string_view right_id) {
    if (left_id == right_id)
        throw IntegrityError("a pair must join two distinct records, got '" +
                             std::string(left_id) + "' twice");
    if (right_id < left_id) std::swap(left_id, right_id);
    return {std::string(left_id), std::string(right_id)};
}

struct ClassCounts {
    std::size_t negative = 0;
    std::size_t positive = 0;
    std::size_t unlabeled = 0;

    std::size_t labeled() const noexcept { return negative + positive; }
    bool operator==(const ClassCounts&) const = default;
};

struct PairDataset {
    RecordMap records;
    std::vector<LabeledPair> pairs;
    std::string provenance;

    ClassCounts class_counts() const {
        ClassCounts c;
        for (const auto& p : pairs) {
            if (!p.label) ++c.unlabeled;
            else if (*p.label == 1) ++c.positive;
            else ++c.negative;
        }
        return c;
    }

    const PublicationRecord& record(std::string_view id) const {
        auto it = records.find(id);
        if (it == records.end()) throw IntegrityError("unknown record id '" + std::string(id) + "'");
        return it->second;
    }
};

namespace detail {

inline std::optional<std::string> normalize_optional(const std::optional<std::string>& s) {
    if (!s) return std::nullopt;
    std::string n = normalize_text(*s);
    if (n.empty()) return std::nullopt;
    return n;
}

inline std::vector<std::string> normalize_list(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    out.reserve(items.size());
    for (const auto& item : items) {
        std::string n = normalize_text(item);
        if (!n.empty()) out.push_back(std::move(n));
    }
    return out;
}

inline std::optional<std::vector<std::string>> normalize_optional_list(
    const std::optional<std::vector<std::string>>& items) {
    if (!items) return std::nullopt;
    auto out = normalize_list(*items);
    if (out.empty()) return std::nullopt;
    return out;
}

} // namespace detail

/// Text attributes normalized; empty optional attributes become missing.
inline PublicationRecord normalize_record(const PublicationRecord& raw) {
    PublicationRecord r;
    r.record_id = raw.record_id;
    r.author_name = normalize_text(raw.author_name);
    r.coauthors = detail::normalize_list(raw.coauthors);
    r.affiliation = detail::normalize_optional(raw.affiliation);
    r.paper_keywords = detail::normalize_optional_list(raw.paper_keywords);
    r.interest_keywords = detail::normalize_optional_list(raw.interest_keywords);
    return r;
}

inline nlohmann::json record_to_json(const PublicationRecord& r) {
    nlohmann::json j;
    j["record_id"] = r.record_id;
    j["author_name"] = r.author_name;
    j["coauthors"] = r.coauthors;
    j["affiliation"] = r.affiliation ? nlohmann::json(*r.affiliation) : nlohmann::json(nullptr);
    j["paper_keywords"] =
        r.paper_keywords ? nlohmann::json(*r.paper_keywords) : nlohmann::json(nullptr);
    j["interest_keywords"] =
        r.interest_keywords ? nlohmann::json(*r.interest_keywords) : nlohmann::json(nullptr);
    return j;
}

/// Parse one JSON Lines record. Throws ParseError on schema violations.
inline PublicationRecord record_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("record must be a JSON object");
    auto required_string = [&](const char* key) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string())
            throw ParseError(std::string("field '") + key + "' must be a string");
        return it->get<std::string>();
    };
    auto string_list = [&](const nlohmann::json& v, const char* key) {
        if (!v.is_array()) throw ParseError(std::string("field '") + key + "' must be an array");
        std::vector<std::string> out;
        for (const auto& e : v) {
            if (!e.is_string())
                throw ParseError(std::string("field '") + key + "' must contain only strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    };
    auto optional_list = [&](const char* key) -> std::optional<std::vector<std::string>> {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) return std::nullopt;
        return string_list(*it, key);
    };

    PublicationRecord r;
    r.record_id = required_string("record_id");
    r.author_name = required_string("author_name");
    if (auto co = j.find("coauthors"); co != j.end() && !co->is_null())
        r.coauthors = string_list(*co, "coauthors");
    if (auto it = j.find("affiliation"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw ParseError("field 'affiliation' must be a string or null");
        r.affiliation = it->get<std::string>();
    }
    r.paper_keywords = optional_list("paper_keywords");
    r.interest_keywords = optional_list("interest_keywords");
    return r;
}

/// Read a records stream; every textual attribute is normalized and ids are
/// checked for uniqueness. `source` names the stream in error messages.
inline std::vector<PublicationRecord> parse_records(std::istream& in,
                                                    const std::string& source = "<records>") {
    std::vector<PublicationRecord> out;
    std::map<std::string, size_t, std::less<>> first_line;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (detail::is_blank(line)) continue;
        PublicationRecord raw;
        try {
            raw = record_from_json(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(source + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError(source + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (raw.record_id.empty())
            throw IntegrityError(source + ":" + std::to_string(line_no) + ": empty record_id");
        if (raw.record_id.find_first_of(",\r\n") != std::string::npos)
            throw IntegrityError(source + ":" + std::to_string(line_no) +
                                 ": record_id may not contain commas or line breaks");
        PublicationRecord rec = normalize_record(raw);
        if (rec.author_name.empty())
            throw IntegrityError(source + ":" + std::to_string(line_no) + ": empty author_name");
        auto [it, inserted] = first_line.emplace(rec.record_id, line_no);
        if (!inserted)
            throw IntegrityError(source + ": duplicate record_id '" + rec.record_id + "' on lines " +
                                 std::to_string(it->second) + " and " + std::to_string(line_no));
        out.push_back(std::move(rec));
    }
    return out;
}

inline std::vector<PublicationRecord> load_records(const std::string& path) {
    auto in = detail::open_input(path);
    return parse_records(in, path);
}

inline RecordMap index_records(std::vector<PublicationRecord> records) {
    RecordMap map;
    for (auto& r : records) {
        std::string id = r.record_id;
        if (!map.emplace(id, std::move(r)).second)
            throw IntegrityError("duplicate record_id '" + id + "'");
    }
    return map;
}

inline void write_records(std::ostream& out, const RecordMap& records) {
    for (const auto& [id, r] : records) out << record_to_json(r).dump() << '\n';
}

inline void write_records(std::ostream& out, const std::vector<PublicationRecord>& records) {
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

inline void save_records(const std::string& path, const RecordMap& records) {
    auto out = detail::open_output(path);
    write_records(out, records);
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline constexpr std::string_view kPairsHeader = "left_id,right_id,label";

/// Read pair rows without resolving ids. Rejects self pairs, duplicate
/// unordered pairs and labels outside {0, 1}.
inline std::vector<LabeledPair> parse_pairs(std::istream& in,
                                            const std::string& source = "<pairs>") {
    std::vector<LabeledPair> pairs;
    std::map<PairKey, size_t> seen;
    std::string line;
    size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (!header_seen) {
            if (detail::is_blank(line)) continue;
            if (line != kPairsHeader)
                throw ParseError(source + ":" + std::to_string(line_no) + ": expected header '" +
                                 std::string(kPairsHeader) + "'");
            header_seen = true;
            continue;
        }
        if (detail::is_blank(line)) continue;
        const auto fields = detail::split_csv_line(line);
        const std::string where = source + ":" + std::to_string(line_no) + ": ";
        if (fields.size() != 3)
            throw ParseError(where + "expected 3 fields, got " + std::to_string(fields.size()));
        LabeledPair p{fields[0], fields[1], std::nullopt};
        if (p.left_id.empty() || p.right_id.empty()) throw ParseError(where + "empty record id");
        if (fields[2] == "0") p.label = 0;
        else if (fields[2] == "1") p.label = 1;
        else if (!fields[2].empty())
            throw IntegrityError(where + "label '" + fields[2] + "' is outside {0,1}");
        PairKey key;
        try {
            key = pair_key(p.left_id, p.right_id);
        } catch (const IntegrityError& e) {
            throw IntegrityError(where + e.what());
        }
        auto [it, inserted] = seen.emplace(key, line_no);
        if (!inserted)
            throw IntegrityError(where + "duplicate pair (" + key.first + "," + key.second +
                                 "), first seen on line " + std::to_string(it->second));
        pairs.push_back(std::move(p));
    }
    return pairs;
}

inline void check_pairs_resolve(const std::vector<LabeledPair>& pairs, const RecordMap& records) {
    for (const auto& p : pairs)
        for (const auto* id : {&p.left_id, &p.right_id})
            if (!records.contains(*id))
                throw IntegrityError("pair (" + p.left_id + "," + p.right_id +
                                     ") references unknown record id '" + *id + "'");
}

inline PairDataset load_labeled_pairs(const std::string& path, RecordMap records) {
    auto in = detail::open_input(path);
    PairDataset ds;
    ds.pairs = parse_pairs(in, path);
    check_pairs_resolve(ds.pairs, records);
    ds.records = std::move(records);
    ds.provenance = "pairs=" + path;
    return ds;
}

inline void write_pairs(std::ostream& out, const std::vector<LabeledPair>& pairs) {
    out << kPairsHeader << '\n';
    for (const auto& p : pairs) {
        out << p.left_id << ',' << p.right_id << ',';
        if (p.label) out << *p.label;
        out << '\n';
    }
}

inline void save_pairs(const std::string& path, const std::vector<LabeledPair>& pairs) {
    auto out = detail::open_output(path);
    write_pairs(out, pairs);
    if (!out) throw IoError("failed writing '" + path + "'");
}

/// Records and pairs in one step.
inline PairDataset load_dataset(const std::string& records_path, const std::string& pairs_path) {
    PairDataset ds = load_labeled_pairs(pairs_path, index_records(load_records(records_path)));
    ds.provenance = "records=" + records_path + "; " + ds.provenance;
    return ds;
}

} // namespace namelink
