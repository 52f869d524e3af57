#pragma once

// Unit-interval string similarity measures.
//
// Character-level measures (Levenshtein, Jaro, Jaro-Winkler, Smith-Waterman)
// compare Unicode code points; the std::string_view overloads decode UTF-8.
// Token-level measures (Jaccard, Monge-Elkan) compare whole tokens.
// Every measure returns a value in [0, 1] and is symmetric in its arguments.
// Inputs are expected to have been through normalize_text already; nothing
// here folds case or strips marks.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "namelink/error.hpp"
#include "namelink/text.hpp"

namespace namelink {

enum class Measure { jaccard, levenshtein, jaro, jaro_winkler, smith_waterman, monge_elkan };

inline constexpr std::array<Measure, 6> kAllMeasures{
    Measure::jaccard,     Measure::levenshtein,    Measure::jaro,
    Measure::jaro_winkler, Measure::smith_waterman, Measure::monge_elkan};

inline constexpr std::string_view measure_name(Measure m) noexcept {
    switch (m) {
    case Measure::jaccard: return "jaccard";
    case Measure::levenshtein: return "levenshtein";
    case Measure::jaro: return "jaro";
    case Measure::jaro_winkler: return "jaro_winkler";
    case Measure::smith_waterman: return "smith_waterman";
    case Measure::monge_elkan: return "monge_elkan";
    }
    return "?";
}

inline Measure parse_measure(std::string_view name) {
    for (Measure m : kAllMeasures)
        if (measure_name(m) == name) return m;
    throw ConfigError("unknown similarity measure '" + std::string(name) + "'");
}

/// True for measures defined on a pair of strings (usable as a Monge-Elkan inner metric).
inline constexpr bool is_character_measure(Measure m) noexcept {
    return m == Measure::levenshtein || m == Measure::jaro || m == Measure::jaro_winkler ||
           m == Measure::smith_waterman;
}

/// Local alignment scoring scheme. Linear gap cost.
struct AlignmentParams {
    double match_score = 1.0;
    double mismatch_penalty = -1.0;
    double gap_penalty = -1.0;

    void validate() const {
        if (!(match_score > 0.0)) throw ConfigError("alignment match_score must be > 0");
        if (!(mismatch_penalty <= 0.0)) throw ConfigError("alignment mismatch_penalty must be <= 0");
        if (!(gap_penalty <= 0.0)) throw ConfigError("alignment gap_penalty must be <= 0");
    }
};

/// Set of non-empty tokens, stored sorted and unique.
class TokenSet {
public:
    TokenSet() = default;

    explicit TokenSet(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
        std::erase_if(tokens_, [](const std::string& t) { return t.empty(); });
        std::sort(tokens_.begin(), tokens_.end());
        tokens_.erase(std::unique(tokens_.begin(), tokens_.end()), tokens_.end());
    }

    static TokenSet from_text(std::string_view text) { return TokenSet(split_tokens(text)); }

    size_t size() const noexcept { return tokens_.size(); }
    bool empty() const noexcept { return tokens_.empty(); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }

private:
    std::vector<std::string> tokens_;
};

namespace detail {

inline double clamp_unit(double v) noexcept { return std::clamp(v, 0.0, 1.0); }

/// Unit-cost edit distance, two-row dynamic program.
inline size_t edit_distance(std::u32string_view a, std::u32string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (size_t j = 1; j <= b.size(); ++j) {
            const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// Greedy Jaro matching is not symmetric for every input, so operands are put
// in a canonical order first.
inline void canonical_order(std::u32string_view& a, std::u32string_view& b) noexcept {
    if (a.size() > b.size() || (a.size() == b.size() && a > b)) std::swap(a, b);
}

} // namespace detail

inline double levenshtein_sim(std::u32string_view a, std::u32string_view b) {
    if (a.empty() && b.empty()) return 1.0;
    const double d = static_cast<double>(detail::edit_distance(a, b));
    return detail::clamp_unit(1.0 - d / static_cast<double>(std::max(a.size(), b.size())));
}

inline double levenshtein_sim(std::string_view a, std::string_view b) {
    return levenshtein_sim(decode_utf8(a), decode_utf8(b));
}

inline double jaro(std::u32string_view a, std::u32string_view b) {
    if (a.empty() && b.empty()) return 1.0;
    if (a.empty() || b.empty()) return 0.0;
    detail::canonical_order(a, b);

    const size_t longest = std::max(a.size(), b.size());
    const size_t window = longest / 2 > 0 ? longest / 2 - 1 : 0;

    std::vector<char> a_matched(a.size(), 0), b_matched(b.size(), 0);
    size_t matches = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        const size_t lo = i > window ? i - window : 0;
        const size_t hi = std::min(b.size(), i + window + 1);
        for (size_t j = lo; j < hi; ++j) {
            if (!b_matched[j] && a[i] == b[j]) {
                a_matched[i] = b_matched[j] = 1;
                ++matches;
                break;
            }
        }
    }
    if (matches == 0) return 0.0;

    size_t half_transpositions = 0;
    for (size_t i = 0, j = 0; i < a.size(); ++i) {
        if (!a_matched[i]) continue;
        while (!b_matched[j]) ++j;
        if (a[i] != b[j]) ++half_transpositions;
        ++j;
    }
    const double m = static_cast<double>(matches);
    const double t = static_cast<double>(half_transpositions) / 2.0;
    const double sim = (m / static_cast<double>(a.size()) + m / static_cast<double>(b.size()) +
                        (m - t) / m) / 3.0;
    return detail::clamp_unit(sim);
}

inline double jaro(std::string_view a, std::string_view b) {
    return jaro(decode_utf8(a), decode_utf8(b));
}

/// Winkler prefix boost: p = 0.1, common prefix capped at 4, applied at any Jaro value.
inline double jaro_winkler(std::u32string_view a, std::u32string_view b) {
    constexpr double kScaling = 0.1;
    constexpr size_t kMaxPrefix = 4;
    const double j = jaro(a, b);
    size_t prefix = 0;
    while (prefix < kMaxPrefix && prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix])
        ++prefix;
    return detail::clamp_unit(j + static_cast<double>(prefix) * kScaling * (1.0 - j));
}

inline double jaro_winkler(std::string_view a, std::string_view b) {
    return jaro_winkler(decode_utf8(a), decode_utf8(b));
}

inline double jaccard_sim(const TokenSet& a, const TokenSet& b) {
    if (a.empty() && b.empty()) return 1.0;
    const auto& x = a.tokens();
    const auto& y = b.tokens();
    size_t common = 0;
    for (size_t i = 0, j = 0; i < x.size() && j < y.size();) {
        if (x[i] < y[j]) {
            ++i;
        } else if (y[j] < x[i]) {
            ++j;
        } else {
            ++common;
            ++i;
            ++j;
        }
    }
    const size_t uni = x.size() + y.size() - common;
    return static_cast<double>(common) / static_cast<double>(uni);
}

/// Best local alignment score divided by match_score * min(|a|, |b|).
inline double smith_waterman_sim(std::u32string_view a, std::u32string_view b,
                                 const AlignmentParams& params = {}) {
    params.validate();
    if (a.empty() || b.empty()) return 0.0;
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<double> prev(b.size() + 1, 0.0), cur(b.size() + 1, 0.0);
    double best = 0.0;
    for (size_t i = 1; i <= a.size(); ++i) {
        cur[0] = 0.0;
        for (size_t j = 1; j <= b.size(); ++j) {
            const double diag =
                prev[j - 1] + (a[i - 1] == b[j - 1] ? params.match_score : params.mismatch_penalty);
            const double up = prev[j] + params.gap_penalty;
            const double left = cur[j - 1] + params.gap_penalty;
            cur[j] = std::max({0.0, diag, up, left});
            best = std::max(best, cur[j]);
        }
        std::swap(prev, cur);
    }
    return detail::clamp_unit(best / (params.match_score * static_cast<double>(b.size())));
}

inline double smith_waterman_sim(std::string_view a, std::string_view b,
                                 const AlignmentParams& params = {}) {
    return smith_waterman_sim(decode_utf8(a), decode_utf8(b), params);
}

/// Dispatch a character-level measure by id.
inline double character_similarity(Measure m, std::u32string_view a, std::u32string_view b) {
    switch (m) {
    case Measure::levenshtein: return levenshtein_sim(a, b);
    case Measure::jaro: return jaro(a, b);
    case Measure::jaro_winkler: return jaro_winkler(a, b);
    case Measure::smith_waterman: return smith_waterman_sim(a, b);
    default: break;
    }
    throw ConfigError("'" + std::string(measure_name(m)) + "' is not a character-level measure");
}

/// Symmetrized Monge-Elkan: the mean of both directed scores
/// me(a, b) = (1/|a|) * sum_i max_j inner(a_i, b_j).
/// Tokens are sorted before summation so the result does not depend on
/// token order, bit for bit.
inline double monge_elkan(std::span<const std::string> a, std::span<const std::string> b,
                          Measure inner = Measure::jaro_winkler) {
    if (!is_character_measure(inner))
        throw ConfigError("monge_elkan inner measure must be character-level, got '" +
                          std::string(measure_name(inner)) + "'");
    if (a.empty() || b.empty()) return 0.0;

    auto decode_sorted = [](std::span<const std::string> tokens) {
        std::vector<std::string> sorted(tokens.begin(), tokens.end());
        std::sort(sorted.begin(), sorted.end());
        std::vector<std::u32string> out;
        out.reserve(sorted.size());
        for (const auto& t : sorted) out.push_back(decode_utf8(t));
        return out;
    };
    const auto xs = decode_sorted(a);
    const auto ys = decode_sorted(b);

    std::vector<double> sim(xs.size() * ys.size());
    for (size_t i = 0; i < xs.size(); ++i)
        for (size_t j = 0; j < ys.size(); ++j)
            sim[i * ys.size() + j] = character_similarity(inner, xs[i], ys[j]);

    double forward = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        double best = 0.0;
        for (size_t j = 0; j < ys.size(); ++j) best = std::max(best, sim[i * ys.size() + j]);
        forward += best;
    }
    double backward = 0.0;
    for (size_t j = 0; j < ys.size(); ++j) {
        double best = 0.0;
        for (size_t i = 0; i < xs.size(); ++i) best = std::max(best, sim[i * ys.size() + j]);
        backward += best;
    }
    forward /= static_cast<double>(xs.size());
    backward /= static_cast<double>(ys.size());
    return detail::clamp_unit((forward + backward) / 2.0);
}

inline double monge_elkan(std::span<const std::string> a, std::span<const std::string> b,
                          std::string_view inner) {
    return monge_elkan(a, b, parse_measure(inner));
}

} // namespace namelink
