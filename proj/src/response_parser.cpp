// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "progbench/response_parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <optional>

#include "progbench/error.hpp"

namespace progbench {

namespace {

constexpr std::array<std::string_view, 4> kFullTags{"ref_think", "ref", "score_think", "score"};
constexpr std::array<std::string_view, 1> kDirectTags{"score"};

std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

// Trims whitespace and one layer of matching quotes or backticks.
std::string_view unquote(std::string_view s) {
    s = trim(s);
    if (s.size() >= 2) {
        const char a = s.front();
        const char b = s.back();
        if ((a == '"' && b == '"') || (a == '\'' && b == '\'') || (a == '`' && b == '`')) s = trim(s.substr(1, s.size() - 2));
    }
    return s;
}

bool is_abstain_literal(std::string_view s) {
    std::string lower;
    for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return lower == "n/a" || lower == "na";
}

bool istarts_with(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
    }
    return true;
}

// Strict decimal grammar: [+-]? (digits ('.' digits?)? | '.' digits). No exponents,
// no hex, no inf/nan.
std::optional<double> parse_decimal(std::string_view s, bool& has_point) {
    has_point = false;
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t digits = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
    if (i < s.size() && s[i] == '.') {
        has_point = true;
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
    }
    if (digits == 0 || i != s.size()) return std::nullopt;
    double v = 0.0;
    // from_chars rejects a leading '+', so skip it; keep '-' for the sign.
    const char* first = s.data() + (s[0] == '+' ? 1 : 0);
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

struct TagSpan {
    std::size_t open = std::string_view::npos;  // position of '<name>'
    std::size_t content_begin = 0;
    std::size_t close = std::string_view::npos;  // position of '</name>'
    std::size_t end = 0;                         // one past '</name>'
    int occurrences = 0;
};

TagSpan find_tag(std::string_view raw, std::string_view name) {
    const std::string open = "<" + std::string(name) + ">";
    const std::string close = "</" + std::string(name) + ">";
    TagSpan span;
    std::size_t pos = 0;
    while ((pos = raw.find(open, pos)) != std::string_view::npos) {
        if (span.occurrences++ == 0) span.open = pos;
        pos += open.size();
    }
    if (span.occurrences == 0) return span;
    span.content_begin = span.open + open.size();
    span.close = raw.find(close, span.content_begin);
    if (span.close != std::string_view::npos) span.end = span.close + close.size();
    return span;
}

std::string shortest_fixed(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
    return std::string(buf, ptr);
}

}  // namespace

Schema schema_from_string(std::string_view s) {
    if (s == "full") return Schema::full;
    if (s == "direct") return Schema::direct;
    throw Error(ErrorCode::ParseError, "unknown schema '" + std::string(s) + "'");
}

ScoreLiteral parse_score_literal(std::string_view s) {
    ScoreLiteral out;
    std::string_view body = unquote(s);
    if (is_abstain_literal(body)) {
        out.value = ScoreAnswer::abstain();
        return out;
    }
    bool percent = false;
    if (!body.empty() && body.back() == '%') {
        percent = true;
        body = trim(body.substr(0, body.size() - 1));
    }
    bool has_point = false;
    const auto parsed = parse_decimal(body, has_point);
    if (!parsed) {
        out.violations.push_back({"MalformedValue", "score"});
        return out;
    }
    double v = *parsed;
    if (!percent && has_point && v >= 0.0 && v <= 1.0) {
        v *= 100.0;
        out.notes.push_back("FractionReinterpreted(score)");
    }
    if (v < 0.0 || v > 100.0) {
        v = std::clamp(v, 0.0, 100.0);
        out.violations.push_back({"OutOfRangeClamped", "score"});
    }
    out.value = ScoreAnswer::of(v);
    return out;
}

RefLiteral parse_ref_literal(std::string_view s, int n_steps) {
    RefLiteral out;
    std::string_view body = unquote(s);
    if (is_abstain_literal(body)) {
        out.value = RefAnswer::abstain();
        return out;
    }
    for (std::string_view prefix : {"no.", "no", "step", "state", "frame", "#"}) {
        if (istarts_with(body, prefix)) {
            body = trim(body.substr(prefix.size()));
            break;
        }
    }
    if (!body.empty() && body.back() == '.') body.remove_suffix(1);
    const bool all_digits = !body.empty() && body.size() <= 9 &&
                            std::all_of(body.begin(), body.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
    if (!all_digits) {
        out.violations.push_back({"MalformedValue", "ref"});
        return out;
    }
    int v = 0;
    std::from_chars(body.data(), body.data() + body.size(), v);
    if (v < 1 || (n_steps > 0 && v > n_steps)) {
        out.violations.push_back({"RefOutOfRange", "ref"});
        return out;
    }
    out.value = RefAnswer::of(v);
    return out;
}

ParsedPrediction parse_response(std::string_view raw, Schema schema, int n_steps) {
    ParsedPrediction p;
    p.raw_text = std::string(raw);

    const auto names = schema == Schema::full ? std::vector<std::string_view>(kFullTags.begin(), kFullTags.end())
                                              : std::vector<std::string_view>(kDirectTags.begin(), kDirectTags.end());
    std::vector<TagSpan> spans;
    for (std::string_view name : names) {
        TagSpan span = find_tag(raw, name);
        if (span.occurrences == 0) {
            p.format_violations.push_back({"MissingTag", std::string(name)});
        } else {
            if (span.occurrences > 1) p.format_violations.push_back({"DuplicateTag", std::string(name)});
            if (span.close == std::string_view::npos) p.format_violations.push_back({"UnclosedTag", std::string(name)});
        }
        spans.push_back(span);
    }

    // Closed tags must appear in schema order without overlapping.
    std::size_t last_end = 0;
    bool ordered = true;
    for (const TagSpan& span : spans) {
        if (span.occurrences == 0 || span.close == std::string_view::npos) continue;
        if (span.open < last_end) ordered = false;
        last_end = span.end;
    }
    if (!ordered) p.format_violations.push_back({"MisorderedTags", ""});

    auto content = [&](std::size_t i) -> std::optional<std::string_view> {
        const TagSpan& span = spans[i];
        if (span.occurrences == 0 || span.close == std::string_view::npos) return std::nullopt;
        return trim(raw.substr(span.content_begin, span.close - span.content_begin));
    };

    auto take_score = [&](std::optional<std::string_view> c) {
        if (!c) return;
        ScoreLiteral lit = parse_score_literal(*c);
        p.score = lit.value;
        for (auto& v : lit.violations) p.format_violations.push_back(std::move(v));
        for (auto& n : lit.notes) p.notes.push_back(std::move(n));
    };

    if (schema == Schema::full) {
        if (auto c = content(0)) p.ref_think = std::string(*c);
        if (auto c = content(1)) {
            RefLiteral lit = parse_ref_literal(*c, n_steps);
            p.ref = lit.value;
            for (auto& v : lit.violations) p.format_violations.push_back(std::move(v));
        }
        if (auto c = content(2)) p.score_think = std::string(*c);
        take_score(content(3));
        if (p.ref.is_abstain() != p.score.is_abstain() && (p.ref.has_value() || p.score.has_value())) {
            p.format_violations.push_back({"InconsistentAbstention", ""});
        }
    } else {
        take_score(content(0));
        // No reference is requested in the direct schema; mirror the score's abstention.
        p.ref = p.score.is_abstain() ? RefAnswer::abstain() : RefAnswer::malformed();
    }

    p.format_ok = p.format_violations.empty();
    return p;
}

std::string render_prediction(const ParsedPrediction& p, Schema schema) {
    auto ref_text = [&] {
        if (p.ref.is_abstain()) return std::string(kAbstainLiteral);
        return p.ref.has_value() ? std::to_string(p.ref.value()) : std::string();
    };
    auto score_text = [&] {
        if (p.score.is_abstain()) return std::string(kAbstainLiteral);
        // The '%' suffix keeps small values from being read back as fractions.
        return p.score.has_value() ? shortest_fixed(p.score.value()) + "%" : std::string();
    };
    if (schema == Schema::direct) return "<score>" + score_text() + "</score>";
    return "<ref_think>" + p.ref_think + "</ref_think>\n<ref>" + ref_text() + "</ref>\n<score_think>" + p.score_think +
           "</score_think>\n<score>" + score_text() + "</score>";
}

bool equivalent(const ParsedPrediction& a, const ParsedPrediction& b) {
    return a.ref_think == b.ref_think && a.ref == b.ref && a.score_think == b.score_think && a.score == b.score &&
           a.format_ok == b.format_ok && a.format_violations == b.format_violations && a.notes == b.notes;
}

}  // namespace progbench
