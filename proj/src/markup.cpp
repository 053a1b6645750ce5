#include "vli/markup.hpp"

namespace vli::markup {

std::size_t GroundedText::span_count() const {
    std::size_t n = 0;
    for (const auto& seg : segments) {
        if (std::holds_alternative<GroundedSpan>(seg)) ++n;
    }
    return n;
}

GroundedText parse_grounded(std::string_view s) {
    GroundedText out;
    std::string plain;
    std::size_t pos = 0;

    auto flush_plain = [&] {
        if (!plain.empty()) {
            out.segments.emplace_back(PlainText{std::move(plain)});
            plain.clear();
        }
    };

    while (pos < s.size()) {
        if (s.substr(pos, 3) == "<p>") {
            std::size_t span_begin = pos;
            std::size_t phrase_start = pos + 3;
            std::size_t close = s.find("</p>", phrase_start);
            if (close == std::string_view::npos) {
                throw ParseError("unclosed <p>", span_begin);
            }
            std::string_view phrase = s.substr(phrase_start, close - phrase_start);
            if (phrase.find("<p>") != std::string_view::npos) {
                throw ParseError("nested <p>", phrase_start + phrase.find("<p>"));
            }
            if (phrase.empty()) {
                throw ParseError("empty phrase", phrase_start);
            }
            pos = close + 4;
            if (pos >= s.size() || s[pos] != '{') {
                throw ParseError("<p>…</p> not followed by a box group", pos);
            }
            GroundedSpan span;
            span.phrase = std::string(phrase);
            span.begin = span_begin;
            while (pos < s.size() && s[pos] == '{') {
                std::size_t end = 0;
                span.boxes.push_back(geometry::parse_box_at(s, pos, end));
                pos = end;
            }
            span.end = pos;
            flush_plain();
            out.segments.emplace_back(std::move(span));
        } else if (s.substr(pos, 4) == "</p>") {
            throw ParseError("</p> without opening <p>", pos);
        } else {
            plain += s[pos];
            ++pos;
        }
    }
    flush_plain();
    return out;
}

GroundedText parse_grounded_lenient(std::string_view s) {
    try {
        return parse_grounded(s);
    } catch (const ParseError&) {
        GroundedText g;
        if (!s.empty()) g.segments.emplace_back(PlainText{std::string(s)});
        return g;
    }
}

std::string emit_grounded(const GroundedText& g) {
    std::string out;
    for (const auto& seg : g.segments) {
        if (const auto* p = std::get_if<PlainText>(&seg)) {
            out += p->text;
        } else {
            const auto& span = std::get<GroundedSpan>(seg);
            out += "<p>";
            out += span.phrase;
            out += "</p>";
            for (const auto& b : span.boxes) {
                out += geometry::serialize_box(b);
            }
        }
    }
    return out;
}

std::string strip_grounding(const GroundedText& g) {
    std::string out;
    for (const auto& seg : g.segments) {
        if (const auto* p = std::get_if<PlainText>(&seg)) {
            out += p->text;
        } else {
            out += std::get<GroundedSpan>(seg).phrase;
        }
    }
    return out;
}

std::vector<std::pair<std::string, geometry::NormBox>> extract_pairs(const GroundedText& g) {
    std::vector<std::pair<std::string, geometry::NormBox>> pairs;
    for (const auto& seg : g.segments) {
        if (const auto* span = std::get_if<GroundedSpan>(&seg)) {
            for (const auto& b : span->boxes) {
                pairs.emplace_back(span->phrase, b);
            }
        }
    }
    return pairs;
}

}  // namespace vli::markup
