#include "vli/grammar.hpp"

#include <fstream>

#include <json.hpp>

namespace vli::grammar {

std::string_view surface(TaskId id) {
    switch (id) {
        case TaskId::None: return "";
        case TaskId::Vqa: return "[vqa]";
        case TaskId::Caption: return "[caption]";
        case TaskId::Grounding: return "[grounding]";
        case TaskId::Refer: return "[refer]";
        case TaskId::Identify: return "[identify]";
        case TaskId::Detection: return "[detection]";
    }
    return "";
}

std::optional<TaskId> task_from_surface(std::string_view s) {
    for (TaskId id : kAllTaskIds) {
        if (surface(id) == s) return id;
    }
    return std::nullopt;
}

std::string render_prompt(const PromptParts& p) {
    if (p.instruction.empty()) {
        throw ValidationError("instruction must be non-empty");
    }
    if (!p.has_image && p.identifier != TaskId::None) {
        throw ValidationError("vision-irrelevant prompts carry no task identifier");
    }
    std::string out = "[INST] ";
    if (p.has_image) {
        out += "<Img>";
        out += p.image_slot;
        out += "</Img> ";
    }
    if (p.identifier != TaskId::None) {
        out += surface(p.identifier);
        out += ' ';
    }
    out += p.instruction;
    out += " [/INST]";
    return out;
}

namespace {

void skip_spaces(std::string_view s, std::size_t& pos) {
    while (pos < s.size() && s[pos] == ' ') ++pos;
}

std::string canonicalize_spaces(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_run = false;
    for (char c : s) {
        if (c == ' ') {
            in_run = true;
            continue;
        }
        if (in_run && !out.empty()) out += ' ';
        in_run = false;
        out += c;
    }
    return out;
}

}  // namespace

PromptParts parse_prompt(std::string_view s) {
    constexpr std::string_view kOpen = "[INST]";
    constexpr std::string_view kClose = "[/INST]";

    std::size_t pos = 0;
    if (s.substr(0, kOpen.size()) != kOpen) {
        throw ParseError("prompt must start with [INST]", 0);
    }
    pos = kOpen.size();

    // Locate the closing delimiter at the very end (trailing spaces allowed).
    std::size_t tail = s.size();
    while (tail > pos && s[tail - 1] == ' ') --tail;
    if (tail < kClose.size() || s.substr(tail - kClose.size(), kClose.size()) != kClose) {
        throw ParseError("prompt must end with [/INST]", tail);
    }
    std::size_t body_end = tail - kClose.size();

    skip_spaces(s, pos);

    PromptParts parts;
    parts.has_image = false;

    if (s.substr(pos, 5) == "<Img>") {
        std::size_t open = pos;
        std::size_t close = s.find("</Img>", pos + 5);
        if (close == std::string_view::npos || close >= body_end) {
            throw ParseError("unbalanced <Img> tag", open);
        }
        parts.has_image = true;
        parts.image_slot = std::string(s.substr(pos + 5, close - (pos + 5)));
        pos = close + 6;
        skip_spaces(s, pos);
    } else if (s.find("</Img>", pos) != std::string_view::npos &&
               s.find("</Img>", pos) < body_end) {
        throw ParseError("</Img> without opening <Img>", s.find("</Img>", pos));
    }

    parts.identifier = TaskId::None;
    if (pos < body_end && s[pos] == '[') {
        std::size_t rb = s.find(']', pos);
        if (rb == std::string_view::npos || rb >= body_end) {
            throw ParseError("unterminated bracketed token", pos);
        }
        std::string_view token = s.substr(pos, rb - pos + 1);
        auto id = task_from_surface(token);
        if (!id || *id == TaskId::None) {
            throw ParseError("unknown identifier token '" + std::string(token) + "'", pos);
        }
        parts.identifier = *id;
        pos = rb + 1;
        skip_spaces(s, pos);
    }

    if (pos >= body_end) {
        throw ParseError("empty instruction", pos);
    }
    parts.instruction = canonicalize_spaces(s.substr(pos, body_end - pos));
    if (parts.instruction.empty()) {
        throw ParseError("empty instruction", pos);
    }
    if (!parts.has_image && parts.identifier != TaskId::None) {
        throw ParseError("identifier present without image segment", 0);
    }
    return parts;
}

void BenchmarkRegistry::add(BenchmarkPrompt p) {
    std::size_t holes = 0;
    for (std::size_t at = p.tmpl.find("{question}"); at != std::string::npos;
         at = p.tmpl.find("{question}", at + 1)) {
        ++holes;
    }
    if (holes != 1) {
        throw ConfigError("benchmark template for '" + p.name +
                          "' must contain exactly one {question} hole");
    }
    auto [it, inserted] = entries_.emplace(p.name, std::move(p));
    if (!inserted) {
        throw ConfigError("duplicate benchmark name '" + it->first + "'");
    }
}

BenchmarkRegistry BenchmarkRegistry::with_defaults() {
    const std::string vqa_word_or_phrase =
        "[vqa] Based on the image, respond to this question with a single word "
        "or phrase: {question}";
    BenchmarkRegistry r;
    for (const char* rec : {"RefCOCO", "RefCOCO+", "RefCOCOg", "REC"}) {
        r.add({rec, "[refer] give me the location of {question}", TaskId::Refer});
    }
    r.add({"VizWiz",
           vqa_word_or_phrase +
               ", and reply 'unanswerable' when the provided information is "
               "insufficient",
           TaskId::Vqa});
    r.add({"HatefulMemes",
           "[vqa] This is an image with: {question} written on it. Is it "
           "hateful? Answer:",
           TaskId::Vqa});
    r.add({"VSR", "[vqa] Based on the image, is this statement true or false? {question}",
           TaskId::Vqa});
    for (const char* b : {"IconQA", "GQA", "OKVQA"}) {
        r.add({b, vqa_word_or_phrase, TaskId::Vqa});
    }
    return r;
}

BenchmarkRegistry BenchmarkRegistry::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open benchmark registry file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad benchmark registry JSON in " + path + ": " + e.what());
    }
    BenchmarkRegistry r = with_defaults();
    for (const auto& e : j.at("benchmarks")) {
        BenchmarkPrompt p;
        p.name = e.at("name").get<std::string>();
        p.tmpl = e.at("template").get<std::string>();
        auto id = task_from_surface(e.value("identifier", ""));
        if (!id) throw ConfigError("unknown identifier in benchmark '" + p.name + "'");
        p.identifier = *id;
        r.add(std::move(p));
    }
    return r;
}

const BenchmarkPrompt& BenchmarkRegistry::get(std::string_view benchmark) const {
    auto it = entries_.find(benchmark);
    if (it == entries_.end()) {
        throw ConfigError("unknown benchmark '" + std::string(benchmark) + "'");
    }
    return it->second;
}

bool BenchmarkRegistry::contains(std::string_view benchmark) const {
    return entries_.find(benchmark) != entries_.end();
}

std::string BenchmarkRegistry::render(std::string_view benchmark,
                                      std::string_view question) const {
    const BenchmarkPrompt& p = get(benchmark);
    std::string out = p.tmpl;
    std::size_t at = out.find("{question}");
    out.replace(at, 10, question);
    return out;
}

}  // namespace vli::grammar
