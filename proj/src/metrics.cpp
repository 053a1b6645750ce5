#include "vli/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vli/corpus.hpp"
#include "vli/markup.hpp"

namespace vli::metrics {

using nlohmann::json;

std::optional<geometry::NormBox> extract_first_box(std::string_view text) {
    for (std::size_t pos = text.find('{'); pos != std::string_view::npos;
         pos = text.find('{', pos + 1)) {
        try {
            std::size_t end = 0;
            return geometry::parse_box_at(text, pos, end);
        } catch (const ParseError&) {
            // not a box group; keep scanning
        }
    }
    return std::nullopt;
}

bool score_rec(const Prediction& pred, const geometry::NormBox& gold,
               const RecOptions& opts) {
    auto box = extract_first_box(pred.output);
    if (!box) return false;
    double v = geometry::iou(*box, gold);
    return opts.inclusive ? v >= opts.threshold : v > opts.threshold;
}

namespace {

bool is_article(std::string_view w) { return w == "a" || w == "an" || w == "the"; }

std::vector<std::string> tokenize_folded(std::string_view s, bool lowercase,
                                         bool strip_punct) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            if (!cur.empty()) {
                tokens.push_back(std::move(cur));
                cur.clear();
            }
            continue;
        }
        if (strip_punct && std::ispunct(c)) continue;
        cur += lowercase ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

}  // namespace

std::string normalize_answer(std::string_view s, const NormalizeOptions& opts) {
    auto tokens = tokenize_folded(s, opts.lowercase, opts.strip_punctuation);
    std::size_t start = 0;
    if (opts.drop_leading_article && tokens.size() > 1 && is_article(tokens[0])) {
        start = 1;
    }
    std::string out;
    for (std::size_t i = start; i < tokens.size(); ++i) {
        if (!out.empty()) out += ' ';
        out += tokens[i];
    }
    return out;
}

bool score_vqa(const Prediction& pred, const std::vector<std::string>& gold_answers,
               const NormalizeOptions& opts) {
    std::string p = normalize_answer(pred.output, opts);
    for (const auto& g : gold_answers) {
        if (p == normalize_answer(g, opts)) return true;
    }
    return false;
}

namespace {

std::string fold_word(std::string w) {
    for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return w;
}

// Candidate singular forms, most specific first.
std::vector<std::string> singular_candidates(const std::string& w) {
    std::vector<std::string> out{w};
    auto ends = [&](std::string_view suf) {
        return w.size() > suf.size() && w.compare(w.size() - suf.size(), suf.size(), suf) == 0;
    };
    if (ends("ies")) out.push_back(w.substr(0, w.size() - 3) + "y");
    if (ends("es")) out.push_back(w.substr(0, w.size() - 2));
    if (ends("s")) out.push_back(w.substr(0, w.size() - 1));
    return out;
}

}  // namespace

ChairLexicon ChairLexicon::with_defaults() {
    static const char* kObjects[] = {
        "person", "bicycle", "car", "motorcycle", "airplane", "bus", "train",
        "truck", "boat", "traffic light", "fire hydrant", "stop sign",
        "parking meter", "bench", "bird", "cat", "dog", "horse", "sheep", "cow",
        "elephant", "bear", "zebra", "giraffe", "backpack", "umbrella",
        "handbag", "tie", "suitcase", "frisbee", "skis", "snowboard",
        "sports ball", "kite", "baseball bat", "baseball glove", "skateboard",
        "surfboard", "tennis racket", "bottle", "wine glass", "cup", "fork",
        "knife", "spoon", "bowl", "banana", "apple", "sandwich", "orange",
        "broccoli", "carrot", "hot dog", "pizza", "donut", "cake", "chair",
        "couch", "potted plant", "bed", "dining table", "toilet", "tv",
        "laptop", "mouse", "remote", "keyboard", "cell phone", "microwave",
        "oven", "toaster", "sink", "refrigerator", "book", "clock", "vase",
        "scissors", "teddy bear", "hair drier", "toothbrush"};
    ChairLexicon lex;
    for (const char* o : kObjects) lex.add_object(o);

    static const std::pair<const char*, const char*> kSynonyms[] = {
        {"man", "person"},       {"woman", "person"},    {"child", "person"},
        {"boy", "person"},       {"girl", "person"},     {"people", "person"},
        {"kid", "person"},       {"guy", "person"},      {"lady", "person"},
        {"bike", "bicycle"},     {"motorbike", "motorcycle"},
        {"plane", "airplane"},   {"aeroplane", "airplane"},
        {"jet", "airplane"},     {"sofa", "couch"},      {"television", "tv"},
        {"kitten", "cat"},       {"puppy", "dog"},       {"phone", "cell phone"},
        {"mobile phone", "cell phone"},                  {"fridge", "refrigerator"},
        {"doughnut", "donut"},   {"ship", "boat"},       {"table", "dining table"},
        {"computer", "laptop"},  {"racket", "tennis racket"}};
    for (const auto& [surface, canonical] : kSynonyms) {
        lex.add_synonym(surface, canonical);
    }
    return lex;
}

ChairLexicon ChairLexicon::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open lexicon file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("bad lexicon JSON in " + path + ": " + e.what());
    }
    ChairLexicon lex;
    for (const auto& o : j.at("objects")) lex.add_object(o.get<std::string>());
    if (j.contains("synonyms")) {
        for (const auto& [surface, canonical] : j.at("synonyms").items()) {
            lex.add_synonym(surface, canonical.get<std::string>());
        }
    }
    return lex;
}

void ChairLexicon::add_object(const std::string& canonical) {
    std::string folded = fold_word(canonical);
    vocabulary_.insert(folded);
    synonyms_[folded] = folded;
    std::size_t words = 1 + std::count(folded.begin(), folded.end(), ' ');
    max_phrase_words_ = std::max(max_phrase_words_, words);
}

void ChairLexicon::add_synonym(const std::string& surface, const std::string& canonical) {
    std::string folded_canonical = fold_word(canonical);
    if (!vocabulary_.contains(folded_canonical)) {
        throw ConfigError("synonym '" + surface + "' maps to unknown object '" +
                          canonical + "'");
    }
    std::string folded = fold_word(surface);
    synonyms_[folded] = folded_canonical;
    std::size_t words = 1 + std::count(folded.begin(), folded.end(), ' ');
    max_phrase_words_ = std::max(max_phrase_words_, words);
}

bool ChairLexicon::has_object(const std::string& canonical) const {
    return vocabulary_.contains(fold_word(canonical));
}

std::set<std::string> ChairLexicon::mentions(std::string_view caption) const {
    auto tokens = tokenize_folded(caption, /*lowercase=*/true, /*strip_punct=*/true);
    std::set<std::string> found;
    // Longest n-gram match wins at each position; plural folding applies to
    // the final word of the candidate phrase.
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        for (std::size_t n = std::min(max_phrase_words_, tokens.size() - i); n >= 1; --n) {
            std::string head;
            for (std::size_t k = 0; k + 1 < n; ++k) {
                head += tokens[i + k];
                head += ' ';
            }
            bool matched = false;
            for (const auto& last : singular_candidates(tokens[i + n - 1])) {
                auto it = synonyms_.find(head + last);
                if (it != synonyms_.end()) {
                    found.insert(it->second);
                    matched = true;
                    break;
                }
            }
            if (matched) {
                i += n - 1;
                break;
            }
        }
    }
    return found;
}

ChairScores score_chair(const std::vector<ChairExample>& examples,
                        const ChairLexicon& lexicon) {
    ChairScores s;
    std::uint64_t hallucinated_captions = 0;
    std::uint64_t total_tokens = 0;
    for (const auto& ex : examples) {
        for (const auto& g : ex.gold_objects) {
            if (!lexicon.has_object(g)) {
                throw ConfigError("gold object '" + g + "' is not in the lexicon");
            }
        }
        auto mentioned = lexicon.mentions(ex.caption);
        std::uint64_t halluc = 0;
        for (const auto& m : mentioned) {
            if (!ex.gold_objects.contains(m)) ++halluc;
        }
        s.mentioned_instances += mentioned.size();
        s.hallucinated_instances += halluc;
        if (halluc > 0) ++hallucinated_captions;
        total_tokens += tokenize_folded(ex.caption, false, false).size();
    }
    if (s.mentioned_instances > 0) {
        s.chair_i = static_cast<double>(s.hallucinated_instances) /
                    static_cast<double>(s.mentioned_instances);
    }
    if (!examples.empty()) {
        s.chair_s = static_cast<double>(hallucinated_captions) /
                    static_cast<double>(examples.size());
        s.mean_len = static_cast<double>(total_tokens) /
                     static_cast<double>(examples.size());
    }
    return s;
}

EvalKind eval_kind_from_name(std::string_view name) {
    std::string n(name);
    for (char& c : n) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (n == "rec") return EvalKind::Rec;
    if (n == "vqa") return EvalKind::Vqa;
    if (n == "chair") return EvalKind::Chair;
    throw ConfigError("unknown eval kind '" + std::string(name) +
                      "' (expected rec, vqa, or chair)");
}

namespace {

const char* kind_name(EvalKind k) {
    switch (k) {
        case EvalKind::Rec: return "rec";
        case EvalKind::Vqa: return "vqa";
        case EvalKind::Chair: return "chair";
    }
    return "?";
}

}  // namespace

std::string EvalReport::to_json() const {
    json v = json::object();
    for (const auto& [k, val] : values) v[k] = val;
    json verd = json::array();
    for (const auto& x : verdicts) {
        verd.push_back({{"id", x.id}, {"correct", x.correct}, {"missing", x.missing}});
    }
    json j{{"kind", kind_name(kind)}, {"values", v},       {"total", total},
           {"correct", correct},      {"missing", missing}, {"verdicts", verd},
           {"warnings", warnings}};
    return j.dump(2);
}

std::string EvalReport::to_table() const {
    std::ostringstream out;
    out << "metric                value\n";
    out << "--------------------  ----------\n";
    for (const auto& [k, v] : values) {
        out << k;
        for (std::size_t i = k.size(); i < 22; ++i) out << ' ';
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", v);
        out << buf << '\n';
    }
    out << "records: " << total << "  correct: " << correct
        << "  missing predictions: " << missing << '\n';
    return out.str();
}

EvalReport run_eval(const std::string& eval_path, const std::string& preds_path,
                    EvalKind kind, const RecOptions& rec_opts,
                    const ChairLexicon* lexicon) {
    std::ifstream eval_in(eval_path);
    if (!eval_in) throw ConfigError("cannot open eval set: " + eval_path);
    std::ifstream preds_in(preds_path);
    if (!preds_in) throw ConfigError("cannot open predictions: " + preds_path);

    EvalReport report;
    report.kind = kind;

    std::map<std::string, std::string> preds;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(preds_in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            report.warnings.push_back("predictions line " + std::to_string(line_no) +
                                      ": " + e.what());
            continue;
        }
        std::string id = j.at("id").get<std::string>();
        if (!preds.emplace(id, j.at("output").get<std::string>()).second) {
            throw ConfigError("duplicate prediction id '" + id + "' at line " +
                              std::to_string(line_no));
        }
    }

    ChairLexicon default_lexicon = ChairLexicon::with_defaults();
    const ChairLexicon& lex = lexicon ? *lexicon : default_lexicon;
    std::vector<ChairExample> chair_examples;

    line_no = 0;
    while (std::getline(eval_in, line)) {
        ++line_no;
        if (line.empty()) continue;
        corpus::CorpusRecord rec;
        try {
            rec = corpus::record_from_json(line);
        } catch (const Error& e) {
            report.warnings.push_back("eval line " + std::to_string(line_no) + ": " +
                                      e.what());
            continue;
        }
        ++report.total;
        auto it = preds.find(rec.id);
        Verdict v;
        v.id = rec.id;
        if (it == preds.end()) {
            v.missing = true;
            ++report.missing;
            report.warnings.push_back("missing prediction for id '" + rec.id + "'");
            if (kind == EvalKind::Chair) {
                // a missing caption contributes an empty caption
                chair_examples.push_back({"", {}});
            }
            report.verdicts.push_back(std::move(v));
            continue;
        }
        Prediction p{rec.id, it->second};
        switch (kind) {
            case EvalKind::Rec: {
                const auto* gb = std::get_if<corpus::GoldBoxes>(&rec.gold);
                if (!gb || gb->boxes.empty()) {
                    throw ConfigError("record '" + rec.id + "' has no gold box");
                }
                v.correct = score_rec(p, gb->boxes.front(), rec_opts);
                break;
            }
            case EvalKind::Vqa: {
                const auto* ga = std::get_if<corpus::GoldAnswers>(&rec.gold);
                if (!ga || ga->answers.empty()) {
                    throw ConfigError("record '" + rec.id + "' has no gold answers");
                }
                v.correct = score_vqa(p, ga->answers);
                break;
            }
            case EvalKind::Chair: {
                ChairExample ex;
                // grounded markup in captions is stripped before matching
                ex.caption = markup::strip_grounding(markup::parse_grounded_lenient(p.output));
                if (const auto* ga = std::get_if<corpus::GoldAnswers>(&rec.gold)) {
                    ex.gold_objects.insert(ga->answers.begin(), ga->answers.end());
                }
                chair_examples.push_back(std::move(ex));
                v.correct = true;  // per-record correctness is not defined for CHAIR
                break;
            }
        }
        if (v.correct) ++report.correct;
        report.verdicts.push_back(std::move(v));
    }

    if (kind == EvalKind::Chair) {
        ChairScores s = score_chair(chair_examples, lex);
        report.values["chair_i"] = s.chair_i;
        report.values["chair_s"] = s.chair_s;
        report.values["len"] = s.mean_len;
        report.verdicts.clear();
        report.correct = 0;
    } else {
        report.values["accuracy"] =
            report.total ? static_cast<double>(report.correct) / report.total : 0.0;
    }
    return report;
}

}  // namespace vli::metrics
