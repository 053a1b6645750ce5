#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vli/geometry.hpp"

namespace vli::metrics {

// One raw model output, matched to an eval record by id.
struct Prediction {
    std::string id;
    std::string output;
};

// Scans left-to-right for the first well-formed box group in free text.
// Chat models wrap answers in prose; anything unparseable is skipped.
std::optional<geometry::NormBox> extract_first_box(std::string_view text);

struct RecOptions {
    double threshold = 0.5;
    bool inclusive = false;  // compatibility switch: >= instead of strict >
};

// Correct iff a box parses out of the prediction and IoU against gold clears
// the threshold (strictly, by default). Never throws on model output.
bool score_rec(const Prediction& pred, const geometry::NormBox& gold,
               const RecOptions& opts = {});

struct NormalizeOptions {
    bool lowercase = true;
    bool strip_punctuation = true;
    bool collapse_whitespace = true;
    bool drop_leading_article = true;
};

// Canonical answer form: lowercased, punctuation removed, whitespace
// collapsed, a single leading article dropped. Idempotent.
std::string normalize_answer(std::string_view s, const NormalizeOptions& opts = {});

// Top-1 match: normalized prediction equals any normalized gold answer.
bool score_vqa(const Prediction& pred, const std::vector<std::string>& gold_answers,
               const NormalizeOptions& opts = {});

// Object vocabulary plus a synonym map for hallucination scoring. Matching is
// case-insensitive, word-boundary, plural-folded.
class ChairLexicon {
public:
    // The standard 80-class object vocabulary and a small synonym table.
    static ChairLexicon with_defaults();
    // {"objects":[…], "synonyms":{surface: canonical, …}} replacing defaults.
    static ChairLexicon from_json_file(const std::string& path);

    void add_object(const std::string& canonical);
    void add_synonym(const std::string& surface, const std::string& canonical);

    bool has_object(const std::string& canonical) const;
    // Distinct canonical objects mentioned in the caption.
    std::set<std::string> mentions(std::string_view caption) const;

private:
    std::set<std::string> vocabulary_;
    std::map<std::string, std::string> synonyms_;  // folded surface -> canonical
    std::size_t max_phrase_words_ = 1;
};

struct ChairScores {
    double chair_i = 0.0;  // hallucinated / mentioned object instances
    double chair_s = 0.0;  // fraction of captions with any hallucination
    double mean_len = 0.0;  // mean whitespace-token caption length
    std::uint64_t mentioned_instances = 0;
    std::uint64_t hallucinated_instances = 0;
};

// One caption with the gold objects present in its image.
struct ChairExample {
    std::string caption;
    std::set<std::string> gold_objects;
};

// CHAIR at object and sentence level. Gold objects must come from the
// lexicon vocabulary (ConfigError otherwise). Zero mentions overall returns
// chair_i = 0.
ChairScores score_chair(const std::vector<ChairExample>& examples,
                        const ChairLexicon& lexicon);

enum class EvalKind { Rec, Vqa, Chair };

struct Verdict {
    std::string id;
    bool correct = false;
    bool missing = false;  // no prediction supplied
};

struct EvalReport {
    EvalKind kind = EvalKind::Vqa;
    std::map<std::string, double> values;  // metric name -> value
    std::vector<Verdict> verdicts;         // rec/vqa only
    std::uint64_t total = 0;
    std::uint64_t correct = 0;
    std::uint64_t missing = 0;
    std::vector<std::string> warnings;

    std::string to_json() const;
    std::string to_table() const;
};

// Scores a predictions JSONL file ({"id":…,"output":…} per line) against an
// eval-set JSONL of corpus records. Missing predictions count incorrect.
// Throws ConfigError on duplicate prediction ids or unknown kinds; malformed
// lines are reported with their line numbers.
EvalReport run_eval(const std::string& eval_path, const std::string& preds_path,
                    EvalKind kind, const RecOptions& rec_opts = {},
                    const ChairLexicon* lexicon = nullptr);

EvalKind eval_kind_from_name(std::string_view name);

}  // namespace vli::metrics
