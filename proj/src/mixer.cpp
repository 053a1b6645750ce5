#include "vli/mixer.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "vli/grammar.hpp"
#include "vli/rng.hpp"

namespace vli::mixer {

using nlohmann::json;

bool allowed_in_stage(const std::string& data_type, int stage) {
    if (data_type == "weakly_labeled" || data_type == "grounded_caption") {
        return stage == 1;
    }
    if (data_type == "multimodal_instruction" || data_type == "language") {
        return stage == 3;
    }
    if (data_type == "caption" || data_type == "rec" || data_type == "reg" ||
        data_type == "vqa") {
        return true;
    }
    return false;  // unknown types never pass the strict check
}

std::string infer_data_type(const std::string& dataset) {
    static const std::map<std::string, std::string> known = {
        {"LAION", "weakly_labeled"},
        {"CC3M", "weakly_labeled"},
        {"SBU", "weakly_labeled"},
        {"GRIT-20M", "weakly_labeled"},
        {"GRIT-20M-REC", "weakly_labeled"},
        {"GRIT-20M-REG", "weakly_labeled"},
        {"GRIT-20M-grounded-caption", "grounded_caption"},
        {"COCO-caption", "caption"},
        {"Text-Captions", "caption"},
        {"RefCOCO", "rec"},
        {"RefCOCO+", "rec"},
        {"RefCOCOg", "rec"},
        {"Visual-Genome", "rec"},
        {"RefCOCO-REG", "reg"},
        {"RefCOCO+-REG", "reg"},
        {"RefCOCOg-REG", "reg"},
        {"GQA", "vqa"},
        {"VQAv2", "vqa"},
        {"OCR-VQA", "vqa"},
        {"OK-VQA", "vqa"},
        {"AOK-VQA", "vqa"},
        {"LLaVA", "multimodal_instruction"},
        {"Flickr30k", "multimodal_instruction"},
        {"Multi-task-conversation", "multimodal_instruction"},
        {"Unnatural-Instructions", "language"},
    };
    auto it = known.find(dataset);
    return it == known.end() ? std::string() : it->second;
}

StagePlan plan_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad plan JSON: ") + e.what());
    }
    StagePlan p;
    p.stage = j.at("stage").get<int>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.total_steps = j.at("steps").get<std::uint64_t>();
    for (const auto& e : j.at("entries")) {
        PlanEntry entry;
        entry.dataset = e.at("dataset").get<std::string>();
        entry.path = e.value("path", "");
        entry.weight = e.at("weight").get<double>();
        entry.included = e.value("included", true);
        entry.data_type = e.value("type", "");
        p.entries.push_back(std::move(entry));
    }
    return p;
}

StagePlan plan_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open plan file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return plan_from_json_string(text);
}

std::vector<std::string> validate_plan(const StagePlan& p, bool strict_paper) {
    std::vector<std::string> errors;
    if (p.stage < 1 || p.stage > 3) {
        errors.push_back("stage must be 1, 2, or 3");
    }
    if (p.total_steps == 0) {
        errors.push_back("steps must be positive");
    }
    bool any_positive = false;
    std::map<std::string, int> seen;
    for (const auto& e : p.entries) {
        if (++seen[e.dataset] == 2) {
            errors.push_back("duplicate dataset entry '" + e.dataset + "'");
        }
        if (e.weight < 0.0) {
            errors.push_back("negative weight for '" + e.dataset + "'");
        }
        if (e.included && e.weight > 0.0) any_positive = true;
        if (strict_paper && e.included) {
            std::string type = e.data_type.empty() ? infer_data_type(e.dataset)
                                                   : e.data_type;
            if (type.empty()) {
                errors.push_back("cannot classify dataset '" + e.dataset +
                                 "' for strict validation; set its type");
            } else if (!allowed_in_stage(type, p.stage)) {
                errors.push_back("dataset '" + e.dataset + "' (" + type +
                                 ") is not allowed in stage " +
                                 std::to_string(p.stage));
            }
        }
    }
    if (!any_positive) {
        errors.push_back("plan has no included entry with positive weight");
    }
    return errors;
}

void check_plan(const StagePlan& p, bool strict_paper) {
    auto errors = validate_plan(p, strict_paper);
    if (errors.empty()) return;
    std::string msg = "invalid plan:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
}

namespace {

// Epoch-style record cycling: a seeded permutation, reshuffled on exhaustion.
class EpochShuffler {
public:
    EpochShuffler(std::uint64_t count, std::uint64_t seed) : gen_(seed), perm_(count) {
        for (std::uint64_t i = 0; i < count; ++i) perm_[i] = i;
        reshuffle();
    }

    std::uint64_t next() {
        if (pos_ == perm_.size()) {
            reshuffle();
            pos_ = 0;
        }
        return perm_[pos_++];
    }

private:
    void reshuffle() {
        for (std::size_t i = perm_.size(); i > 1; --i) {
            std::swap(perm_[i - 1], perm_[gen_.below(i)]);
        }
    }
    rng::Xoshiro256StarStar gen_;
    std::vector<std::uint64_t> perm_;
    std::size_t pos_ = 0;
};

}  // namespace

SampleTrace sample_schedule(const StagePlan& p,
                            const std::map<std::string, std::uint64_t>& catalogs) {
    check_plan(p, /*strict_paper=*/false);

    SampleTrace trace;
    std::vector<double> weights;
    for (const auto& e : p.entries) {
        if (!e.included || e.weight <= 0.0) continue;
        auto it = catalogs.find(e.dataset);
        if (it == catalogs.end()) {
            throw ConfigError("no catalog entry for dataset '" + e.dataset + "'");
        }
        if (it->second == 0) {
            throw ConfigError("dataset '" + e.dataset + "' is empty");
        }
        trace.datasets.push_back(e.dataset);
        weights.push_back(e.weight);
    }

    // One seed expansion drives everything: first the dataset-draw stream,
    // then one shuffler stream per included dataset, in plan order.
    rng::SplitMix64 seeder(p.seed);
    rng::Xoshiro256StarStar draw(seeder.next());
    std::vector<EpochShuffler> shufflers;
    shufflers.reserve(trace.datasets.size());
    for (const auto& name : trace.datasets) {
        shufflers.emplace_back(catalogs.at(name), seeder.next());
    }

    rng::AliasTable alias(weights);
    trace.steps.reserve(p.total_steps);
    for (std::uint64_t step = 0; step < p.total_steps; ++step) {
        std::size_t d = alias.draw(draw);
        trace.steps.push_back({static_cast<std::uint32_t>(d), shufflers[d].next()});
        ++trace.counts_per_dataset[trace.datasets[d]];
    }
    return trace;
}

ShardIndex::ShardIndex(const std::string& path)
    : path_(path), file_(path, std::ios::binary) {
    if (!file_) throw ConfigError("cannot open shard: " + path);
    std::string line;
    std::uint64_t offset = 0;
    while (std::getline(file_, line)) {
        if (!line.empty()) offsets_.push_back(offset);
        offset += line.size() + 1;
    }
    file_.clear();
}

std::string ShardIndex::line(std::uint64_t i) const {
    if (i >= offsets_.size()) {
        throw ValidationError("record ordinal out of range in " + path_);
    }
    file_.clear();
    file_.seekg(static_cast<std::streamoff>(offsets_[i]));
    std::string line;
    std::getline(file_, line);
    return line;
}

std::string render_record_prompt(const corpus::CorpusRecord& r) {
    grammar::PromptParts parts;
    parts.identifier = r.task;
    parts.has_image = !r.image_ref.empty();
    parts.instruction = r.instruction;
    // Instructions carry their identifier inline in the JSONL form; drop it
    // so the rendered prompt contains the token exactly once.
    std::string prefix = std::string(grammar::surface(r.task));
    if (!prefix.empty() && parts.instruction.rfind(prefix + " ", 0) == 0) {
        parts.instruction = parts.instruction.substr(prefix.size() + 1);
    }
    if (!parts.has_image) parts.identifier = grammar::TaskId::None;
    return grammar::render_prompt(parts);
}

CompileStats compile_stage(const StagePlan& p, const SampleTrace& trace,
                           const std::vector<ShardIndex>& shards, std::ostream& out,
                           bool fail_fast, std::ostream* log) {
    if (shards.size() != trace.datasets.size()) {
        throw ConfigError("shard count does not match trace dataset count");
    }
    (void)p;
    CompileStats stats;
    std::uint64_t step = 0;
    for (const auto& s : trace.steps) {
        ++step;
        try {
            std::string line = shards[s.dataset_index].line(s.record_ordinal);
            corpus::CorpusRecord r = corpus::record_from_json(line);
            json j{{"prompt", render_record_prompt(r)},
                   {"target", r.target},
                   {"task", std::string(grammar::surface(r.task))},
                   {"source", trace.datasets[s.dataset_index]}};
            out << j.dump() << '\n';
            ++stats.emitted;
        } catch (const Error& e) {
            if (fail_fast) {
                throw ValidationError("step " + std::to_string(step) + " (" +
                                      trace.datasets[s.dataset_index] + " record " +
                                      std::to_string(s.record_ordinal) + "): " + e.what());
            }
            ++stats.skipped;
            if (log) {
                *log << "skip step " << step << ": " << e.what() << '\n';
            }
        }
    }
    return stats;
}

}  // namespace vli::mixer
