#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "vli/corpus.hpp"
#include "vli/error.hpp"

namespace vli::mixer {

// Table-2 data-type rows. Plans may set an entry's type explicitly; known
// dataset names are inferred otherwise.
inline constexpr const char* kDataTypes[] = {
    "weakly_labeled", "grounded_caption", "caption", "rec",
    "reg",            "vqa",              "multimodal_instruction", "language"};

// The stage inclusion matrix: weakly-labeled and grounded-caption data only
// in stage 1; instruction and language data only in stage 3.
bool allowed_in_stage(const std::string& data_type, int stage);

// Best-effort data type for well-known dataset names; "" when unknown.
std::string infer_data_type(const std::string& dataset);

struct PlanEntry {
    std::string dataset;
    std::string path;  // JSONL shard; may be empty for validation-only plans
    double weight = 0.0;
    bool included = true;
    std::string data_type;  // optional override; inferred from name if empty
};

// One training stage: which datasets are in and at what sampling weight.
struct StagePlan {
    int stage = 1;
    std::uint64_t seed = 0;
    std::uint64_t total_steps = 0;
    std::vector<PlanEntry> entries;
};

StagePlan plan_from_json_file(const std::string& path);
StagePlan plan_from_json_string(const std::string& text);

// Structural checks always; the Table-2 inclusion matrix when strict_paper.
// Returns an empty list when the plan is valid.
std::vector<std::string> validate_plan(const StagePlan& p, bool strict_paper);

// Throwing form: ConfigError listing every violation.
void check_plan(const StagePlan& p, bool strict_paper);

// Fully deterministic sampling schedule: one (dataset, record ordinal) per
// step. Dataset choice is alias-method over normalized weights; record
// ordinals cycle through per-dataset seeded permutations that reshuffle on
// exhaustion.
struct SampleTrace {
    struct Step {
        std::uint32_t dataset_index;  // into datasets
        std::uint64_t record_ordinal;
    };
    std::vector<std::string> datasets;  // included datasets, plan order
    std::vector<Step> steps;
    std::map<std::string, std::uint64_t> counts_per_dataset;
};

// `catalogs` maps every included dataset name to its record count (>= 1).
SampleTrace sample_schedule(const StagePlan& p,
                            const std::map<std::string, std::uint64_t>& catalogs);

// Random access into a JSONL shard by line number: the offsets are indexed
// once, lines are read on demand.
class ShardIndex {
public:
    explicit ShardIndex(const std::string& path);
    std::uint64_t size() const { return offsets_.size(); }
    std::string line(std::uint64_t i) const;
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::vector<std::uint64_t> offsets_;
    mutable std::ifstream file_;
};

struct CompileStats {
    std::uint64_t emitted = 0;
    std::uint64_t skipped = 0;
};

// Emits one {"prompt","target","task","source"} line per trace step, in
// trace order. A record whose instruction starts with its own identifier
// token has that prefix stripped before prompt rendering. When fail_fast is
// off, bad records are skipped and counted.
CompileStats compile_stage(const StagePlan& p, const SampleTrace& trace,
                           const std::vector<ShardIndex>& shards, std::ostream& out,
                           bool fail_fast = true, std::ostream* log = nullptr);

// Renders the full training prompt for one record (shared with the compile
// subcommands).
std::string render_record_prompt(const corpus::CorpusRecord& r);

}  // namespace vli::mixer
