#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "vli/error.hpp"

namespace vli::grammar {

// The six task identifier tokens plus None for vision-irrelevant instructions.
enum class TaskId { None, Vqa, Caption, Grounding, Refer, Identify, Detection };

inline constexpr TaskId kAllTaskIds[] = {
    TaskId::None,     TaskId::Vqa,      TaskId::Caption, TaskId::Grounding,
    TaskId::Refer,    TaskId::Identify, TaskId::Detection};

// Surface form, e.g. "[vqa]". None maps to the empty string.
std::string_view surface(TaskId id);

// Inverse of surface(). Empty string yields None; unknown tokens yield nullopt.
std::optional<TaskId> task_from_surface(std::string_view s);

// One prompt before rendering. `image_slot` is the splice marker the trainer
// replaces with real image features.
struct PromptParts {
    std::string image_slot = "<ImageHere>";
    TaskId identifier = TaskId::None;
    std::string instruction;
    bool has_image = true;

    bool operator==(const PromptParts&) const = default;
};

// Renders "[INST] <Img>SLOT</Img> [ident] instruction [/INST]" with single
// spaces; omits the image segment when has_image is false and the identifier
// segment when it is None. Throws ValidationError on empty instruction or a
// non-None identifier without an image.
std::string render_prompt(const PromptParts& p);

// Inverse of render_prompt on canonical forms. Tolerates runs of spaces
// between segments (the instruction itself is whitespace-canonicalized).
// Throws ParseError with byte offsets on missing delimiters, unbalanced
// <Img> tags, or an unknown bracketed token in identifier position.
PromptParts parse_prompt(std::string_view s);

// A per-benchmark instruction template with a single {question} hole.
struct BenchmarkPrompt {
    std::string name;
    std::string tmpl;
    TaskId identifier = TaskId::None;
};

// Registry of evaluation prompt templates, keyed by benchmark name. Built
// once, read-only afterwards.
class BenchmarkRegistry {
public:
    // The Appendix A.1 templates: RefCOCO/RefCOCO+/RefCOCOg, VizWiz,
    // HatefulMemes, VSR, IconQA, GQA, OKVQA.
    static BenchmarkRegistry with_defaults();

    // Loads {"benchmarks":[{"name":…,"template":…,"identifier":…},…]} on top
    // of the defaults.
    static BenchmarkRegistry from_json_file(const std::string& path);

    // Throws ConfigError on a duplicate name or a template whose {question}
    // hole count is not exactly one.
    void add(BenchmarkPrompt p);

    // Substitutes the question into the named template.
    // Throws ConfigError on an unknown benchmark.
    std::string render(std::string_view benchmark, std::string_view question) const;

    const BenchmarkPrompt& get(std::string_view benchmark) const;
    bool contains(std::string_view benchmark) const;

private:
    std::map<std::string, BenchmarkPrompt, std::less<>> entries_;
};

}  // namespace vli::grammar
