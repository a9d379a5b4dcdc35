#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "frase/framealign.hpp"
#include "frase/framenet.hpp"
#include "frase/sparqltool.hpp"

namespace frase::argmap {

struct SpanMapping {
    std::string element_name;
    std::string span_text;
    // 0-based byte offsets, end exclusive; -1/-1 when located by text only.
    long char_start = -1;
    long char_end = -1;
};

struct FrameAnnotation {
    std::string frame_id;
    std::vector<SpanMapping> mappings;
    std::vector<std::string> unfilled;
    std::vector<std::string> repairs;  // audit log from validation
};

// Candidate produced by a backend before validation: element -> span or null.
struct RawAnnotation {
    std::string frame_id;
    std::vector<std::pair<std::string, std::optional<std::string>>> elements;
};

// Parses the backend JSON contract
//   {"frame": "<id>", "elements": {"<name>": "<span>" | null, ...}}
// Throws InputError when the text is not parseable into that shape.
RawAnnotation parse_backend_output(const std::string& text);

// Enforces the annotation invariants over arbitrary backend output:
//  - unknown elements are dropped (repair logged)
//  - spans absent from the question are dropped (element becomes unfilled)
//  - present spans get offsets of their first occurrence
//  - every frame element lands in exactly one of mappings/unfilled
FrameAnnotation validate_annotation(const std::string& question, const framenet::Frame& frame,
                                    const RawAnnotation& raw);

class AnnotatorBackend {
public:
    virtual ~AnnotatorBackend() = default;
    virtual std::string name() const = 0;
    // Returns candidate element->span pairs for one frame. May throw
    // ServiceError; the caller isolates failures per entry.
    virtual RawAnnotation annotate_frame(const std::string& question,
                                         const framenet::Frame& frame) = 0;
};

// Deterministic offline stand-in for the generative annotator: each element
// maps to the longest question n-gram (n <= 4) whose tokens overlap the
// element's name or definition keywords with Jaccard strictly above the
// threshold.
class LexicalBaselineBackend : public AnnotatorBackend {
public:
    explicit LexicalBaselineBackend(double jaccard_threshold = 0.5)
        : threshold_(jaccard_threshold) {}
    std::string name() const override { return "baseline"; }
    RawAnnotation annotate_frame(const std::string& question,
                                 const framenet::Frame& frame) override;

private:
    double threshold_;
};

FrameAnnotation lexical_baseline_annotate(const std::string& question,
                                          const framenet::Frame& frame,
                                          double jaccard_threshold = 0.5);

// Generation-service backend: POST {prompt, max_tokens} -> {text}. The prompt
// template is a versioned text asset with {frame_id}/{frame_definition}/
// {elements}/{question} placeholders.
class HttpGenBackend : public AnnotatorBackend {
public:
    HttpGenBackend(std::string url, std::string prompt_template, int max_tokens = 512,
                   int timeout_ms = 30000);
    std::string name() const override { return "http"; }
    RawAnnotation annotate_frame(const std::string& question,
                                 const framenet::Frame& frame) override;

    std::string build_prompt(const std::string& question, const framenet::Frame& frame) const;

private:
    std::string url_;
    std::string prompt_template_;
    int max_tokens_;
    int timeout_ms_;
};

// One validated FrameAnnotation per evoked frame. An unparseable backend
// output is retried once; persistent failure throws ServiceError (callers
// record a per-entry error).
std::vector<FrameAnnotation> annotate(const std::string& question,
                                      const std::vector<align::EvokedFrame>& evoked,
                                      const framenet::FrameInventory& inventory,
                                      AnnotatorBackend& backend);

// ---- linking unfilled elements to query unknowns ----

struct UnknownLink {
    std::string frame_id;
    std::string element_name;
    std::string variable;  // projection variable name, no '?'
};

struct UnknownLinks {
    sparql::QueryForm form = sparql::QueryForm::other;
    std::vector<UnknownLink> pairs;
    std::vector<std::string> unpaired_elements;   // surplus unfilled core elements
    std::vector<std::string> unpaired_variables;  // surplus projection variables
    bool ask_flag = false;
    bool fully_grounded = false;  // ASK with no unfilled core elements
};

// Pairs unfilled core elements with SELECT projection variables positionally;
// ASK queries get a grounded-statement flag instead.
UnknownLinks link_unfilled_to_unknowns(const std::vector<FrameAnnotation>& annotations,
                                       const std::string& query,
                                       const framenet::FrameInventory& inventory);

// ---- serialization ----

nlohmann::json annotation_to_json(const FrameAnnotation& a);
FrameAnnotation annotation_from_json(const nlohmann::json& j);
nlohmann::json unknown_links_to_json(const UnknownLinks& links);
UnknownLinks unknown_links_from_json(const nlohmann::json& j);

}  // namespace frase::argmap
