#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "frase/embedindex.hpp"
#include "frase/kbclient.hpp"

namespace frase::align {

struct AlignConfig {
    std::size_t k = 1;
    double threshold = 0.0;     // cosine floor; top-1 always accepted at 0.0
    bool dedupe_frames = true;  // keep max score per frame id
};

struct EvokedFrame {
    std::string frame_id;
    std::string triggering_uri;
    double score = 0.0;
};

// Descriptor lookup the aligner depends on; throws ServiceError on failure.
using DescriptorSource = std::function<kb::KbDescriptor(const std::string& uri,
                                                        kb::DescriptorKind kind)>;

struct DetectionResult {
    std::vector<EvokedFrame> frames;        // score desc, then frame id
    std::vector<std::string> skipped_uris;  // not_found / missing label
    std::size_t below_threshold = 0;
};

// Algorithm: extract relation/class URIs from the query, render each cached
// descriptor to text, embed it, run top-k cosine search over the frame index,
// and keep hits scoring at least the threshold.
DetectionResult detect_frames(const std::string& query, const embed::VectorIndex& index,
                              const DescriptorSource& kb, embed::EmbeddingProvider& provider,
                              const AlignConfig& cfg);

struct EntryAlignment {
    std::string uid;
    std::vector<EvokedFrame> frames;
    std::vector<std::string> skipped_uris;
    std::size_t below_threshold = 0;
    std::optional<std::string> error;  // per-entry fault isolation
};

struct AlignmentStats {
    std::size_t entries = 0;
    std::size_t entries_with_error = 0;
    std::size_t skipped_uris = 0;
    std::size_t below_threshold = 0;
    std::size_t evoked_total = 0;
};

struct CorpusEntryRef {
    std::string uid;
    std::string sparql;
};

struct CorpusAlignment {
    std::vector<EntryAlignment> entries;  // same order as the input corpus
    AlignmentStats stats;
};

// Fan-out over entries with a bounded worker pool; output order matches input
// order regardless of scheduling. A failing entry never aborts the corpus.
CorpusAlignment align_corpus(const std::vector<CorpusEntryRef>& entries,
                             const embed::VectorIndex& index, const DescriptorSource& kb,
                             embed::EmbeddingProvider& provider, const AlignConfig& cfg,
                             std::size_t concurrency = 4);

// JSON-lines record: {uid, frames:[{frame_id, triggering_uri, score}],
// skipped:[...], error: null | string}
std::string entry_alignment_to_json_line(const EntryAlignment& entry);
EntryAlignment entry_alignment_from_json(const std::string& line);

}  // namespace frase::align
