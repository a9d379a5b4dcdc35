#include "frase/framealign.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

#include "frase/common.hpp"
#include "frase/jsonio.hpp"
#include "frase/sparqltool.hpp"

namespace frase::align {

DetectionResult detect_frames(const std::string& query, const embed::VectorIndex& index,
                              const DescriptorSource& kb, embed::EmbeddingProvider& provider,
                              const AlignConfig& cfg) {
    if (cfg.k == 0) throw InputError("align: k must be >= 1");
    DetectionResult result;

    sparql::ExtractedUris uris = sparql::extract_uris(query);
    std::vector<std::pair<std::string, kb::DescriptorKind>> targets;
    for (const auto& u : uris.relations) targets.emplace_back(u, kb::DescriptorKind::relation);
    for (const auto& u : uris.classes) targets.emplace_back(u, kb::DescriptorKind::klass);

    std::vector<EvokedFrame> candidates;
    for (const auto& [uri, kind] : targets) {
        kb::KbDescriptor descriptor = kb(uri, kind);
        if (descriptor.status == kb::DescriptorStatus::not_found || descriptor.label.empty()) {
            result.skipped_uris.push_back(uri);
            continue;
        }
        kb::RenderedText rendered = kb::render_descriptor_text(descriptor);
        embed::EmbeddingVector vec = embed::embed_text(provider, rendered.text);
        for (const embed::SearchHit& hit : index.search(vec, cfg.k)) {
            if (hit.score >= cfg.threshold)
                candidates.push_back({hit.item_id, uri, hit.score});
            else
                result.below_threshold++;
        }
    }

    if (cfg.dedupe_frames) {
        std::map<std::string, EvokedFrame> best;
        for (const EvokedFrame& f : candidates) {
            auto it = best.find(f.frame_id);
            if (it == best.end() || f.score > it->second.score) best[f.frame_id] = f;
        }
        candidates.clear();
        for (auto& [_, f] : best) candidates.push_back(f);
    }

    std::sort(candidates.begin(), candidates.end(), [](const EvokedFrame& a, const EvokedFrame& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.frame_id != b.frame_id) return a.frame_id < b.frame_id;
        return a.triggering_uri < b.triggering_uri;
    });
    result.frames = std::move(candidates);
    return result;
}

CorpusAlignment align_corpus(const std::vector<CorpusEntryRef>& entries,
                             const embed::VectorIndex& index, const DescriptorSource& kb,
                             embed::EmbeddingProvider& provider, const AlignConfig& cfg,
                             std::size_t concurrency) {
    CorpusAlignment out;
    out.entries.resize(entries.size());
    if (entries.empty()) return out;

    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = cursor.fetch_add(1);
            if (i >= entries.size()) break;
            EntryAlignment& slot = out.entries[i];
            slot.uid = entries[i].uid;
            try {
                DetectionResult detected =
                    detect_frames(entries[i].sparql, index, kb, provider, cfg);
                slot.frames = std::move(detected.frames);
                slot.skipped_uris = std::move(detected.skipped_uris);
                slot.below_threshold = detected.below_threshold;
            } catch (const std::exception& e) {
                slot.error = e.what();
            }
        }
    };

    std::size_t workers = std::max<std::size_t>(1, std::min(concurrency, entries.size()));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (const EntryAlignment& entry : out.entries) {
        out.stats.entries++;
        if (entry.error) out.stats.entries_with_error++;
        out.stats.skipped_uris += entry.skipped_uris.size();
        out.stats.below_threshold += entry.below_threshold;
        out.stats.evoked_total += entry.frames.size();
    }
    return out;
}

std::string entry_alignment_to_json_line(const EntryAlignment& entry) {
    json frames = json::array();
    for (const EvokedFrame& f : entry.frames)
        frames.push_back(
            {{"frame_id", f.frame_id}, {"triggering_uri", f.triggering_uri}, {"score", f.score}});
    json record = {{"uid", entry.uid},
                   {"frames", frames},
                   {"skipped", entry.skipped_uris},
                   {"error", entry.error ? json(*entry.error) : json(nullptr)}};
    return record.dump();
}

EntryAlignment entry_alignment_from_json(const std::string& line) {
    json record = json::parse(line);
    EntryAlignment entry;
    entry.uid = record.at("uid").get<std::string>();
    for (const auto& f : record.value("frames", json::array()))
        entry.frames.push_back({f.at("frame_id").get<std::string>(),
                                f.value("triggering_uri", ""), f.value("score", 0.0)});
    entry.skipped_uris = record.value("skipped", std::vector<std::string>{});
    if (record.contains("error") && !record["error"].is_null())
        entry.error = record["error"].get<std::string>();
    return entry;
}

}  // namespace frase::align
