#include "frase/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "frase/common.hpp"
#include "frase/jsonio.hpp"
#include "frase/sparqltool.hpp"

namespace frase::dataset {

namespace {

std::string json_field_as_string(const json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    if (j.is_number()) return std::to_string(j.get<double>());
    return j.dump();
}

std::optional<std::string> optional_string(const json& record, const char* key) {
    if (!record.contains(key) || record[key].is_null()) return std::nullopt;
    std::string v = json_field_as_string(record[key]);
    if (trim(v).empty() || v == "NA" || v == "n/a") return std::nullopt;
    return v;
}

}  // namespace

std::vector<Lcq2Entry> load_lcq2(const std::filesystem::path& path) {
    std::vector<json> records = read_json_records(path);
    std::vector<Lcq2Entry> entries;
    entries.reserve(records.size());
    std::set<std::string> seen_uids;

    for (std::size_t i = 0; i < records.size(); ++i) {
        const json& r = records[i];
        if (!r.is_object())
            throw InputError("LCQ2 record " + std::to_string(i) + ": not an object");
        Lcq2Entry e;
        auto uid = optional_string(r, "uid");
        if (!uid) throw InputError("LCQ2 record " + std::to_string(i) + ": missing uid");
        e.uid = *uid;
        if (!seen_uids.insert(e.uid).second)
            throw InputError("LCQ2 record " + std::to_string(i) + ": duplicate uid " + e.uid);

        auto raw = optional_string(r, "raw_question");
        if (!raw) raw = optional_string(r, "question");
        if (!raw) raw = optional_string(r, "NNQT_question");
        if (!raw)
            throw InputError("LCQ2 record " + std::to_string(i) + ": missing question");
        e.raw_question = *raw;

        e.reformulated_question = optional_string(r, "reformulated_question");
        if (!e.reformulated_question)
            e.reformulated_question = optional_string(r, "paraphrased_question");

        auto sparql_text = optional_string(r, "sparql");
        if (!sparql_text) sparql_text = optional_string(r, "sparql_wikidata");
        if (!sparql_text)
            throw InputError("LCQ2 record " + std::to_string(i) + ": missing sparql");
        e.sparql = *sparql_text;

        auto tpl = optional_string(r, "template_id");
        if (!tpl) tpl = optional_string(r, "template_index");
        if (!tpl) tpl = optional_string(r, "template");
        if (tpl) {
            e.template_id = *tpl;
        } else {
            // derive from the query shape
            e.template_id = "tpl:" + to_hex(fnv1a64(
                                sparql::extract_template(e.sparql).canonical_text));
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<Lcq3Entry> build_lcq3(
    const std::vector<Lcq2Entry>& entries,
    const std::map<std::string, align::EntryAlignment>& alignments,
    const std::map<std::string, std::vector<argmap::FrameAnnotation>>& annotations,
    const std::map<std::string, argmap::UnknownLinks>& links, const std::string& version,
    const std::string& config_hash) {
    std::set<std::string> known;
    for (const auto& e : entries) known.insert(e.uid);
    for (const auto& [uid, _] : alignments)
        if (!known.count(uid)) throw InputError("alignment output for unknown uid " + uid);
    for (const auto& [uid, _] : annotations)
        if (!known.count(uid)) throw InputError("annotation output for unknown uid " + uid);

    std::vector<Lcq3Entry> out;
    out.reserve(entries.size());
    for (const Lcq2Entry& base : entries) {
        Lcq3Entry e;
        e.base = base;
        e.provenance_version = version;
        e.provenance_config_hash = config_hash;
        auto a = alignments.find(base.uid);
        if (a != alignments.end()) e.evoked = a->second.frames;
        auto ann = annotations.find(base.uid);
        if (ann != annotations.end()) {
            std::set<std::string> evoked_ids;
            for (const auto& f : e.evoked) evoked_ids.insert(f.frame_id);
            for (const auto& annotation : ann->second)
                if (!evoked_ids.count(annotation.frame_id))
                    throw InputError("entry " + base.uid + ": annotation for frame '" +
                                     annotation.frame_id + "' that was never evoked");
            e.annotations = ann->second;
        } else {
            e.annotation_missing = true;
        }
        auto l = links.find(base.uid);
        if (l != links.end()) e.unknown_links = l->second;
        out.push_back(std::move(e));
    }
    return out;
}

json lcq3_to_json(const Lcq3Entry& e) {
    json evoked = json::array();
    for (const auto& f : e.evoked)
        evoked.push_back(
            {{"frame_id", f.frame_id}, {"triggering_uri", f.triggering_uri}, {"score", f.score}});
    json annotations = json::array();
    for (const auto& a : e.annotations) annotations.push_back(argmap::annotation_to_json(a));
    json record = {{"uid", e.base.uid},
                   {"raw_question", e.base.raw_question},
                   {"sparql", e.base.sparql},
                   {"template_id", e.base.template_id},
                   {"evoked", evoked},
                   {"annotations", annotations},
                   {"unknown_links", argmap::unknown_links_to_json(e.unknown_links)},
                   {"provenance",
                    {{"version", e.provenance_version}, {"config_hash", e.provenance_config_hash}}},
                   {"annotation_missing", e.annotation_missing}};
    if (e.base.reformulated_question)
        record["reformulated_question"] = *e.base.reformulated_question;
    return record;
}

Lcq3Entry lcq3_from_json(const json& j) {
    Lcq3Entry e;
    e.base.uid = json_field_as_string(j.at("uid"));
    e.base.raw_question = j.at("raw_question").get<std::string>();
    if (j.contains("reformulated_question") && !j["reformulated_question"].is_null())
        e.base.reformulated_question = j["reformulated_question"].get<std::string>();
    e.base.sparql = j.at("sparql").get<std::string>();
    e.base.template_id = j.value("template_id", "");
    for (const auto& f : j.value("evoked", json::array()))
        e.evoked.push_back({f.at("frame_id").get<std::string>(), f.value("triggering_uri", ""),
                            f.value("score", 0.0)});
    for (const auto& a : j.value("annotations", json::array()))
        e.annotations.push_back(argmap::annotation_from_json(a));
    if (j.contains("unknown_links"))
        e.unknown_links = argmap::unknown_links_from_json(j["unknown_links"]);
    if (j.contains("provenance")) {
        e.provenance_version = j["provenance"].value("version", "");
        e.provenance_config_hash = j["provenance"].value("config_hash", "");
    }
    e.annotation_missing = j.value("annotation_missing", false);
    return e;
}

std::vector<Lcq3Entry> load_lcq3(const std::filesystem::path& path) {
    std::vector<Lcq3Entry> out;
    for_each_jsonl(path, [&](const json& r, std::size_t) { out.push_back(lcq3_from_json(r)); });
    return out;
}

const char* subset_to_string(Subset s) {
    switch (s) {
        case Subset::train: return "train";
        case Subset::validation: return "validation";
        default: return "test";
    }
}

Variant variant_from_string(const std::string& s) {
    if (s == "raw") return Variant::raw;
    if (s == "reformulated") return Variant::reformulated;
    if (s == "combined") return Variant::combined;
    throw UsageError("unknown variant '" + s + "' (raw|reformulated|combined)");
}

const char* variant_to_string(Variant v) {
    switch (v) {
        case Variant::raw: return "raw";
        case Variant::reformulated: return "reformulated";
        default: return "combined";
    }
}

std::size_t SplitSpec::count(Subset s) const {
    std::size_t n = 0;
    for (const auto& [_, subset] : assignments)
        if (subset == s) ++n;
    return n;
}

namespace {

// 80/10/10 by count; floor then hand leftover seats to test, then validation.
std::array<std::size_t, 3> split_counts(std::size_t n) {
    std::array<std::size_t, 3> counts = {n * 8 / 10, n / 10, n / 10};
    std::size_t assigned = counts[0] + counts[1] + counts[2];
    std::size_t leftover = n - assigned;
    // fractional remainders of 0.8n/0.1n/0.1n in tenths
    std::array<std::size_t, 3> rem = {(n * 8) % 10, n % 10, n % 10};
    std::array<int, 3> order = {2, 1, 0};  // test, validation, train on ties
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return rem[static_cast<std::size_t>(a)] >
                                                rem[static_cast<std::size_t>(b)]; });
    for (std::size_t i = 0; leftover > 0; i = (i + 1) % 3) {
        counts[static_cast<std::size_t>(order[i])]++;
        --leftover;
    }
    return counts;
}

std::vector<std::string> shuffled_uids(const std::vector<Lcq2Entry>& entries,
                                       std::uint64_t seed) {
    std::vector<std::string> uids;
    uids.reserve(entries.size());
    for (const auto& e : entries) uids.push_back(e.uid);
    std::mt19937_64 rng(seed);
    std::shuffle(uids.begin(), uids.end(), rng);
    return uids;
}

}  // namespace

SplitSpec make_original_split(const std::vector<Lcq2Entry>& entries, std::uint64_t seed) {
    if (entries.empty()) throw InputError("cannot split an empty corpus");
    auto counts = split_counts(entries.size());
    return make_original_split_with_counts(entries, seed, counts[0], counts[1], counts[2]);
}

SplitSpec make_original_split_with_counts(const std::vector<Lcq2Entry>& entries,
                                          std::uint64_t seed, std::size_t train_count,
                                          std::size_t val_count, std::size_t test_count) {
    if (train_count + val_count + test_count != entries.size())
        throw InputError("split counts " + std::to_string(train_count) + "/" +
                         std::to_string(val_count) + "/" + std::to_string(test_count) +
                         " do not sum to " + std::to_string(entries.size()));
    SplitSpec spec;
    spec.name = SplitName::original;
    spec.seed = seed;
    std::vector<std::string> uids = shuffled_uids(entries, seed);
    for (std::size_t i = 0; i < uids.size(); ++i) {
        Subset s = i < train_count                ? Subset::train
                   : i < train_count + val_count ? Subset::validation
                                                  : Subset::test;
        spec.assignments.emplace(uids[i], s);
    }
    return spec;
}

namespace {

struct TemplateGroup {
    std::string template_id;
    std::vector<std::string> uids;  // input order
};

// Picks the subset of `k` group indices whose entry total is closest to
// `target`. Exhaustive (lexicographic-first among ties) when the search space
// is small; seeded sampling plus swap hill-climbing otherwise.
std::vector<std::size_t> pick_closest_subset(const std::vector<std::size_t>& sizes,
                                             std::size_t k, long long target,
                                             std::uint64_t seed) {
    const std::size_t n = sizes.size();
    auto total_of = [&](const std::vector<std::size_t>& subset) {
        long long t = 0;
        for (std::size_t i : subset) t += static_cast<long long>(sizes[i]);
        return t;
    };

    double log_space = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        log_space += std::log2(static_cast<double>(n - i) / static_cast<double>(i + 1));
    if (log_space <= 20.0) {  // <= ~1M combinations: enumerate
        std::vector<std::size_t> indices(k);
        std::iota(indices.begin(), indices.end(), 0);
        std::vector<std::size_t> best = indices;
        long long best_dist = std::llabs(total_of(indices) - target);
        while (true) {
            // next combination
            std::size_t i = k;
            while (i > 0) {
                --i;
                if (indices[i] != i + n - k) break;
            }
            if (indices[i] == i + n - k) break;
            ++indices[i];
            for (std::size_t j = i + 1; j < k; ++j) indices[j] = indices[j - 1] + 1;
            long long dist = std::llabs(total_of(indices) - target);
            if (dist < best_dist) {
                best_dist = dist;
                best = indices;
            }
        }
        return best;
    }

    // randomized: seeded samples + swap improvement
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::vector<std::size_t> best;
    long long best_dist = -1;
    for (int round = 0; round < 64; ++round) {
        std::vector<std::size_t> pool = all;
        std::shuffle(pool.begin(), pool.end(), rng);
        std::vector<std::size_t> subset(pool.begin(),
                                        pool.begin() + static_cast<std::ptrdiff_t>(k));
        std::sort(subset.begin(), subset.end());
        bool improved = true;
        while (improved) {
            improved = false;
            long long current = total_of(subset);
            std::set<std::size_t> in(subset.begin(), subset.end());
            for (std::size_t& member : subset) {
                for (std::size_t candidate : all) {
                    if (in.count(candidate)) continue;
                    long long swapped = current - static_cast<long long>(sizes[member]) +
                                        static_cast<long long>(sizes[candidate]);
                    if (std::llabs(swapped - target) < std::llabs(current - target)) {
                        in.erase(member);
                        in.insert(candidate);
                        member = candidate;
                        current = swapped;
                        improved = true;
                        break;
                    }
                }
            }
        }
        long long dist = std::llabs(total_of(subset) - target);
        if (best_dist < 0 || dist < best_dist) {
            best_dist = dist;
            std::sort(subset.begin(), subset.end());
            best = subset;
        }
    }
    return best;
}

// Best subset of the held-out groups for validation: any size 0..h-1, closest
// entry total to target; enumeration order is size-ascending, lexicographic.
std::vector<std::size_t> pick_validation_side(const std::vector<std::size_t>& sizes,
                                              long long target) {
    const std::size_t h = sizes.size();
    std::vector<std::size_t> best;  // empty set
    long long best_dist = std::llabs(target);
    if (h > 25) return best;  // guard; not reachable with realistic template counts
    for (std::size_t k = 1; k < h; ++k) {
        std::vector<std::size_t> indices(k);
        std::iota(indices.begin(), indices.end(), 0);
        while (true) {
            long long total = 0;
            for (std::size_t i : indices) total += static_cast<long long>(sizes[i]);
            if (std::llabs(total - target) < best_dist) {
                best_dist = std::llabs(total - target);
                best = indices;
            }
            std::size_t i = k;
            while (i > 0) {
                --i;
                if (indices[i] != i + h - k) break;
            }
            if (indices[i] == i + h - k) break;
            ++indices[i];
            for (std::size_t j = i + 1; j < k; ++j) indices[j] = indices[j - 1] + 1;
        }
    }
    return best;
}

}  // namespace

SplitSpec make_unknown_template_split(const std::vector<Lcq2Entry>& entries, std::uint64_t seed,
                                      const UnknownTemplateOptions& opts) {
    if (entries.empty()) throw InputError("cannot split an empty corpus");
    for (const auto& e : entries)
        if (e.template_id.empty())
            throw InputError("entry " + e.uid + " lacks a template_id");

    // group by template, deterministic id order
    std::map<std::string, TemplateGroup> by_template;
    for (const auto& e : entries) {
        auto& group = by_template[e.template_id];
        group.template_id = e.template_id;
        group.uids.push_back(e.uid);
    }
    if (by_template.size() < 3)
        throw InputError("unknown-template split needs at least 3 template groups, got " +
                         std::to_string(by_template.size()));

    std::vector<TemplateGroup> groups;
    groups.reserve(by_template.size());
    for (auto& [_, g] : by_template) groups.push_back(std::move(g));

    const std::size_t total = entries.size();
    const std::size_t n_templates = groups.size();
    std::size_t holdout_templates = static_cast<std::size_t>(
        std::llround(opts.holdout_fraction * static_cast<double>(n_templates)));
    holdout_templates = std::clamp<std::size_t>(holdout_templates, 1, n_templates - 1);

    std::vector<std::size_t> sizes;
    sizes.reserve(n_templates);
    for (const auto& g : groups) sizes.push_back(g.uids.size());

    long long holdout_target =
        std::llround(opts.holdout_fraction * static_cast<double>(total));
    std::vector<std::size_t> held =
        pick_closest_subset(sizes, holdout_templates, holdout_target, seed);

    std::set<std::size_t> held_set(held.begin(), held.end());

    SplitSpec spec;
    spec.name = SplitName::unknown_template;
    spec.seed = seed;

    if (opts.relax_validation_disjointness) {
        // all held-out entries go to test; validation is a seeded carve of the
        // train side (template overlap with train allowed by design)
        std::vector<std::string> train_uids;
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            if (held_set.count(gi)) {
                for (const auto& uid : groups[gi].uids)
                    spec.assignments.emplace(uid, Subset::test);
            } else {
                for (const auto& uid : groups[gi].uids) train_uids.push_back(uid);
            }
        }
        std::mt19937_64 rng(seed);
        std::shuffle(train_uids.begin(), train_uids.end(), rng);
        std::size_t val_count = static_cast<std::size_t>(
            std::llround(opts.validation_fraction * static_cast<double>(total)));
        val_count = std::min(val_count, train_uids.size());
        for (std::size_t i = 0; i < train_uids.size(); ++i)
            spec.assignments.emplace(train_uids[i],
                                     i < val_count ? Subset::validation : Subset::train);
        return spec;
    }

    // partition held-out templates between validation and test
    std::vector<std::size_t> held_sizes;
    for (std::size_t gi : held) held_sizes.push_back(sizes[gi]);
    long long val_target =
        std::llround(opts.validation_fraction * static_cast<double>(total));
    std::vector<std::size_t> val_local = pick_validation_side(held_sizes, val_target);
    std::set<std::size_t> val_set;
    for (std::size_t li : val_local) val_set.insert(held[li]);

    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        Subset subset = !held_set.count(gi) ? Subset::train
                        : val_set.count(gi) ? Subset::validation
                                            : Subset::test;
        for (const auto& uid : groups[gi].uids) spec.assignments.emplace(uid, subset);
    }
    return spec;
}

void save_split(const SplitSpec& split, const std::filesystem::path& path) {
    json assignments = json::object();
    for (const auto& [uid, subset] : split.assignments)
        assignments[uid] = subset_to_string(subset);
    json doc = {{"name", split.name == SplitName::original ? "original" : "unknown_template"},
                {"variant", variant_to_string(split.variant)},
                {"seed", split.seed},
                {"assignments", assignments}};
    write_file_atomic(path, doc.dump(2) + "\n");
}

SplitSpec load_split(const std::filesystem::path& path) {
    json doc = json::parse(read_file(path));
    SplitSpec split;
    split.name = doc.value("name", "original") == std::string("unknown_template")
                     ? SplitName::unknown_template
                     : SplitName::original;
    split.variant = variant_from_string(doc.value("variant", "raw"));
    split.seed = doc.value("seed", 0ULL);
    for (const auto& [uid, subset] : doc.at("assignments").items()) {
        std::string s = subset.get<std::string>();
        split.assignments.emplace(uid, s == "train"        ? Subset::train
                                       : s == "validation" ? Subset::validation
                                                           : Subset::test);
    }
    return split;
}

const std::vector<MaterializedRecord>& MaterializedSplit::subset(Subset s) const {
    switch (s) {
        case Subset::train: return train;
        case Subset::validation: return validation;
        default: return test;
    }
}

MaterializedSplit make_variant(const std::vector<Lcq2Entry>& entries, const SplitSpec& split,
                               Variant variant) {
    MaterializedSplit out;
    auto bucket = [&](Subset s) -> std::vector<MaterializedRecord>& {
        switch (s) {
            case Subset::train: return out.train;
            case Subset::validation: return out.validation;
            default: return out.test;
        }
    };
    for (const Lcq2Entry& e : entries) {
        auto it = split.assignments.find(e.uid);
        if (it == split.assignments.end())
            throw InputError("entry " + e.uid + " missing from split assignments");
        std::vector<MaterializedRecord>& dst = bucket(it->second);
        switch (variant) {
            case Variant::raw:
                dst.push_back({e.uid, e.uid, e.raw_question, e.sparql, e.template_id});
                break;
            case Variant::reformulated:
                if (e.reformulated_question)
                    dst.push_back(
                        {e.uid, e.uid, *e.reformulated_question, e.sparql, e.template_id});
                else
                    out.dropped_missing_reformulation++;
                break;
            case Variant::combined:
                dst.push_back({e.uid + "#raw", e.uid, e.raw_question, e.sparql, e.template_id});
                if (e.reformulated_question)
                    dst.push_back({e.uid + "#ref", e.uid, *e.reformulated_question, e.sparql,
                                   e.template_id});
                else
                    out.dropped_missing_reformulation++;
                break;
        }
    }
    return out;
}

namespace {

SubsetStats subset_stats(const std::vector<MaterializedRecord>& records,
                         const std::set<std::string>& train_templates) {
    SubsetStats stats;
    stats.entries = records.size();
    if (records.empty()) return stats;
    std::set<std::string> templates;
    std::size_t total_len = 0;
    stats.min_query_length = std::numeric_limits<std::size_t>::max();
    for (const auto& r : records) {
        templates.insert(r.template_id);
        std::size_t len = sparql::query_length(r.sparql);
        total_len += len;
        stats.min_query_length = std::min(stats.min_query_length, len);
        stats.max_query_length = std::max(stats.max_query_length, len);
        stats.length_histogram[len]++;
    }
    stats.templates = templates.size();
    for (const auto& t : templates)
        if (!train_templates.count(t)) stats.unseen_templates++;
    stats.mean_query_length =
        static_cast<double>(total_len) / static_cast<double>(records.size());
    return stats;
}

}  // namespace

StatsReport split_stats(const MaterializedSplit& split) {
    std::set<std::string> train_templates;
    for (const auto& r : split.train) train_templates.insert(r.template_id);
    StatsReport report;
    report.train = subset_stats(split.train, train_templates);
    report.validation = subset_stats(split.validation, train_templates);
    report.test = subset_stats(split.test, train_templates);
    return report;
}

std::string StatsReport::to_table() const {
    std::ostringstream out;
    auto row = [&](const char* name, const SubsetStats& s) {
        out << name << '\t' << s.entries << '\t' << s.templates << '\t' << s.unseen_templates
            << '\t' << s.min_query_length << '\t';
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", s.mean_query_length);
        out << buf << '\t' << s.max_query_length << '\n';
    };
    out << "subset\tentries\ttemplates\tunseen\tmin_len\tmean_len\tmax_len\n";
    row("train", train);
    row("validation", validation);
    row("test", test);
    return out.str();
}

std::string StatsReport::to_csv() const {
    std::ostringstream out;
    out << "subset,entries,templates,unseen_templates,min_query_length,mean_query_length,"
           "max_query_length\n";
    auto row = [&](const char* name, const SubsetStats& s) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", s.mean_query_length);
        out << name << ',' << s.entries << ',' << s.templates << ',' << s.unseen_templates << ','
            << s.min_query_length << ',' << buf << ',' << s.max_query_length << '\n';
    };
    row("train", train);
    row("validation", validation);
    row("test", test);
    // histogram rows for plotting
    auto hist = [&](const char* name, const SubsetStats& s) {
        for (const auto& [len, count] : s.length_histogram)
            out << "hist_" << name << ',' << len << ',' << count << ",,,,\n";
    };
    hist("train", train);
    hist("validation", validation);
    hist("test", test);
    return out.str();
}

std::string serialize_annotations(const std::vector<argmap::FrameAnnotation>& annotations) {
    // order-preserving serialization: frames in annotation order, elements in
    // mapping order
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& a : annotations) {
        nlohmann::ordered_json entry;
        entry["frame"] = a.frame_id;
        nlohmann::ordered_json elements = nlohmann::ordered_json::object();
        for (const auto& m : a.mappings) elements[m.element_name] = m.span_text;
        entry["elements"] = elements;
        entry["unfilled"] = a.unfilled;
        arr.push_back(entry);
    }
    return "Frames: " + arr.dump();
}

PromptRecord build_prompt(const MaterializedRecord& record,
                          const std::vector<argmap::FrameAnnotation>& annotations,
                          bool with_frames) {
    PromptRecord p;
    p.instruction = "Generate a SPARQL query corresponding to the input question.";
    p.input = record.question;
    if (with_frames) p.input += "\n" + serialize_annotations(annotations);
    p.output = record.sparql;
    return p;
}

json prompt_to_json(const PromptRecord& p) {
    return {{"instruction", p.instruction}, {"input", p.input}, {"output", p.output}};
}

}  // namespace frase::dataset
