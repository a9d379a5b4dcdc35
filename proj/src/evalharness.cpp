#include "frase/evalharness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "frase/common.hpp"
#include "frase/jsonio.hpp"

namespace frase::eval {

std::vector<std::string> bleu_tokenize(const std::string& text) {
    std::string padded;
    padded.reserve(text.size() * 2);
    for (char c : text) {
        if (c == '{' || c == '}' || c == '(' || c == ')' || c == '.' || c == ',' || c == ';') {
            padded.push_back(' ');
            padded.push_back(c);
            padded.push_back(' ');
        } else {
            padded.push_back(c);
        }
    }
    return split_whitespace(padded);
}

namespace {

constexpr int kMaxOrder = 4;

struct NgramCounts {
    // matches[n-1], totals[n-1] for n-gram order n
    std::array<long, kMaxOrder> matches{};
    std::array<long, kMaxOrder> totals{};
    long candidate_len = 0;
    long reference_len = 0;
};

std::map<std::string, long> ngram_histogram(const std::vector<std::string>& tokens, int n) {
    std::map<std::string, long> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (int j = 1; j < n; ++j) {
            key.push_back('\x1f');
            key += tokens[i + static_cast<std::size_t>(j)];
        }
        counts[key]++;
    }
    return counts;
}

NgramCounts accumulate_counts(const std::vector<std::string>& cand,
                              const std::vector<std::string>& ref) {
    NgramCounts c;
    c.candidate_len = static_cast<long>(cand.size());
    c.reference_len = static_cast<long>(ref.size());
    for (int n = 1; n <= kMaxOrder; ++n) {
        auto cand_ngrams = ngram_histogram(cand, n);
        auto ref_ngrams = ngram_histogram(ref, n);
        long total = 0, matched = 0;
        for (const auto& [gram, count] : cand_ngrams) {
            total += count;
            auto it = ref_ngrams.find(gram);
            if (it != ref_ngrams.end()) matched += std::min(count, it->second);  // clipping
        }
        c.totals[static_cast<std::size_t>(n - 1)] = total;
        c.matches[static_cast<std::size_t>(n - 1)] = matched;
    }
    return c;
}

double bleu_from_counts(const NgramCounts& c) {
    if (c.candidate_len == 0) return 0.0;
    if (c.matches[0] == 0) return 0.0;  // no unigram overlap
    double log_sum = std::log(static_cast<double>(c.matches[0]) /
                              static_cast<double>(c.totals[0]));
    for (int n = 2; n <= kMaxOrder; ++n) {
        // add-one smoothing on higher orders; also covers totals == 0
        double p = (static_cast<double>(c.matches[static_cast<std::size_t>(n - 1)]) + 1.0) /
                   (static_cast<double>(c.totals[static_cast<std::size_t>(n - 1)]) + 1.0);
        log_sum += std::log(p);
    }
    double geo_mean = std::exp(log_sum / kMaxOrder);
    double bp = c.candidate_len >= c.reference_len
                    ? 1.0
                    : std::exp(1.0 - static_cast<double>(c.reference_len) /
                                         static_cast<double>(c.candidate_len));
    return 100.0 * bp * geo_mean;
}

}  // namespace

double bleu(const std::string& candidate, const std::string& reference) {
    return bleu_from_counts(accumulate_counts(bleu_tokenize(candidate),
                                              bleu_tokenize(reference)));
}

CorpusBleu corpus_bleu(const std::vector<std::pair<std::string, std::string>>& pairs) {
    CorpusBleu out;
    if (pairs.empty()) return out;
    NgramCounts pooled;
    double sentence_sum = 0.0;
    for (const auto& [cand, ref] : pairs) {
        NgramCounts c = accumulate_counts(bleu_tokenize(cand), bleu_tokenize(ref));
        for (std::size_t i = 0; i < kMaxOrder; ++i) {
            pooled.matches[i] += c.matches[i];
            pooled.totals[i] += c.totals[i];
        }
        pooled.candidate_len += c.candidate_len;
        pooled.reference_len += c.reference_len;
        sentence_sum += bleu_from_counts(c);
    }
    out.pooled = bleu_from_counts(pooled);
    out.mean_sentence = sentence_sum / static_cast<double>(pairs.size());
    return out;
}

// ---- answer sets ----

std::set<std::string> AnswerSet::as_set() const {
    if (kind == AnswerKind::boolean) return {boolean_value ? "true" : "false"};
    return values;
}

namespace {

std::string local_name(const std::string& uri) {
    std::size_t pos = uri.find_last_of("/#");
    return pos == std::string::npos ? uri : uri.substr(pos + 1);
}

std::string canonical_binding(const nlohmann::json& binding) {
    std::string type = binding.value("type", "");
    std::string value = binding.value("value", "");
    if (type == "uri") return local_name(value);
    if (type == "bnode") return "_:" + value;
    // literal (typed or plain)
    if (binding.contains("datatype"))
        return value + "^^" + local_name(binding["datatype"].get<std::string>());
    if (binding.contains("xml:lang"))
        return value + "@" + binding["xml:lang"].get<std::string>();
    return value;
}

}  // namespace

AnswerSet canonicalize_results(const nlohmann::json& results) {
    AnswerSet out;
    if (results.contains("boolean")) {
        out.kind = AnswerKind::boolean;
        out.boolean_value = results["boolean"].get<bool>();
        return out;
    }
    out.kind = AnswerKind::bindings;
    std::vector<std::string> vars;
    if (results.contains("head") && results["head"].contains("vars"))
        vars = results["head"]["vars"].get<std::vector<std::string>>();
    if (!results.contains("results") || !results["results"].contains("bindings"))
        throw InputError("not a SPARQL JSON results document");
    for (const auto& row : results["results"]["bindings"]) {
        std::string tuple;
        bool first = true;
        // vars order from the header keeps tuples comparable across queries
        for (const auto& var : vars) {
            if (!first) tuple.push_back('\x1f');
            first = false;
            if (row.contains(var)) tuple += canonical_binding(row[var]);
        }
        if (vars.empty()) {  // defensive: serialize whatever is present
            for (const auto& [_, binding] : row.items()) {
                if (!first) tuple.push_back('\x1f');
                first = false;
                tuple += canonical_binding(binding);
            }
        }
        out.values.insert(tuple);
    }
    return out;
}

const char* exec_status_to_string(ExecStatus s) {
    switch (s) {
        case ExecStatus::ok: return "ok";
        case ExecStatus::exec_error: return "exec_error";
        case ExecStatus::timeout: return "timeout";
        case ExecStatus::malformed: return "malformed";
        default: return "missing";
    }
}

// ---- cache ----

namespace {

nlohmann::json execution_to_json(const ExecutionResult& r) {
    nlohmann::json j = {{"status", exec_status_to_string(r.status)}, {"error", r.error}};
    if (r.answers.kind == AnswerKind::boolean) {
        j["kind"] = "boolean";
        j["boolean"] = r.answers.boolean_value;
    } else {
        j["kind"] = "bindings";
        j["values"] = r.answers.values;
    }
    return j;
}

ExecutionResult execution_from_json(const nlohmann::json& j) {
    ExecutionResult r;
    std::string status = j.value("status", "ok");
    if (status == "ok") r.status = ExecStatus::ok;
    else if (status == "timeout") r.status = ExecStatus::timeout;
    else if (status == "malformed") r.status = ExecStatus::malformed;
    else if (status == "missing") r.status = ExecStatus::missing;
    else r.status = ExecStatus::exec_error;
    r.error = j.value("error", "");
    if (j.value("kind", "bindings") == std::string("boolean")) {
        r.answers.kind = AnswerKind::boolean;
        r.answers.boolean_value = j.value("boolean", false);
    } else {
        r.answers.kind = AnswerKind::bindings;
        for (const auto& v : j.value("values", nlohmann::json::array()))
            r.answers.values.insert(v.get<std::string>());
    }
    return r;
}

}  // namespace

AnswerCache::AnswerCache(std::filesystem::path backing_file) : path_(std::move(backing_file)) {
    if (std::filesystem::exists(path_)) {
        for_each_jsonl(
            path_,
            [&](const json& record, std::size_t) {
                if (record.contains("key")) entries_[record["key"]] = record.value("result",
                                                                                   json());
            },
            [](const std::string&, std::size_t) {});
    }
}

std::string AnswerCache::key(const std::string& endpoint, const std::string& query) {
    return endpoint + "\x1f" + normalize_whitespace(query);
}

std::optional<ExecutionResult> AnswerCache::find(const std::string& endpoint,
                                                 const std::string& query) const {
    auto it = entries_.find(key(endpoint, query));
    if (it == entries_.end()) return std::nullopt;
    return execution_from_json(it->second);
}

void AnswerCache::put(const std::string& endpoint, const std::string& query,
                      const ExecutionResult& r) {
    entries_[key(endpoint, query)] = execution_to_json(r);
}

void AnswerCache::save() const {
    if (path_.empty()) return;
    std::string out;
    for (const auto& [k, result] : entries_) {
        json record = {{"key", k}, {"result", result}};
        out += record.dump() + "\n";
    }
    write_file_atomic(path_, out);
}

// ---- execution ----

ExecutionResult execute_query(const std::string& endpoint, const std::string& query,
                              const EndpointOptions& opts) {
    if (opts.cache) {
        if (auto hit = opts.cache->find(endpoint, query)) return *hit;
    }
    ExecutionResult result;
    if (trim(query).empty()) {
        result.status = ExecStatus::malformed;
        result.error = "empty query";
        if (opts.cache) opts.cache->put(endpoint, query, result);
        return result;
    }

    std::size_t scheme = endpoint.find("://");
    std::size_t path_pos = scheme == std::string::npos ? endpoint.find('/')
                                                       : endpoint.find('/', scheme + 3);
    std::string base = path_pos == std::string::npos ? endpoint : endpoint.substr(0, path_pos);
    std::string path = path_pos == std::string::npos ? "/" : endpoint.substr(path_pos);

    httplib::Client client(base);
    client.set_connection_timeout(opts.timeout_ms / 1000, (opts.timeout_ms % 1000) * 1000);
    client.set_read_timeout(opts.timeout_ms / 1000, (opts.timeout_ms % 1000) * 1000);

    httplib::Params params{{"query", query}, {"format", "json"}};
    httplib::Headers headers{{"Accept", "application/sparql-results+json"}};

    auto start = std::chrono::steady_clock::now();
    auto res = client.Get(path, params, headers);
    auto elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - start)
                          .count();

    if (!res) {
        bool timed_out = elapsed_ms >= opts.timeout_ms;
        result.status = timed_out ? ExecStatus::timeout : ExecStatus::exec_error;
        result.error = timed_out ? "timed out after " + std::to_string(elapsed_ms) + "ms"
                                 : "endpoint unreachable";
    } else if (res->status == 400) {
        result.status = ExecStatus::malformed;
        result.error = "endpoint rejected query (400)";
    } else if (res->status != 200) {
        result.status = ExecStatus::exec_error;
        result.error = "endpoint error " + std::to_string(res->status);
    } else {
        json body = json::parse(res->body, nullptr, false);
        if (body.is_discarded()) {
            result.status = ExecStatus::exec_error;
            result.error = "unparseable results document";
        } else {
            try {
                result.answers = canonicalize_results(body);
                result.status = ExecStatus::ok;
            } catch (const std::exception& e) {
                result.status = ExecStatus::exec_error;
                result.error = e.what();
            }
        }
    }
    if (opts.cache) opts.cache->put(endpoint, query, result);
    return result;
}

// ---- scoring ----

F1Score answer_f1(const AnswerSet& pred, const AnswerSet& gold) {
    std::set<std::string> p = pred.as_set();
    std::set<std::string> g = gold.as_set();
    if (p.empty() && g.empty()) return {1.0, 1.0, 1.0};  // exact agreement on emptiness
    if (p.empty() || g.empty()) return {0.0, 0.0, 0.0};
    std::size_t inter = 0;
    for (const auto& x : p)
        if (g.count(x)) ++inter;
    double precision = static_cast<double>(inter) / static_cast<double>(p.size());
    double recall = static_cast<double>(inter) / static_cast<double>(g.size());
    double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    return {precision, recall, f1};
}

int answer_accuracy(const AnswerSet& pred, const AnswerSet& gold) {
    return pred.as_set() == gold.as_set() ? 1 : 0;
}

EvalReport evaluate_run(const std::map<std::string, std::string>& predictions,
                        const std::vector<GoldEntry>& gold, const std::string& endpoint,
                        const EvalOptions& opts) {
    std::set<std::string> gold_uids;
    for (const auto& g : gold) gold_uids.insert(g.uid);
    for (const auto& [uid, _] : predictions)
        if (!gold_uids.count(uid)) throw InputError("prediction for unknown uid " + uid);

    EvalReport report;
    report.endpoint = endpoint;
    report.timeout_ms = opts.timeout_ms;
    report.per_entry.resize(gold.size());

    EndpointOptions exec_opts;
    exec_opts.timeout_ms = opts.timeout_ms;
    exec_opts.cache = opts.cache;
    std::mutex cache_mutex;  // cache writes serialized

    auto execute_cached = [&](const std::string& query) {
        if (opts.cache) {
            std::lock_guard<std::mutex> lock(cache_mutex);
            if (auto hit = opts.cache->find(endpoint, query)) return *hit;
        }
        EndpointOptions no_cache = exec_opts;
        no_cache.cache = nullptr;
        ExecutionResult r = execute_query(endpoint, query, no_cache);
        if (opts.cache) {
            std::lock_guard<std::mutex> lock(cache_mutex);
            opts.cache->put(endpoint, query, r);
        }
        return r;
    };

    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = cursor.fetch_add(1);
            if (i >= gold.size()) break;
            const GoldEntry& g = gold[i];
            EntryScore& score = report.per_entry[i];
            score.uid = g.uid;

            ExecutionResult gold_result = execute_cached(g.sparql);
            score.gold_status = gold_result.status;

            auto pred_it = predictions.find(g.uid);
            if (pred_it == predictions.end()) {
                score.pred_status = ExecStatus::missing;
                continue;  // all-zero scores
            }
            score.bleu = bleu(pred_it->second, g.sparql);

            ExecutionResult pred_result = execute_cached(pred_it->second);
            score.pred_status = pred_result.status;
            if (pred_result.status != ExecStatus::ok || gold_result.status != ExecStatus::ok)
                continue;  // execution failures score 0

            F1Score f = answer_f1(pred_result.answers, gold_result.answers);
            score.precision = f.precision;
            score.recall = f.recall;
            score.f1 = f.f1;
            score.accuracy = answer_accuracy(pred_result.answers, gold_result.answers);
            score.both_empty = pred_result.answers.as_set().empty() &&
                               gold_result.answers.as_set().empty();
        }
    };

    std::size_t workers = std::max<std::size_t>(1, std::min(opts.concurrency, gold.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<std::pair<std::string, std::string>> pairs;
    double acc_sum = 0.0, f1_sum = 0.0, bleu_sum = 0.0;
    for (std::size_t i = 0; i < report.per_entry.size(); ++i) {
        const EntryScore& e = report.per_entry[i];
        auto pred_it = predictions.find(e.uid);
        pairs.emplace_back(pred_it == predictions.end() ? "" : pred_it->second, gold[i].sparql);
        acc_sum += e.accuracy;
        f1_sum += e.f1;
        bleu_sum += e.bleu;
    }
    if (!report.per_entry.empty()) {
        CorpusBleu cb = corpus_bleu(pairs);
        report.corpus_bleu_pooled = cb.pooled;
        report.mean_sentence_bleu = bleu_sum / static_cast<double>(report.per_entry.size());
        report.mean_accuracy = acc_sum / static_cast<double>(report.per_entry.size());
        report.mean_f1 = f1_sum / static_cast<double>(report.per_entry.size());
    }
    if (opts.cache) report.cache_entries = opts.cache->size();
    return report;
}

nlohmann::json EvalReport::to_json() const {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : per_entry)
        entries.push_back({{"uid", e.uid},
                           {"bleu", e.bleu},
                           {"accuracy", e.accuracy},
                           {"precision", e.precision},
                           {"recall", e.recall},
                           {"f1", e.f1},
                           {"pred_status", exec_status_to_string(e.pred_status)},
                           {"gold_status", exec_status_to_string(e.gold_status)},
                           {"both_empty", e.both_empty}});
    return {{"per_entry", entries},
            {"aggregate",
             {{"corpus_bleu", corpus_bleu_pooled},
              {"mean_sentence_bleu", mean_sentence_bleu},
              {"mean_accuracy", mean_accuracy},
              {"mean_f1", mean_f1}}},
            {"config",
             {{"endpoint", endpoint},
              {"timeout_ms", timeout_ms},
              {"cache_entries", cache_entries}}}};
}

std::string EvalReport::to_table() const {
    std::ostringstream out;
    char buf[128];
    out << "uid\tBLEU\tAccuracy\tF1\n";
    for (const auto& e : per_entry) {
        std::snprintf(buf, sizeof(buf), "%s\t%.2f\t%d\t%.4f\n", e.uid.c_str(), e.bleu,
                      e.accuracy, e.f1);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "aggregate\t%.2f\t%.4f\t%.4f\n", corpus_bleu_pooled,
                  mean_accuracy, mean_f1);
    out << buf;
    return out.str();
}

}  // namespace frase::eval
