#include "frase/argmap.hpp"

#include <algorithm>
#include <set>

#include <httplib.h>

#include "frase/common.hpp"
#include "frase/jsonio.hpp"

namespace frase::argmap {

RawAnnotation parse_backend_output(const std::string& text) {
    // Models wrap JSON in prose; take the outermost {...} region.
    std::size_t open = text.find('{');
    std::size_t close = text.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw InputError("backend output contains no JSON object");
    json parsed = json::parse(text.substr(open, close - open + 1), nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object())
        throw InputError("backend output is not valid JSON");
    if (!parsed.contains("elements") || !parsed["elements"].is_object())
        throw InputError("backend output lacks an 'elements' object");

    RawAnnotation raw;
    raw.frame_id = parsed.value("frame", "");
    for (const auto& [name, value] : parsed["elements"].items()) {
        if (value.is_null())
            raw.elements.emplace_back(name, std::nullopt);
        else if (value.is_string())
            raw.elements.emplace_back(name, value.get<std::string>());
        else
            raw.elements.emplace_back(name, value.dump());  // salvage non-string spans
    }
    return raw;
}

FrameAnnotation validate_annotation(const std::string& question, const framenet::Frame& frame,
                                    const RawAnnotation& raw) {
    FrameAnnotation out;
    out.frame_id = frame.id;

    std::set<std::string> frame_elements;
    for (const auto& e : frame.elements) frame_elements.insert(e.name);

    std::set<std::string> handled;
    for (const auto& [name, span] : raw.elements) {
        if (!frame_elements.count(name)) {
            out.repairs.push_back("dropped unknown element '" + name + "'");
            continue;
        }
        if (!handled.insert(name).second) {
            out.repairs.push_back("dropped duplicate element '" + name + "'");
            continue;
        }
        if (!span || span->empty()) continue;  // unfilled, appended below
        std::size_t pos = question.find(*span);
        if (pos == std::string::npos) {
            out.repairs.push_back("dropped span for '" + name + "': not in question");
            handled.erase(name);  // falls through to unfilled
            continue;
        }
        SpanMapping m;
        m.element_name = name;
        m.span_text = *span;
        m.char_start = static_cast<long>(pos);
        m.char_end = static_cast<long>(pos + span->size());
        out.mappings.push_back(std::move(m));
    }

    std::set<std::string> mapped;
    for (const auto& m : out.mappings) mapped.insert(m.element_name);
    for (const auto& e : frame.elements)
        if (!mapped.count(e.name)) out.unfilled.push_back(e.name);
    return out;
}

namespace {

std::set<std::string> element_keywords(const framenet::FrameElement& element, bool name_only) {
    std::set<std::string> keys;
    for (const std::string& t : word_tokens(element.name)) keys.insert(t);
    if (name_only) return keys;
    static const std::set<std::string> stopwords = {
        "a", "an", "the", "of", "in", "on", "to", "is", "are", "be", "or", "and",
        "that", "this", "which", "it", "its", "as", "by", "for", "with", "was"};
    std::size_t taken = 0;
    for (const std::string& t : word_tokens(element.definition)) {
        if (stopwords.count(t)) continue;
        keys.insert(t);
        if (++taken >= 12) break;  // cap: definitions can run long
    }
    return keys;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() || b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& x : a)
        if (b.count(x)) ++inter;
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

}  // namespace

RawAnnotation LexicalBaselineBackend::annotate_frame(const std::string& question,
                                                     const framenet::Frame& frame) {
    std::vector<std::string> tokens = word_tokens(question);
    RawAnnotation raw;
    raw.frame_id = frame.id;

    for (const auto& element : frame.elements) {
        std::set<std::string> name_keys = element_keywords(element, true);
        std::set<std::string> def_keys = element_keywords(element, false);

        std::optional<std::string> best_span;
        std::size_t best_len = 0;
        double best_score = 0.0;
        for (std::size_t n = 1; n <= 4 && n <= tokens.size(); ++n) {
            for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
                std::set<std::string> gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                           tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
                double score = std::max(jaccard(gram, name_keys), jaccard(gram, def_keys));
                if (score <= threshold_) continue;  // strictly above the threshold
                if (n > best_len || (n == best_len && score > best_score)) {
                    std::string span = tokens[i];
                    for (std::size_t j = 1; j < n; ++j) span += " " + tokens[i + j];
                    best_span = span;
                    best_len = n;
                    best_score = score;
                }
            }
        }
        // The span must actually occur in the question for validation to keep
        // it; token-joined text can differ in case, so recover the original
        // casing by scanning.
        if (best_span) {
            std::string lower_q = to_lower(question);
            std::string lower_span = to_lower(*best_span);
            std::size_t pos = lower_q.find(lower_span);
            if (pos != std::string::npos) best_span = question.substr(pos, best_span->size());
        }
        raw.elements.emplace_back(element.name, best_span);
    }
    return raw;
}

FrameAnnotation lexical_baseline_annotate(const std::string& question,
                                          const framenet::Frame& frame,
                                          double jaccard_threshold) {
    LexicalBaselineBackend backend(jaccard_threshold);
    return validate_annotation(question, frame, backend.annotate_frame(question, frame));
}

HttpGenBackend::HttpGenBackend(std::string url, std::string prompt_template, int max_tokens,
                               int timeout_ms)
    : url_(std::move(url)), prompt_template_(std::move(prompt_template)),
      max_tokens_(max_tokens), timeout_ms_(timeout_ms) {}

std::string HttpGenBackend::build_prompt(const std::string& question,
                                         const framenet::Frame& frame) const {
    std::string elements;
    for (std::size_t i = 0; i < frame.elements.size(); ++i) {
        if (i) elements += ", ";
        elements += frame.elements[i].name;
    }
    std::string prompt = prompt_template_;
    auto replace_all = [&prompt](const std::string& key, const std::string& value) {
        std::size_t pos = 0;
        while ((pos = prompt.find(key, pos)) != std::string::npos) {
            prompt.replace(pos, key.size(), value);
            pos += value.size();
        }
    };
    replace_all("{frame_id}", frame.id);
    replace_all("{frame_definition}", frame.definition);
    replace_all("{elements}", elements);
    replace_all("{question}", question);
    return prompt;
}

RawAnnotation HttpGenBackend::annotate_frame(const std::string& question,
                                             const framenet::Frame& frame) {
    std::size_t scheme = url_.find("://");
    std::size_t path_pos = scheme == std::string::npos ? url_.find('/')
                                                       : url_.find('/', scheme + 3);
    std::string base = path_pos == std::string::npos ? url_ : url_.substr(0, path_pos);
    std::string path = path_pos == std::string::npos ? "/" : url_.substr(path_pos);

    httplib::Client client(base);
    client.set_connection_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
    client.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);

    json body = {{"prompt", build_prompt(question, frame)}, {"max_tokens", max_tokens_}};
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res) throw ServiceError("generation service unreachable: " + url_);
    if (res->status != 200)
        throw ServiceError("generation service error " + std::to_string(res->status));
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("text"))
        throw ServiceError("malformed generation response");
    return parse_backend_output(parsed["text"].get<std::string>());
}

std::vector<FrameAnnotation> annotate(const std::string& question,
                                      const std::vector<align::EvokedFrame>& evoked,
                                      const framenet::FrameInventory& inventory,
                                      AnnotatorBackend& backend) {
    std::vector<FrameAnnotation> out;
    out.reserve(evoked.size());
    for (const align::EvokedFrame& ev : evoked) {
        const framenet::Frame* frame = inventory.find(ev.frame_id);
        if (!frame)
            throw InputError("evoked frame '" + ev.frame_id + "' is not in the inventory");
        RawAnnotation raw;
        try {
            raw = backend.annotate_frame(question, *frame);
        } catch (const InputError&) {
            raw = backend.annotate_frame(question, *frame);  // one retry on bad output
        }
        out.push_back(validate_annotation(question, *frame, raw));
    }
    return out;
}

UnknownLinks link_unfilled_to_unknowns(const std::vector<FrameAnnotation>& annotations,
                                       const std::string& query,
                                       const framenet::FrameInventory& inventory) {
    UnknownLinks out;
    out.form = sparql::classify_query_form(query);

    // Unfilled core elements pooled in annotation order.
    std::vector<std::pair<std::string, std::string>> unfilled_core;  // (frame, element)
    for (const FrameAnnotation& a : annotations) {
        const framenet::Frame* frame = inventory.find(a.frame_id);
        for (const std::string& name : a.unfilled) {
            const framenet::FrameElement* element =
                frame ? frame->find_element(name) : nullptr;
            if (element && element->core_status == framenet::CoreStatus::core)
                unfilled_core.emplace_back(a.frame_id, name);
        }
    }

    if (out.form == sparql::QueryForm::ask) {
        out.ask_flag = true;
        out.fully_grounded = unfilled_core.empty();
        return out;
    }
    if (out.form != sparql::QueryForm::select && out.form != sparql::QueryForm::count)
        return out;

    std::vector<std::string> variables = sparql::select_variables(query);
    std::size_t paired = std::min(unfilled_core.size(), variables.size());
    for (std::size_t i = 0; i < paired; ++i)
        out.pairs.push_back({unfilled_core[i].first, unfilled_core[i].second, variables[i]});
    for (std::size_t i = paired; i < unfilled_core.size(); ++i)
        out.unpaired_elements.push_back(unfilled_core[i].first + ":" + unfilled_core[i].second);
    for (std::size_t i = paired; i < variables.size(); ++i)
        out.unpaired_variables.push_back(variables[i]);
    return out;
}

json annotation_to_json(const FrameAnnotation& a) {
    json mappings = json::array();
    for (const auto& m : a.mappings)
        mappings.push_back({{"element", m.element_name},
                            {"span", m.span_text},
                            {"start", m.char_start},
                            {"end", m.char_end}});
    return {{"frame_id", a.frame_id},
            {"mappings", mappings},
            {"unfilled", a.unfilled},
            {"repairs", a.repairs}};
}

FrameAnnotation annotation_from_json(const json& j) {
    FrameAnnotation a;
    a.frame_id = j.at("frame_id").get<std::string>();
    for (const auto& m : j.value("mappings", json::array())) {
        SpanMapping mapping;
        mapping.element_name = m.at("element").get<std::string>();
        mapping.span_text = m.at("span").get<std::string>();
        mapping.char_start = m.value("start", -1L);
        mapping.char_end = m.value("end", -1L);
        a.mappings.push_back(std::move(mapping));
    }
    a.unfilled = j.value("unfilled", std::vector<std::string>{});
    a.repairs = j.value("repairs", std::vector<std::string>{});
    return a;
}

json unknown_links_to_json(const UnknownLinks& links) {
    json pairs = json::array();
    for (const auto& p : links.pairs)
        pairs.push_back(
            {{"frame_id", p.frame_id}, {"element", p.element_name}, {"variable", p.variable}});
    return {{"form", sparql::query_form_to_string(links.form)},
            {"pairs", pairs},
            {"unpaired_elements", links.unpaired_elements},
            {"unpaired_variables", links.unpaired_variables},
            {"ask_flag", links.ask_flag},
            {"fully_grounded", links.fully_grounded}};
}

UnknownLinks unknown_links_from_json(const json& j) {
    UnknownLinks links;
    std::string form = j.value("form", "other");
    if (form == "select") links.form = sparql::QueryForm::select;
    else if (form == "ask") links.form = sparql::QueryForm::ask;
    else if (form == "count") links.form = sparql::QueryForm::count;
    else links.form = sparql::QueryForm::other;
    for (const auto& p : j.value("pairs", json::array()))
        links.pairs.push_back({p.value("frame_id", ""), p.at("element").get<std::string>(),
                               p.at("variable").get<std::string>()});
    links.unpaired_elements = j.value("unpaired_elements", std::vector<std::string>{});
    links.unpaired_variables = j.value("unpaired_variables", std::vector<std::string>{});
    links.ask_flag = j.value("ask_flag", false);
    links.fully_grounded = j.value("fully_grounded", false);
    return links;
}

}  // namespace frase::argmap
