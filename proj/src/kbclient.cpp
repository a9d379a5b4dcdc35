#include "frase/kbclient.hpp"

#include <cctype>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "frase/common.hpp"
#include "frase/jsonio.hpp"
#include "frase/sparqltool.hpp"

namespace frase::kb {

const char* kind_to_string(DescriptorKind k) {
    switch (k) {
        case DescriptorKind::relation: return "relation";
        case DescriptorKind::klass: return "class";
        default: return "entity";
    }
}

DescriptorKind kind_from_string(const std::string& s) {
    if (s == "relation") return DescriptorKind::relation;
    if (s == "class") return DescriptorKind::klass;
    return DescriptorKind::entity;
}

const char* status_to_string(DescriptorStatus s) {
    switch (s) {
        case DescriptorStatus::ok: return "ok";
        case DescriptorStatus::missing_description: return "missing_description";
        case DescriptorStatus::missing_label: return "missing_label";
        default: return "not_found";
    }
}

DescriptorStatus status_from_string(const std::string& s) {
    if (s == "ok") return DescriptorStatus::ok;
    if (s == "missing_description") return DescriptorStatus::missing_description;
    if (s == "missing_label") return DescriptorStatus::missing_label;
    return DescriptorStatus::not_found;
}

RenderedText render_descriptor_text(const KbDescriptor& d) {
    if (d.status == DescriptorStatus::not_found)
        throw InputError("render_descriptor_text: descriptor not found: " + d.uri);
    if (d.description.empty()) return {d.label, true};
    return {d.label + ". " + d.description, false};
}

std::string canonicalize_uri(const std::string& uri) {
    std::string trimmed = trim(uri);
    if (trimmed.empty()) throw InputError("empty URI");
    std::string local = sparql::wikidata_local_id(trimmed);
    if (local.empty())
        throw InputError("invalid Wikidata URI (no P/Q id): '" + trimmed + "'");
    // keep the namespace when the input came prefixed; default by id type
    std::size_t colon = trimmed.find(':');
    if (colon != std::string::npos && trimmed[0] != '<') {
        std::string ns = trimmed.substr(0, colon);
        if (ns == "wd" || ns == "wdt" || ns == "p" || ns == "ps" || ns == "pq")
            return ns + ":" + local;
    }
    return (local[0] == 'P' ? std::string("wdt:") : std::string("wd:")) + local;
}

// ---- transport ----

namespace {

class HttplibTransport : public HttpTransport {
public:
    explicit HttplibTransport(int timeout_ms) : timeout_ms_(timeout_ms) {}

    std::optional<Response> get(const std::string& url) override {
        std::size_t scheme = url.find("://");
        std::size_t path_pos = scheme == std::string::npos ? url.find('/')
                                                           : url.find('/', scheme + 3);
        std::string base = path_pos == std::string::npos ? url : url.substr(0, path_pos);
        std::string path = path_pos == std::string::npos ? "/" : url.substr(path_pos);
        httplib::Client client(base);
        client.set_connection_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
        client.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
        client.set_follow_location(true);
        auto res = client.Get(path);
        if (!res) return std::nullopt;
        return Response{res->status, res->body};
    }

private:
    int timeout_ms_;
};

}  // namespace

std::unique_ptr<HttpTransport> make_default_transport(int timeout_ms) {
    return std::make_unique<HttplibTransport>(timeout_ms);
}

// ---- rate limiter ----

RateLimiter::RateLimiter(double requests_per_second, Clock clock, Sleeper sleeper)
    : interval_(requests_per_second > 0
                    ? std::chrono::milliseconds(
                          static_cast<long>(1000.0 / requests_per_second))
                    : std::chrono::milliseconds(0)),
      clock_(clock ? std::move(clock) : [] { return std::chrono::steady_clock::now(); }),
      sleeper_(sleeper ? std::move(sleeper)
                       : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {}

void RateLimiter::acquire() {
    if (interval_.count() == 0) return;
    std::chrono::milliseconds wait{0};
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto now = clock_();
        if (!primed_ || now >= next_slot_) {
            next_slot_ = now + interval_;
            primed_ = true;
            return;
        }
        wait = std::chrono::duration_cast<std::chrono::milliseconds>(next_slot_ - now);
        next_slot_ += interval_;
    }
    sleeper_(wait);
}

// ---- cache ----

namespace {

json descriptor_to_json(const KbDescriptor& d) {
    return {{"uri", d.uri},
            {"kind", kind_to_string(d.kind)},
            {"label", d.label},
            {"description", d.description},
            {"fetched_at", d.fetched_at},
            {"status", status_to_string(d.status)}};
}

KbDescriptor descriptor_from_json(const json& j) {
    KbDescriptor d;
    d.uri = j.at("uri").get<std::string>();
    d.kind = kind_from_string(j.value("kind", "entity"));
    d.label = j.value("label", "");
    d.description = j.value("description", "");
    d.fetched_at = j.value("fetched_at", "");
    d.status = status_from_string(j.value("status", "not_found"));
    return d;
}

}  // namespace

DescriptorCache::DescriptorCache(std::filesystem::path backing_file)
    : path_(std::move(backing_file)) {
    if (std::filesystem::exists(path_)) {
        for_each_jsonl(
            path_,
            [&](const json& record, std::size_t) {
                KbDescriptor d = descriptor_from_json(record);
                entries_[d.uri] = std::move(d);  // latest wins
            },
            [](const std::string&, std::size_t) { /* tolerate torn tail lines */ });
    }
}

std::optional<KbDescriptor> DescriptorCache::find(const std::string& canonical_uri) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(canonical_uri);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void DescriptorCache::put(const KbDescriptor& d) {
    std::lock_guard<std::mutex> lock(mutex_);
    entries_[d.uri] = d;
    if (!path_.empty()) {
        std::ofstream out(path_, std::ios::app);
        if (!out) throw InputError("cannot append to cache: " + path_.string());
        out << descriptor_to_json(d).dump() << '\n';
    }
}

std::size_t DescriptorCache::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
}

void DescriptorCache::save() const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (path_.empty()) return;
    std::string out;
    for (const auto& [_, d] : entries_) out += descriptor_to_json(d).dump() + "\n";
    write_file_atomic(path_, out);
}

// ---- Wikidata client ----

WikidataClient::WikidataClient(DescriptorCache& cache, FetchOptions options,
                               std::unique_ptr<HttpTransport> transport,
                               RateLimiter::Clock clock, RateLimiter::Sleeper sleeper)
    : cache_(cache), options_(std::move(options)),
      transport_(transport ? std::move(transport) : make_default_transport(10000)),
      limiter_(options_.rate_limit_per_sec, std::move(clock), std::move(sleeper)) {}

KbDescriptor WikidataClient::fetch_descriptor(const std::string& uri, DescriptorKind kind) {
    std::string canonical = canonicalize_uri(uri);
    if (auto hit = cache_.find(canonical)) return *hit;

    if (options_.offline)
        throw ServiceError("offline mode: descriptor not cached: " + canonical);

    std::string id = sparql::wikidata_local_id(canonical);
    std::string url = options_.api_url +
                      "?action=wbgetentities&format=json&props=labels%7Cdescriptions"
                      "&languages=" + options_.language + "&ids=" + id;

    std::lock_guard<std::mutex> lock(fetch_mutex_);
    if (auto hit = cache_.find(canonical)) return *hit;  // raced with another fetch

    std::optional<HttpTransport::Response> response;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
        limiter_.acquire();
        ++network_calls_;
        response = transport_->get(url);
        if (response && response->status == 200) break;
        if (attempt < options_.max_retries) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(options_.backoff_ms * (attempt + 1)));
        }
    }
    if (!response)
        throw ServiceError("Wikidata API unreachable after " +
                           std::to_string(options_.max_retries + 1) + " attempts: " + url);
    if (response->status != 200)
        throw ServiceError("Wikidata API error " + std::to_string(response->status));

    json body = json::parse(response->body, nullptr, false);
    if (body.is_discarded() || !body.contains("entities"))
        throw ServiceError("malformed Wikidata API response for " + id);

    KbDescriptor d;
    d.uri = canonical;
    d.kind = kind;
    d.fetched_at = iso8601_utc_now();

    const json& entities = body["entities"];
    if (!entities.contains(id) || entities[id].contains("missing")) {
        d.status = DescriptorStatus::not_found;
    } else {
        const json& entity = entities[id];
        const std::string& lang = options_.language;
        if (entity.contains("labels") && entity["labels"].contains(lang))
            d.label = entity["labels"][lang].value("value", "");
        if (entity.contains("descriptions") && entity["descriptions"].contains(lang))
            d.description = entity["descriptions"][lang].value("value", "");
        if (d.label.empty())
            d.status = DescriptorStatus::missing_label;
        else if (d.description.empty())
            d.status = DescriptorStatus::missing_description;
        else
            d.status = DescriptorStatus::ok;
    }
    cache_.put(d);
    return d;
}

}  // namespace frase::kb
