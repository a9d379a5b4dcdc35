#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace frase::kb {

enum class DescriptorKind { relation, klass, entity };
enum class DescriptorStatus { ok, missing_description, missing_label, not_found };

const char* kind_to_string(DescriptorKind k);
DescriptorKind kind_from_string(const std::string& s);
const char* status_to_string(DescriptorStatus s);
DescriptorStatus status_from_string(const std::string& s);

struct KbDescriptor {
    std::string uri;   // canonical prefixed form, e.g. "wdt:P1365"
    DescriptorKind kind = DescriptorKind::relation;
    std::string label;
    std::string description;
    std::string fetched_at;  // ISO-8601 UTC
    DescriptorStatus status = DescriptorStatus::ok;
};

struct RenderedText {
    std::string text;
    bool degraded = false;  // description was empty
};

// "<label>. <description>"; label alone (degraded) when no description.
// Throws InputError when status == not_found.
RenderedText render_descriptor_text(const KbDescriptor& d);

// Expands a raw URI (prefixed or absolute) to the canonical prefixed form and
// validates the trailing Wikidata P/Q id. Throws InputError on bad syntax.
std::string canonicalize_uri(const std::string& uri);

// Abstraction over the HTTP layer so tests can count and fake responses.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    struct Response {
        int status = 0;
        std::string body;
    };
    // Returns nullopt on transport failure (connection refused, timeout).
    virtual std::optional<Response> get(const std::string& url) = 0;
};

std::unique_ptr<HttpTransport> make_default_transport(int timeout_ms);

// Token-interval rate limiter; the clock and sleeper are injectable so tests
// can run on virtual time.
class RateLimiter {
public:
    using Clock = std::function<std::chrono::steady_clock::time_point()>;
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit RateLimiter(double requests_per_second, Clock clock = {}, Sleeper sleeper = {});

    // Blocks until a request slot is available.
    void acquire();

private:
    std::chrono::milliseconds interval_;
    Clock clock_;
    Sleeper sleeper_;
    std::mutex mutex_;
    std::chrono::steady_clock::time_point next_slot_;
    bool primed_ = false;
};

// JSON-lines descriptor cache, one record per line, append with compaction on
// save. Lookups return exactly what was stored.
class DescriptorCache {
public:
    DescriptorCache() = default;
    explicit DescriptorCache(std::filesystem::path backing_file);

    std::optional<KbDescriptor> find(const std::string& canonical_uri) const;
    void put(const KbDescriptor& d);
    std::size_t size() const;

    // Rewrites the backing file deduplicated (latest wins), sorted by uri.
    void save() const;

    const std::filesystem::path& backing_file() const { return path_; }

private:
    std::filesystem::path path_;
    std::map<std::string, KbDescriptor> entries_;
    mutable std::mutex mutex_;
};

struct FetchOptions {
    std::string api_url = "https://www.wikidata.org/w/api.php";
    std::string language = "en";
    int max_retries = 2;
    int backoff_ms = 250;
    double rate_limit_per_sec = 5.0;
    bool offline = false;  // forbid network; cache miss becomes an error
};

// Cached fetch of label + description for a Wikidata P/Q id. One network call
// per distinct URI; not_found responses are cached too (negative caching).
class WikidataClient {
public:
    WikidataClient(DescriptorCache& cache, FetchOptions options,
                   std::unique_ptr<HttpTransport> transport = nullptr,
                   RateLimiter::Clock clock = {}, RateLimiter::Sleeper sleeper = {});

    KbDescriptor fetch_descriptor(const std::string& uri, DescriptorKind kind);

    std::size_t network_calls() const { return network_calls_; }

private:
    DescriptorCache& cache_;
    FetchOptions options_;
    std::unique_ptr<HttpTransport> transport_;
    RateLimiter limiter_;
    std::size_t network_calls_ = 0;
    std::mutex fetch_mutex_;
};

}  // namespace frase::kb
