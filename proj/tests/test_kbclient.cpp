#include <doctest.h>

#include <chrono>

#include "frase/common.hpp"
#include "frase/jsonio.hpp"
#include "frase/kbclient.hpp"
#include "support/temp_dir.hpp"

using namespace frase;
using namespace frase::kb;
using frase::testsupport::TempDir;

namespace {

// Counting transport with canned Wikidata API bodies.
class FakeTransport : public HttpTransport {
public:
    std::size_t calls = 0;
    bool fail = false;
    int status = 200;

    std::optional<Response> get(const std::string& url) override {
        ++calls;
        last_url = url;
        if (fail) return std::nullopt;
        if (status != 200) return Response{status, ""};
        std::string id;
        std::size_t pos = url.find("ids=");
        if (pos != std::string::npos) id = url.substr(pos + 4);
        json body;
        if (id == "P1365")
            body = {{"entities",
                     {{"P1365",
                       {{"labels", {{"en", {{"value", "replaces"}}}}},
                        {"descriptions",
                         {{"en", {{"value", "person, state or item replaced"}}}}}}}}}};
        else if (id == "P31")
            body = {{"entities",
                     {{"P31",
                       {{"labels", {{"en", {{"value", "instance of"}}}}},
                        {"descriptions",
                         {{"en",
                           {{"value",
                             "that class of which this subject is a particular example"}}}}}}}}}};
        else if (id == "P9999999")
            body = {{"entities", {{"P9999999", {{"missing", ""}}}}}};
        else if (id == "P777")
            body = {{"entities",
                     {{"P777", {{"labels", {{"en", {{"value", "bare label"}}}}}}}}}};
        else
            body = {{"entities",
                     {{id,
                       {{"labels", {{"en", {{"value", "label of " + id}}}}},
                        {"descriptions", {{"en", {{"value", "description of " + id}}}}}}}}}};
        return Response{200, body.dump()};
    }

    std::string last_url;
};

struct VirtualClock {
    std::chrono::steady_clock::time_point now{std::chrono::steady_clock::time_point{} +
                                              std::chrono::hours(1)};
    std::vector<long> sleeps;
};

WikidataClient make_client(DescriptorCache& cache, FetchOptions opts, FakeTransport*& out,
                           VirtualClock* clock = nullptr) {
    auto transport = std::make_unique<FakeTransport>();
    out = transport.get();
    if (clock) {
        return WikidataClient(
            cache, std::move(opts), std::move(transport),
            [clock]() { return clock->now; },
            [clock](std::chrono::milliseconds d) {
                clock->sleeps.push_back(d.count());
                clock->now += d;
            });
    }
    return WikidataClient(cache, std::move(opts), std::move(transport));
}

}  // namespace

TEST_SUITE("kbclient") {

TEST_CASE("canonicalize_uri validates wikidata ids") {
    CHECK(canonicalize_uri("wdt:P1365") == "wdt:P1365");
    CHECK(canonicalize_uri("P1365") == "wdt:P1365");
    CHECK(canonicalize_uri("Q42") == "wd:Q42");
    CHECK(canonicalize_uri("<http://www.wikidata.org/entity/Q42>") == "wd:Q42");
    CHECK(canonicalize_uri("p:P39") == "p:P39");
    CHECK_THROWS_AS(canonicalize_uri("wdt:"), InputError);
    CHECK_THROWS_AS(canonicalize_uri("wdt:X12"), InputError);
    CHECK_THROWS_AS(canonicalize_uri(""), InputError);
}

TEST_CASE("fetch returns label and description for P1365") {
    TempDir dir("kb");
    DescriptorCache cache(dir.file("cache.jsonl"));
    FakeTransport* transport = nullptr;
    WikidataClient client = make_client(cache, FetchOptions{}, transport);
    KbDescriptor d = client.fetch_descriptor("wdt:P1365", DescriptorKind::relation);
    CHECK(d.label == "replaces");
    CHECK(d.status == DescriptorStatus::ok);
    CHECK(d.description == "person, state or item replaced");
    CHECK(transport->calls == 1);
}

TEST_CASE("cache idempotence: second fetch issues no network call") {
    TempDir dir("kb");
    DescriptorCache cache(dir.file("cache.jsonl"));
    FakeTransport* transport = nullptr;
    WikidataClient client = make_client(cache, FetchOptions{}, transport);
    KbDescriptor d = client.fetch_descriptor("wdt:P31", DescriptorKind::relation);
    CHECK(d.label == "instance of");
    CHECK(d.status == DescriptorStatus::ok);
    client.fetch_descriptor("wdt:P31", DescriptorKind::relation);
    CHECK(transport->calls == 1);
}

TEST_CASE("cache persists and round-trips byte-identically") {
    TempDir dir("kb");
    KbDescriptor stored;
    {
        DescriptorCache cache(dir.file("cache.jsonl"));
        FakeTransport* transport = nullptr;
        WikidataClient client = make_client(cache, FetchOptions{}, transport);
        stored = client.fetch_descriptor("wdt:P50", DescriptorKind::relation);
        cache.save();
    }
    DescriptorCache reloaded(dir.file("cache.jsonl"));
    auto hit = reloaded.find("wdt:P50");
    REQUIRE(hit.has_value());
    CHECK(hit->label == stored.label);
    CHECK(hit->description == stored.description);
    CHECK(hit->fetched_at == stored.fetched_at);
    CHECK(hit->status == stored.status);
}

TEST_CASE("missing description is a status, not an error") {
    TempDir dir("kb");
    DescriptorCache cache(dir.file("cache.jsonl"));
    FakeTransport* transport = nullptr;
    WikidataClient client = make_client(cache, FetchOptions{}, transport);
    KbDescriptor d = client.fetch_descriptor("wdt:P777", DescriptorKind::relation);
    CHECK(d.status == DescriptorStatus::missing_description);
    CHECK(d.description.empty());
}

TEST_CASE("not_found is negatively cached") {
    TempDir dir("kb");
    DescriptorCache cache(dir.file("cache.jsonl"));
    FakeTransport* transport = nullptr;
    WikidataClient client = make_client(cache, FetchOptions{}, transport);
    KbDescriptor d = client.fetch_descriptor("wdt:P9999999", DescriptorKind::relation);
    CHECK(d.status == DescriptorStatus::not_found);
    client.fetch_descriptor("wdt:P9999999", DescriptorKind::relation);
    CHECK(transport->calls == 1);
}

TEST_CASE("offline mode fails on cache miss but serves hits") {
    TempDir dir("kb");
    DescriptorCache cache(dir.file("cache.jsonl"));
    KbDescriptor seeded;
    seeded.uri = "wdt:P17";
    seeded.kind = DescriptorKind::relation;
    seeded.label = "country";
    seeded.description = "sovereign state";
    seeded.status = DescriptorStatus::ok;
    cache.put(seeded);

    FetchOptions opts;
    opts.offline = true;
    FakeTransport* transport = nullptr;
    WikidataClient client = make_client(cache, opts, transport);
    CHECK(client.fetch_descriptor("wdt:P17", DescriptorKind::relation).label == "country");
    CHECK_THROWS_AS(client.fetch_descriptor("wdt:P18", DescriptorKind::relation),
                    ServiceError);
    CHECK(transport->calls == 0);
}

TEST_CASE("bounded retries then service error") {
    TempDir dir("kb");
    DescriptorCache cache(dir.file("cache.jsonl"));
    FetchOptions opts;
    opts.max_retries = 2;
    opts.backoff_ms = 1;
    FakeTransport* transport = nullptr;
    WikidataClient client = make_client(cache, opts, transport);
    transport->fail = true;
    CHECK_THROWS_AS(client.fetch_descriptor("wdt:P31", DescriptorKind::relation),
                    ServiceError);
    CHECK(transport->calls == 3);  // initial + 2 retries
}

TEST_CASE("rate limiter spaces requests at R per second on virtual time") {
    TempDir dir("kb");
    DescriptorCache cache(dir.file("cache.jsonl"));
    FetchOptions opts;
    opts.rate_limit_per_sec = 5.0;  // 200ms interval
    FakeTransport* transport = nullptr;
    VirtualClock clock;
    WikidataClient client = make_client(cache, opts, transport, &clock);
    for (int i = 0; i < 10; ++i)
        client.fetch_descriptor("wdt:P" + std::to_string(100 + i), DescriptorKind::relation);
    CHECK(transport->calls == 10);
    // 9 waits after the first immediate slot, each a multiple of the interval
    CHECK(clock.sleeps.size() == 9);
    long total = 0;
    for (long s : clock.sleeps) total += s;
    CHECK(total >= 9 * 200 - 10);
}

TEST_CASE("render_descriptor_text formats label and description") {
    KbDescriptor d;
    d.uri = "wdt:P1365";
    d.label = "replaces";
    d.description = "person, state or item replaced";
    d.status = DescriptorStatus::ok;
    RenderedText r = render_descriptor_text(d);
    CHECK(r.text == "replaces. person, state or item replaced");
    CHECK_FALSE(r.degraded);
    CHECK(render_descriptor_text(d).text == r.text);

    d.description.clear();
    d.status = DescriptorStatus::missing_description;
    RenderedText degraded = render_descriptor_text(d);
    CHECK(degraded.text == "replaces");
    CHECK(degraded.degraded);

    d.status = DescriptorStatus::not_found;
    CHECK_THROWS_AS(render_descriptor_text(d), InputError);
}

TEST_CASE("compaction dedupes appended records") {
    TempDir dir("kb");
    {
        DescriptorCache cache(dir.file("cache.jsonl"));
        KbDescriptor d;
        d.uri = "wd:Q1";
        d.label = "one";
        d.status = DescriptorStatus::ok;
        d.description = "first";
        cache.put(d);
        d.description = "second";
        cache.put(d);  // two lines appended
        cache.save();  // compacted to one
    }
    CHECK(read_jsonl(dir.file("cache.jsonl")).size() == 1);
    DescriptorCache reloaded(dir.file("cache.jsonl"));
    CHECK(reloaded.find("wd:Q1")->description == "second");
}

}  // TEST_SUITE
