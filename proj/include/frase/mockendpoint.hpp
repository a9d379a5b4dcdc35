#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include <json.hpp>

namespace frase::eval {

// In-process SPARQL endpoint backed by a static map file, so evaluation runs
// with no external network. Map format (JSON array):
//   [{"query": "<text>", "results": {<SPARQL JSON results>},
//     "delay_ms": 0, "http_status": 200}, ...]
// Lookup keys are whitespace-normalized query strings; unknown queries get an
// empty bindings document.
class MockSparqlEndpoint {
public:
    explicit MockSparqlEndpoint(const std::filesystem::path& map_file);
    ~MockSparqlEndpoint();

    MockSparqlEndpoint(const MockSparqlEndpoint&) = delete;
    MockSparqlEndpoint& operator=(const MockSparqlEndpoint&) = delete;

    // Binds 127.0.0.1 (ephemeral port when 0) and serves on a background thread.
    void start(int port = 0);
    void stop();

    int port() const { return port_; }
    std::string url() const;  // http://127.0.0.1:<port>/sparql

    std::size_t request_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

}  // namespace frase::eval
