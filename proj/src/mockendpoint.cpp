#include "frase/mockendpoint.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include <httplib.h>

#include "frase/common.hpp"
#include "frase/jsonio.hpp"

namespace frase::eval {

struct MapRow {
    nlohmann::json results;
    int delay_ms = 0;
    int http_status = 200;
};

struct MockSparqlEndpoint::Impl {
    httplib::Server server;
    std::thread thread;
    std::map<std::string, MapRow> rows;
    std::atomic<std::size_t> requests{0};
};

MockSparqlEndpoint::MockSparqlEndpoint(const std::filesystem::path& map_file)
    : impl_(std::make_unique<Impl>()) {
    json doc = json::parse(read_file(map_file));
    if (!doc.is_array()) throw InputError("mock map must be a JSON array: " + map_file.string());
    for (const auto& row : doc) {
        MapRow r;
        r.results = row.value("results", json{{"head", {{"vars", json::array()}}},
                                              {"results", {{"bindings", json::array()}}}});
        r.delay_ms = row.value("delay_ms", 0);
        r.http_status = row.value("http_status", 200);
        impl_->rows[normalize_whitespace(row.at("query").get<std::string>())] = std::move(r);
    }

    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        impl_->requests++;
        std::string query = req.has_param("query") ? req.get_param_value("query")
                                                   : req.body;
        auto it = impl_->rows.find(normalize_whitespace(query));
        if (it == impl_->rows.end()) {
            json empty = {{"head", {{"vars", json::array()}}},
                          {"results", {{"bindings", json::array()}}}};
            res.set_content(empty.dump(), "application/sparql-results+json");
            return;
        }
        if (it->second.delay_ms > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(it->second.delay_ms));
        res.status = it->second.http_status;
        if (it->second.http_status == 200)
            res.set_content(it->second.results.dump(), "application/sparql-results+json");
        else
            res.set_content("query error", "text/plain");
    };
    impl_->server.Get("/sparql", handler);
    impl_->server.Post("/sparql", handler);
}

MockSparqlEndpoint::~MockSparqlEndpoint() { stop(); }

void MockSparqlEndpoint::start(int port) {
    if (port == 0) {
        port_ = impl_->server.bind_to_any_port("127.0.0.1");
    } else {
        port_ = impl_->server.bind_to_port("127.0.0.1", port) ? port : -1;
    }
    if (port_ <= 0) throw ServiceError("mock endpoint could not bind a port");
    impl_->thread = std::thread([this]() { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void MockSparqlEndpoint::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
    if (impl_ && impl_->thread.joinable()) impl_->thread.join();
}

std::string MockSparqlEndpoint::url() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/sparql";
}

std::size_t MockSparqlEndpoint::request_count() const { return impl_->requests.load(); }

}  // namespace frase::eval
