// Serves a static query->results map as a SPARQL endpoint so evaluation runs
// without touching a real knowledge base.

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "frase/common.hpp"
#include "frase/mockendpoint.hpp"

int main(int argc, char** argv) {
    CLI::App app{"mock SPARQL endpoint backed by a static map file"};
    std::string map_file;
    int port = 0;
    app.add_option("--map", map_file, "JSON map file (query -> results)")->required();
    app.add_option("--port", port, "port to bind (0: ephemeral, printed on stdout)");
    CLI11_PARSE(app, argc, argv);

    try {
        frase::eval::MockSparqlEndpoint endpoint(map_file);
        endpoint.start(port);
        std::cout << "listening on " << endpoint.url() << std::endl;
        // runs until killed
        ::pause();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
