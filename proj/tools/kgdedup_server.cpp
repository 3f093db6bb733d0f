// HTTP service over a state directory.

#include <csignal>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>

#include "kgdedup/http.hpp"

namespace {
httplib::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Duplicate detection service"};
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string state_dir = "kgdedup-state";
    std::string static_dir;
    kgdedup::ServiceOptions opts;
    std::vector<std::string> ignore;
    app.add_option("--host", host, "listen address");
    app.add_option("--port", port, "listen port")->check(CLI::Range(1, 65535));
    app.add_option("--state", state_dir, "state directory");
    app.add_option("--candidate-limit", opts.candidate_limit, "default pre-filter candidate limit (0 = unlimited)");
    app.add_option("--ignore", ignore, "paths left out of default configurations (default: compliesWith)");
    app.add_option("--static", static_dir, "serve this directory under /ui");
    CLI11_PARSE(app, argc, argv);

    opts.state_dir = state_dir;
    if (!ignore.empty()) opts.ignore = ignore;
    try {
        kgdedup::Service service(opts);
        httplib::Server server;
        if (!static_dir.empty() && !server.set_mount_point("/ui", static_dir)) {
            std::cerr << "cannot serve " << static_dir << '\n';
            return 1;
        }
        kgdedup::mount_api(server, service);
        g_server = &server;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        std::cerr << "listening on " << host << ":" << port << ", state in " << state_dir << '\n';
        if (!server.listen(host, port)) {
            std::cerr << "cannot listen on " << host << ":" << port << '\n';
            return 2;
        }
        service.wait_idle();
        service.persist();
    } catch (const kgdedup::StoreError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
