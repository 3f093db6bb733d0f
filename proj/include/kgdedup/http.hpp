#pragma once
// Binds a Service to an httplib server.

#include <string>

#include <httplib.h>

#include "kgdedup/service.hpp"

namespace kgdedup {

inline void mount_api(httplib::Server& server, Service& service) {
    auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
        ApiRequest api;
        api.method = req.method;
        api.path = req.path;
        for (const auto& [k, v] : req.params) api.query.emplace(k, v);
        api.body = req.body;
        auto out = service.handle(api);
        res.status = out.status;
        res.set_content(out.body.dump(), "application/json");
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
    server.Put(".*", handler);
}

}  // namespace kgdedup
