#include <algorithm>
#include <chrono>

#include <httplib.h>

#include "hazardchat/json_render.hpp"
#include "hazardchat/service.hpp"

namespace hazardchat::service {

struct HttpServer::Impl {
    Service& service;
    std::vector<std::string> cors_allow;
    JsonlLogger* logger;
    httplib::Server server;

    bool origin_allowed(const std::string& origin) const {
        return std::find(cors_allow.begin(), cors_allow.end(), "*") != cors_allow.end() ||
               std::find(cors_allow.begin(), cors_allow.end(), origin) != cors_allow.end();
    }

    void reply(httplib::Response& res, const HttpResult& result) {
        res.status = result.status;
        res.set_content(result.body, "application/json");
    }

    void routes() {
        server.Post("/api/chat", [this](const httplib::Request& req, httplib::Response& res) {
            reply(res, service.chat(req.body));
        });
        server.Post("/api/query", [this](const httplib::Request& req, httplib::Response& res) {
            reply(res, service.query(req.body));
        });
        server.Get("/api/schema", [this](const httplib::Request&, httplib::Response& res) { reply(res, service.schema()); });
        server.Get(R"(/api/substances/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            reply(res, service.substance(httplib::detail::decode_url(req.matches[1], false)));
        });
        server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) { reply(res, service.healthz()); });
        server.Options(R"(/.*)", [this](const httplib::Request& req, httplib::Response& res) {
            const auto origin = req.get_header_value("Origin");
            if (origin.empty() || !origin_allowed(origin)) {
                reply(res, {403, error_body("Forbidden", "origin is not allowed")});
                return;
            }
            res.status = 204;
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.set_header("Access-Control-Max-Age", "600");
        });

        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (!res.body.empty()) return;
            if (res.status == 404) res.set_content(error_body("NotFound", "no such endpoint"), "application/json");
            else if (res.status == 405)
                res.set_content(error_body("MethodNotAllowed", "method not allowed"), "application/json");
            else res.set_content(error_body("HttpError", "request failed"), "application/json");
        });
        server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string message = "internal error";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                message = e.what();
            } catch (...) {
            }
            res.status = 500;
            res.set_content(error_body("Internal", message), "application/json");
        });
        server.set_post_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
            const auto origin = req.get_header_value("Origin");
            if (!origin.empty() && origin_allowed(origin)) {
                res.set_header("Access-Control-Allow-Origin", origin);
                res.set_header("Vary", "Origin");
            }
        });
        server.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
            if (!logger) return;
            Json record{{"event", "request"}, {"method", req.method}, {"path", req.path}, {"status", res.status}};
            if (res.get_header_value("Content-Type") == "application/json") {
                try {
                    const auto body = Json::parse(res.body);
                    if (body.is_object() && body.contains("trace_id")) record["trace_id"] = body["trace_id"];
                } catch (const Json::parse_error&) {
                }
            }
            logger->write(record.dump());
        });
    }
};

HttpServer::HttpServer(Service& service, std::vector<std::string> cors_allow, JsonlLogger* logger)
    : impl_(new Impl{service, std::move(cors_allow), logger, {}}) {
    impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace hazardchat::service
