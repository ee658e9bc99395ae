// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvgate/proxy_server.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <stdexcept>

#include <httplib.h>

#include "nvgate/net/http.hpp"

namespace nvgate {

HttpChannel::HttpChannel(std::string id, const std::string& url)
    : id_(std::move(id)), endpoint_(url) {
    auto parsed = net::parse_url(url);
    if (!parsed.has_value()) {
        throw std::invalid_argument("bad sub-node url: " + url);
    }
    host_ = parsed->host;
    port_ = parsed->port;
    path_ = parsed->path;
}

RpcExchange HttpChannel::exchange(const RpcRequest& req, double now_ms, double timeout_ms) {
    net::HttpResult result = net::post_json(host_, port_, path_, req.dump(), timeout_ms);
    if (result.error.has_value()) {
        return RpcExchange::with_error(req, *result.error, result.elapsed_ms, now_ms, id_);
    }
    if (result.response->status != 200) {
        // Sub-nodes answer RPC on 200; anything else is a dead upstream.
        return RpcExchange::with_error(req, TransportErrorKind::Eof, result.elapsed_ms, now_ms, id_);
    }
    return RpcExchange::with_body(req, std::move(result.response->body), result.elapsed_ms, now_ms,
                                  id_);
}

ProxyServerConfig ProxyServerConfig::from_json(const nlohmann::json& j) {
    ProxyServerConfig config;
    config.listen_port = j.value("listen_port", config.listen_port);
    if (j.contains("timeliness_ms")) {
        config.proxy.classifier.timeliness_ms = j.at("timeliness_ms").get<double>();
    }
    if (j.contains("freshness_blocks")) {
        config.proxy.classifier.freshness_blocks = j.at("freshness_blocks").get<uint64_t>();
    }
    config.proxy.attempt_timeout_ms = j.value("attempt_timeout_ms", 0.0);
    config.proxy.score_window = j.value("score_window", size_t{0});
    for (const auto& entry : j.at("sub_nodes")) {
        config.sub_nodes.push_back(SubNode{entry.at("id").get<std::string>(),
                                           entry.at("url").get<std::string>()});
    }
    config.oracle_url = j.value("oracle_url", std::string{});
    return config;
}

ProxyServerConfig ProxyServerConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open proxy config: " + path);
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/true,
                                             /*ignore_comments=*/true);
    return from_json(j);
}

struct ProxyServer::Impl {
    httplib::Server server;
    std::thread thread;
};

namespace {

// Oracle reader with a last-known-good fallback so a wobbly oracle does not
// take the proxy down with it.
class OracleReader {
  public:
    explicit OracleReader(const std::string& url) {
        if (!url.empty()) {
            parsed_ = net::parse_url(url);
        }
    }

    uint64_t head() {
        if (!parsed_.has_value()) {
            return last_.load();
        }
        net::HttpResult result =
            net::get(parsed_->host, parsed_->port, parsed_->path, /*timeout_ms=*/250.0);
        if (result.response.has_value() && result.response->status == 200) {
            try {
                const auto j = nlohmann::json::parse(result.response->body);
                const uint64_t head = j.at("head").get<uint64_t>();
                last_.store(head);
                return head;
            } catch (const std::exception&) {
            }
        }
        return last_.load();
    }

  private:
    std::optional<net::ParsedUrl> parsed_;
    std::atomic<uint64_t> last_{0};
};

}  // namespace

ProxyServer::ProxyServer(ProxyServerConfig config, std::shared_ptr<const TimeSource> clock)
    : config_(std::move(config)), clock_(std::move(clock)) {
    std::vector<std::shared_ptr<SubNodeChannel>> channels;
    for (const auto& sub : config_.sub_nodes) {
        channels.push_back(std::make_shared<HttpChannel>(sub.id, sub.url));
    }
    auto oracle = std::make_shared<OracleReader>(config_.oracle_url);
    core_ = std::make_shared<ProxyCore>(config_.proxy, std::move(channels),
                                        [oracle](double) { return oracle->head(); });
    impl_ = std::make_unique<Impl>();
}

ProxyServer::~ProxyServer() {
    stop();
}

bool ProxyServer::start() {
    auto core = core_;
    auto clock = clock_;

    impl_->server.Post("/", [core, clock](const httplib::Request& request,
                                          httplib::Response& response) {
        auto parsed = RpcRequest::parse(request.body);
        if (!parsed.has_value()) {
            response.status = 200;
            response.set_content(
                R"({"jsonrpc":"2.0","id":null,"error":{"code":-32600,"message":"invalid request"}})",
                "application/json");
            return;
        }
        ProxyOutcome outcome = core->handle_request(*parsed, clock->now_ms());
        char attempt_ms[32];
        std::snprintf(attempt_ms, sizeof(attempt_ms), "%.3f", outcome.response.t_r_ms);
        char e2e_ms[32];
        std::snprintf(e2e_ms, sizeof(e2e_ms), "%.3f", outcome.end_to_end_ms);
        response.set_header("X-Subnode-Id", outcome.response.sub_node_id);
        response.set_header("X-Attempt-Ms", attempt_ms);
        response.set_header("X-End-To-End-Ms", e2e_ms);
        if (outcome.exhausted_denial) {
            response.status = 503;
            if (outcome.response.error.has_value()) {
                response.set_header("X-Error-Kind",
                                    std::string(to_string(*outcome.response.error)));
            }
            response.set_content(denial_body(*parsed), "application/json");
            return;
        }
        response.status = 200;
        response.set_content(*outcome.response.raw_response, "application/json");
    });

    impl_->server.Get("/admin", [core](const httplib::Request&, httplib::Response& response) {
        response.set_content(core->admin_snapshot().dump(2), "application/json");
    });

    if (!impl_->server.bind_to_port("127.0.0.1", config_.listen_port)) {
        return false;
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return true;
}

void ProxyServer::stop() {
    if (impl_ != nullptr && impl_->server.is_running()) {
        impl_->server.stop();
    }
    if (impl_ != nullptr && impl_->thread.joinable()) {
        impl_->thread.join();
    }
}

}  // namespace nvgate
