// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvgate/clock.hpp"
#include "nvgate/proxy.hpp"

namespace nvgate {

// Sub-node transport over HTTP: wraps the raw client so socket-level
// failures arrive pre-classified.
class HttpChannel final : public SubNodeChannel {
  public:
    HttpChannel(std::string id, const std::string& url);

    const std::string& id() const override { return id_; }
    const std::string& endpoint() const override { return endpoint_; }
    RpcExchange exchange(const RpcRequest& req, double now_ms, double timeout_ms) override;

  private:
    std::string id_;
    std::string endpoint_;
    std::string host_;
    int port_;
    std::string path_;
};

struct ProxyServerConfig {
    int listen_port = 8545;
    ProxyConfig proxy;
    struct SubNode {
        std::string id;
        std::string url;
    };
    std::vector<SubNode> sub_nodes;
    std::string oracle_url;  // control endpoint returning {"head": N}

    static ProxyServerConfig from_json(const nlohmann::json& j);
    static ProxyServerConfig load_file(const std::string& path);
};

// The gateway front-end: one JSON-RPC endpoint at POST /, a read-only admin
// view at GET /admin. Response metadata rides on headers: X-Subnode-Id,
// X-Attempt-Ms (the returned response's own latency, which is what the
// deployment-level verdict uses), X-End-To-End-Ms. When every sub-node
// denied the request the reply is 503 with a standard JSON-RPC error body
// and X-Error-Kind naming the first transport error.
class ProxyServer {
  public:
    ProxyServer(ProxyServerConfig config, std::shared_ptr<const TimeSource> clock);
    ~ProxyServer();

    bool start();
    void stop();

    int port() const { return config_.listen_port; }
    ProxyCore& core() { return *core_; }

  private:
    struct Impl;
    ProxyServerConfig config_;
    std::shared_ptr<const TimeSource> clock_;
    std::shared_ptr<ProxyCore> core_;
    std::unique_ptr<Impl> impl_;
};

}  // namespace nvgate
