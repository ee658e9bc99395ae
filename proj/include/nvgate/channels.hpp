// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <utility>

#include "nvgate/proxy.hpp"
#include "nvgate/simnode.hpp"
#include "nvgate/workload.hpp"

namespace nvgate {

// Maps a served outcome to the exchange a client with the given time budget
// would observe. Anything that would land after the budget surfaces as the
// matching client-side timeout with t_r equal to the elapsed time at
// abandonment.
RpcExchange serve_result_to_exchange(const ServeResult& served, const RpcRequest& req,
                                     double now_ms, double timeout_ms, const std::string& node_id);

// Direct in-process transport to one simulated node. Deterministic given
// the node's seed and the request order.
class InProcessChannel final : public SubNodeChannel {
  public:
    explicit InProcessChannel(std::shared_ptr<SimNodeCore> node)
        : node_(std::move(node)), endpoint_("sim://" + node_->id()) {}

    const std::string& id() const override { return node_->id(); }
    const std::string& endpoint() const override { return endpoint_; }

    RpcExchange exchange(const RpcRequest& req, double now_ms, double timeout_ms) override {
        const ServeResult served = node_->serve(req, now_ms);
        return serve_result_to_exchange(served, req, now_ms, timeout_ms, node_->id());
    }

    SimNodeCore& node() { return *node_; }

  private:
    std::shared_ptr<SimNodeCore> node_;
    std::string endpoint_;
};

// Measures one sub-node without proxy mediation.
class DirectTarget final : public WorkloadTarget {
  public:
    DirectTarget(std::shared_ptr<SubNodeChannel> channel, double budget_ms)
        : channel_(std::move(channel)), budget_ms_(budget_ms) {}

    Result send(const RpcRequest& req, double now_ms) override {
        Result res;
        res.exchange = channel_->exchange(req, now_ms, budget_ms_);
        res.end_to_end_ms = res.exchange.t_r_ms;
        return res;
    }

  private:
    std::shared_ptr<SubNodeChannel> channel_;
    double budget_ms_;
};

// Measures an in-process proxy deployment. The verdict-relevant latency of
// a proxied response is the selected exchange's own t_r; the full retry
// chain shows up in end_to_end_ms.
class ProxyTarget final : public WorkloadTarget {
  public:
    explicit ProxyTarget(std::shared_ptr<ProxyCore> proxy) : proxy_(std::move(proxy)) {}

    Result send(const RpcRequest& req, double now_ms) override {
        ProxyOutcome outcome = proxy_->handle_request(req, now_ms);
        Result res;
        res.exchange = std::move(outcome.response);
        res.end_to_end_ms = outcome.end_to_end_ms;
        return res;
    }

    ProxyCore& proxy() { return *proxy_; }

  private:
    std::shared_ptr<ProxyCore> proxy_;
};

}  // namespace nvgate
