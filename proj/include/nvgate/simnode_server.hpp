// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "nvgate/clock.hpp"
#include "nvgate/simnode.hpp"

namespace nvgate {

// Serves one simulated sub-node over real TCP. The response path is raw
// sockets on purpose: several fault modes (malformed preamble, corrupt
// chunked framing, mid-body closes, resets) violate HTTP in ways a
// well-formed server library refuses to produce. While the node is crashed
// the listener itself goes down, so clients observe genuine connection
// refusal, matching how crashed deployments surface in production.
//
// Paths:
//   POST /                      JSON-RPC endpoint (fault-injected)
//   GET  /control/head         {"head": local, "global_head": global}
//   GET  /control/global-head  {"head": global}
//   POST /control/fault-config  load a SimNodeFaultConfig JSON document
//   POST /control/crash         {"duration_s": x}
//   POST /control/restore       {}
// Control paths are never fault-injected.
class SimNodeServer {
  public:
    SimNodeServer(std::shared_ptr<SimNodeCore> core, std::shared_ptr<const TimeSource> clock,
                  int port);
    ~SimNodeServer();

    SimNodeServer(const SimNodeServer&) = delete;
    SimNodeServer& operator=(const SimNodeServer&) = delete;

    // Binds and starts the accept loop. Returns false when the port is
    // taken.
    bool start();
    void stop();

    int port() const { return port_; }
    SimNodeCore& core() { return *core_; }

  private:
    void accept_loop();
    void handle_connection(int fd);

    std::shared_ptr<SimNodeCore> core_;
    std::shared_ptr<const TimeSource> clock_;
    int port_;
    std::atomic<bool> running_{false};
    std::atomic<int> listener_fd_{-1};
    std::thread accept_thread_;
    std::vector<std::thread> workers_;
    std::mutex workers_mu_;
};

}  // namespace nvgate
