// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>

#include "nvgate/types.hpp"

namespace nvgate::net {

struct ParsedUrl {
    std::string host;
    int port = 80;
    std::string path = "/";
};

std::optional<ParsedUrl> parse_url(const std::string& url);

struct HttpResponse {
    int status = 0;
    std::map<std::string, std::string> headers;  // keys lowercased
    std::string body;

    std::optional<std::string> header(const std::string& name) const;
};

// Outcome of one HTTP exchange over a raw socket. Exactly one of response /
// error is set. Socket-level failures and framing damage map onto the
// client-observable error taxonomy; elapsed_ms is the time until the
// outcome was known (for timeouts, the full budget).
struct HttpResult {
    std::optional<HttpResponse> response;
    std::optional<TransportErrorKind> error;
    double elapsed_ms = 0.0;
};

// Blocking request with a total deadline. The implementation speaks plain
// HTTP/1.1 with Connection: close and tolerates hostile servers: garbage
// preambles, short bodies, corrupt chunked framing, and gzip payloads with
// bad checksums all come back as their taxonomy kinds instead of throwing.
HttpResult http_request(const std::string& host, int port, const std::string& method,
                        const std::string& path, const std::string& body,
                        const std::string& content_type, double timeout_ms);

inline HttpResult post_json(const std::string& host, int port, const std::string& path,
                            const std::string& body, double timeout_ms) {
    return http_request(host, port, "POST", path, body, "application/json", timeout_ms);
}

inline HttpResult get(const std::string& host, int port, const std::string& path,
                      double timeout_ms) {
    return http_request(host, port, "GET", path, "", "", timeout_ms);
}

}  // namespace nvgate::net
