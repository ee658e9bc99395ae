// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvgate/channels.hpp"

namespace nvgate {

RpcExchange serve_result_to_exchange(const ServeResult& served, const RpcRequest& req,
                                     double now_ms, double timeout_ms, const std::string& node_id) {
    using Kind = ServeResult::Kind;

    // The caller abandons the attempt once its budget elapses; whatever the
    // server was about to do no longer matters.
    if (served.latency_ms >= timeout_ms) {
        const TransportErrorKind kind = served.kind == Kind::StallBody
                                            ? TransportErrorKind::TimeoutReadingBody
                                            : TransportErrorKind::TimeoutAwaitingHeaders;
        return RpcExchange::with_error(req, kind, timeout_ms, now_ms, node_id);
    }

    switch (served.kind) {
        case Kind::Body:
            return RpcExchange::with_body(req, served.body, served.latency_ms, now_ms, node_id);
        case Kind::Refuse:
            return RpcExchange::with_error(req, TransportErrorKind::ConnectionRefused,
                                           served.latency_ms, now_ms, node_id);
        case Kind::StallHeaders:
            // Stall shorter than the budget: the server gave up first and
            // closed without a byte.
            return RpcExchange::with_error(req, TransportErrorKind::Eof, served.latency_ms, now_ms,
                                           node_id);
        case Kind::StallBody:
            return RpcExchange::with_error(req, TransportErrorKind::UnexpectedEof,
                                           served.latency_ms, now_ms, node_id);
        case Kind::Reset:
            return RpcExchange::with_error(req, TransportErrorKind::ConnectionResetByPeer,
                                           served.latency_ms, now_ms, node_id);
        case Kind::Eof:
            return RpcExchange::with_error(req, TransportErrorKind::Eof, served.latency_ms, now_ms,
                                           node_id);
        case Kind::UnexpectedEof:
            return RpcExchange::with_error(req, TransportErrorKind::UnexpectedEof,
                                           served.latency_ms, now_ms, node_id);
        case Kind::MalformedHttp:
            return RpcExchange::with_error(req, TransportErrorKind::MalformedHttpResponse,
                                           served.latency_ms, now_ms, node_id);
        case Kind::BadChunk:
            return RpcExchange::with_error(req, TransportErrorKind::InvalidChunkLength,
                                           served.latency_ms, now_ms, node_id);
        case Kind::BadChecksum:
            return RpcExchange::with_error(req, TransportErrorKind::InvalidChecksum,
                                           served.latency_ms, now_ms, node_id);
        case Kind::IdleClose:
            return RpcExchange::with_error(req, TransportErrorKind::ServerClosedIdleConnection,
                                           served.latency_ms, now_ms, node_id);
    }
    return RpcExchange::with_error(req, TransportErrorKind::Eof, served.latency_ms, now_ms, node_id);
}

}  // namespace nvgate
