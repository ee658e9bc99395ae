// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvgate/net/http.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>
#include <zlib.h>

#include <cctype>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <sstream>

namespace nvgate::net {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string lowercase(std::string s) {
    for (char& c : s) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return s;
}

struct FdGuard {
    int fd = -1;
    ~FdGuard() {
        if (fd >= 0) {
            ::close(fd);
        }
    }
};

struct RawResponse {
    int status = 0;
    std::map<std::string, std::string> headers;
    std::string raw_body;  // as read off the wire, before framing decode
    bool headers_complete = false;
    bool eof = false;
};

// Returns std::nullopt on success, or the error kind.
std::optional<TransportErrorKind> connect_with_deadline(int fd, const sockaddr* addr,
                                                        socklen_t addrlen, double budget_ms) {
    if (::connect(fd, addr, addrlen) == 0) {
        return std::nullopt;
    }
    if (errno != EINPROGRESS) {
        return TransportErrorKind::ConnectionRefused;
    }
    pollfd pfd{fd, POLLOUT, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(budget_ms));
    if (rc == 0) {
        return TransportErrorKind::TimeoutAwaitingHeaders;
    }
    if (rc < 0) {
        return TransportErrorKind::ConnectionRefused;
    }
    int err = 0;
    socklen_t len = sizeof(err);
    ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) {
        return err == ECONNRESET ? TransportErrorKind::ConnectionResetByPeer
                                 : TransportErrorKind::ConnectionRefused;
    }
    return std::nullopt;
}

std::optional<TransportErrorKind> decode_chunked(const std::string& raw, std::string* out) {
    size_t pos = 0;
    while (true) {
        const size_t line_end = raw.find("\r\n", pos);
        if (line_end == std::string::npos) {
            return TransportErrorKind::UnexpectedEof;
        }
        std::string size_line = raw.substr(pos, line_end - pos);
        if (auto semi = size_line.find(';'); semi != std::string::npos) {
            size_line.resize(semi);
        }
        if (size_line.empty()) {
            return TransportErrorKind::InvalidChunkLength;
        }
        size_t chunk_size = 0;
        for (char c : size_line) {
            int digit;
            if (c >= '0' && c <= '9') digit = c - '0';
            else if (c >= 'a' && c <= 'f') digit = c - 'a' + 10;
            else if (c >= 'A' && c <= 'F') digit = c - 'A' + 10;
            else return TransportErrorKind::InvalidChunkLength;
            chunk_size = chunk_size * 16 + static_cast<size_t>(digit);
        }
        pos = line_end + 2;
        if (chunk_size == 0) {
            return std::nullopt;  // terminator chunk
        }
        if (pos + chunk_size + 2 > raw.size()) {
            return TransportErrorKind::UnexpectedEof;
        }
        out->append(raw, pos, chunk_size);
        pos += chunk_size + 2;
    }
}

std::optional<TransportErrorKind> gunzip(const std::string& in, std::string* out) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 16) != Z_OK) {
        return TransportErrorKind::InvalidChecksum;
    }
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    char buf[8192];
    int rc = Z_OK;
    while (rc == Z_OK) {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        rc = inflate(&zs, Z_NO_FLUSH);
        out->append(buf, sizeof(buf) - zs.avail_out);
    }
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) {
        return TransportErrorKind::InvalidChecksum;
    }
    return std::nullopt;
}

}  // namespace

std::optional<std::string> HttpResponse::header(const std::string& name) const {
    auto it = headers.find(lowercase(name));
    if (it == headers.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<ParsedUrl> parse_url(const std::string& url) {
    std::string rest = url;
    if (rest.rfind("http://", 0) == 0) {
        rest = rest.substr(7);
    } else if (rest.find("://") != std::string::npos) {
        return std::nullopt;
    }
    ParsedUrl out;
    const size_t slash = rest.find('/');
    std::string authority = slash == std::string::npos ? rest : rest.substr(0, slash);
    out.path = slash == std::string::npos ? "/" : rest.substr(slash);
    const size_t colon = authority.rfind(':');
    if (colon != std::string::npos) {
        out.host = authority.substr(0, colon);
        try {
            out.port = std::stoi(authority.substr(colon + 1));
        } catch (const std::exception&) {
            return std::nullopt;
        }
    } else {
        out.host = authority;
        out.port = 80;
    }
    if (out.host.empty()) {
        return std::nullopt;
    }
    return out;
}

HttpResult http_request(const std::string& host, int port, const std::string& method,
                        const std::string& path, const std::string& body,
                        const std::string& content_type, double timeout_ms) {
    const auto start = Clock::now();
    auto fail = [&](TransportErrorKind kind) {
        HttpResult r;
        r.error = kind;
        r.elapsed_ms = ms_since(start);
        return r;
    };
    auto remaining = [&]() { return timeout_ms - ms_since(start); };

    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* servinfo = nullptr;
    const std::string port_str = std::to_string(port);
    if (::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &servinfo) != 0 ||
        servinfo == nullptr) {
        return fail(TransportErrorKind::ConnectionRefused);
    }

    FdGuard guard;
    guard.fd = ::socket(servinfo->ai_family, servinfo->ai_socktype | SOCK_NONBLOCK, 0);
    if (guard.fd < 0) {
        ::freeaddrinfo(servinfo);
        return fail(TransportErrorKind::ConnectionRefused);
    }
    int one = 1;
    ::setsockopt(guard.fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    auto connect_err =
        connect_with_deadline(guard.fd, servinfo->ai_addr, servinfo->ai_addrlen, remaining());
    ::freeaddrinfo(servinfo);
    if (connect_err.has_value()) {
        return fail(*connect_err);
    }

    std::ostringstream req;
    req << method << ' ' << path << " HTTP/1.1\r\n";
    req << "Host: " << host << ':' << port << "\r\n";
    if (!body.empty() || method == "POST") {
        req << "Content-Type: " << (content_type.empty() ? "application/json" : content_type)
            << "\r\n";
        req << "Content-Length: " << body.size() << "\r\n";
    }
    req << "Connection: close\r\n\r\n";
    std::string wire = req.str() + body;

    size_t sent = 0;
    while (sent < wire.size()) {
        const double left = remaining();
        if (left <= 0) {
            return fail(TransportErrorKind::TimeoutAwaitingHeaders);
        }
        pollfd pfd{guard.fd, POLLOUT, 0};
        const int rc = ::poll(&pfd, 1, static_cast<int>(left));
        if (rc == 0) {
            return fail(TransportErrorKind::TimeoutAwaitingHeaders);
        }
        if (rc < 0) {
            return fail(TransportErrorKind::ConnectionRefused);
        }
        const ssize_t n = ::send(guard.fd, wire.data() + sent, wire.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EAGAIN || errno == EWOULDBLOCK) {
                continue;
            }
            if (errno == ECONNRESET || errno == EPIPE) {
                return fail(TransportErrorKind::ConnectionResetByPeer);
            }
            return fail(TransportErrorKind::ConnectionRefused);
        }
        sent += static_cast<size_t>(n);
    }

    // Read until the framing says the message is complete or the peer
    // closes; classify whatever interrupted us.
    RawResponse resp;
    std::string data;
    size_t header_end = std::string::npos;
    std::optional<size_t> content_length;
    bool chunked = false;

    auto parse_headers = [&]() -> std::optional<TransportErrorKind> {
        const std::string head = data.substr(0, header_end);
        std::istringstream lines(head);
        std::string status_line;
        std::getline(lines, status_line);
        if (!status_line.empty() && status_line.back() == '\r') {
            status_line.pop_back();
        }
        if (status_line.rfind("HTTP/", 0) != 0) {
            return TransportErrorKind::MalformedHttpResponse;
        }
        const size_t sp = status_line.find(' ');
        if (sp == std::string::npos || sp + 4 > status_line.size()) {
            return TransportErrorKind::MalformedHttpResponse;
        }
        try {
            resp.status = std::stoi(status_line.substr(sp + 1, 3));
        } catch (const std::exception&) {
            return TransportErrorKind::MalformedHttpResponse;
        }
        std::string line;
        while (std::getline(lines, line)) {
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (line.empty()) {
                continue;
            }
            const size_t colon = line.find(':');
            if (colon == std::string::npos) {
                return TransportErrorKind::MalformedHttpResponse;
            }
            std::string key = lowercase(line.substr(0, colon));
            std::string value = line.substr(colon + 1);
            while (!value.empty() && value.front() == ' ') {
                value.erase(value.begin());
            }
            resp.headers[key] = value;
        }
        if (auto it = resp.headers.find("content-length"); it != resp.headers.end()) {
            try {
                content_length = static_cast<size_t>(std::stoull(it->second));
            } catch (const std::exception&) {
                return TransportErrorKind::MalformedHttpResponse;
            }
        }
        if (auto it = resp.headers.find("transfer-encoding");
            it != resp.headers.end() && lowercase(it->second).find("chunked") != std::string::npos) {
            chunked = true;
        }
        resp.headers_complete = true;
        return std::nullopt;
    };

    while (true) {
        if (resp.headers_complete) {
            const std::string& body_so_far = data;
            const size_t body_have = body_so_far.size() - (header_end + 4);
            if (content_length.has_value() && body_have >= *content_length) {
                break;
            }
            if (chunked &&
                data.find("0\r\n\r\n", header_end + 4) != std::string::npos) {
                break;
            }
            if (!content_length.has_value() && !chunked) {
                // Read to EOF.
            }
        }
        const double left = remaining();
        if (left <= 0) {
            return fail(resp.headers_complete ? TransportErrorKind::TimeoutReadingBody
                                              : TransportErrorKind::TimeoutAwaitingHeaders);
        }
        pollfd pfd{guard.fd, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, static_cast<int>(left) + 1);
        if (rc == 0) {
            return fail(resp.headers_complete ? TransportErrorKind::TimeoutReadingBody
                                              : TransportErrorKind::TimeoutAwaitingHeaders);
        }
        if (rc < 0) {
            return fail(TransportErrorKind::ConnectionResetByPeer);
        }
        char buf[16384];
        const ssize_t n = ::recv(guard.fd, buf, sizeof(buf), 0);
        if (n < 0) {
            if (errno == EAGAIN || errno == EWOULDBLOCK) {
                continue;
            }
            return fail(TransportErrorKind::ConnectionResetByPeer);
        }
        if (n == 0) {
            resp.eof = true;
            if (data.empty()) {
                return fail(TransportErrorKind::Eof);
            }
            if (!resp.headers_complete) {
                if (header_end = data.find("\r\n\r\n"); header_end == std::string::npos) {
                    return fail(TransportErrorKind::MalformedHttpResponse);
                }
                if (auto err = parse_headers(); err.has_value()) {
                    return fail(*err);
                }
            }
            const size_t body_have = data.size() - (header_end + 4);
            if (content_length.has_value() && body_have < *content_length) {
                return fail(TransportErrorKind::UnexpectedEof);
            }
            break;
        }
        data.append(buf, static_cast<size_t>(n));
        if (!resp.headers_complete) {
            header_end = data.find("\r\n\r\n");
            if (header_end != std::string::npos) {
                if (auto err = parse_headers(); err.has_value()) {
                    return fail(*err);
                }
            } else if (data.size() > 64 * 1024) {
                return fail(TransportErrorKind::MalformedHttpResponse);
            }
        }
    }

    resp.raw_body = data.substr(header_end + 4);
    std::string decoded;
    if (chunked) {
        if (auto err = decode_chunked(resp.raw_body, &decoded); err.has_value()) {
            return fail(*err);
        }
    } else if (content_length.has_value()) {
        decoded = resp.raw_body.substr(0, *content_length);
    } else {
        decoded = resp.raw_body;
    }

    HttpResponse final_response;
    final_response.status = resp.status;
    final_response.headers = resp.headers;
    if (auto it = resp.headers.find("content-encoding");
        it != resp.headers.end() && lowercase(it->second) == "gzip") {
        std::string inflated;
        if (auto err = gunzip(decoded, &inflated); err.has_value()) {
            return fail(*err);
        }
        final_response.body = std::move(inflated);
    } else {
        final_response.body = std::move(decoded);
    }

    HttpResult result;
    result.response = std::move(final_response);
    result.elapsed_ms = ms_since(start);
    return result;
}

}  // namespace nvgate::net
