// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvgate/simnode_server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>
#include <zlib.h>

#include <cstring>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nvgate {

namespace {

void sleep_ms(double ms) {
    if (ms > 0) {
        std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
    }
}

void write_all(int fd, const std::string& data) {
    size_t sent = 0;
    while (sent < data.size()) {
        const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) {
            return;
        }
        sent += static_cast<size_t>(n);
    }
}

std::string well_formed(int status, const std::string& reason, const std::string& body,
                        const std::string& extra_headers = {}) {
    std::ostringstream out;
    out << "HTTP/1.1 " << status << ' ' << reason << "\r\n";
    out << "Content-Type: application/json\r\n";
    out << "Content-Length: " << body.size() << "\r\n";
    out << extra_headers;
    out << "Connection: close\r\n\r\n";
    out << body;
    return out.str();
}

void reset_connection(int fd) {
    linger lg{1, 0};
    ::setsockopt(fd, SOL_SOCKET, SO_LINGER, &lg, sizeof(lg));
    ::close(fd);
}

std::string gzip_with_bad_checksum(const std::string& body) {
    z_stream zs{};
    deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY);
    std::string compressed;
    compressed.resize(deflateBound(&zs, static_cast<uLong>(body.size())) + 32);
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(body.data()));
    zs.avail_in = static_cast<uInt>(body.size());
    zs.next_out = reinterpret_cast<Bytef*>(compressed.data());
    zs.avail_out = static_cast<uInt>(compressed.size());
    deflate(&zs, Z_FINISH);
    compressed.resize(compressed.size() - zs.avail_out);
    deflateEnd(&zs);
    // The gzip trailer ends with CRC32 + ISIZE; flipping CRC bytes breaks
    // the checksum while the deflate stream stays intact.
    if (compressed.size() >= 8) {
        compressed[compressed.size() - 8] ^= 0xff;
        compressed[compressed.size() - 7] ^= 0xff;
    }
    return compressed;
}

struct ParsedHttpRequest {
    std::string method;
    std::string path;
    std::string body;
    bool ok = false;
};

ParsedHttpRequest read_request(int fd, double timeout_ms) {
    ParsedHttpRequest req;
    std::string data;
    size_t header_end = std::string::npos;
    size_t content_length = 0;
    const auto start = std::chrono::steady_clock::now();
    while (true) {
        const double elapsed =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        const double left = timeout_ms - elapsed;
        if (left <= 0) {
            return req;
        }
        pollfd pfd{fd, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, static_cast<int>(left) + 1);
        if (rc <= 0) {
            return req;
        }
        char buf[8192];
        const ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
        if (n <= 0) {
            return req;
        }
        data.append(buf, static_cast<size_t>(n));
        if (header_end == std::string::npos) {
            header_end = data.find("\r\n\r\n");
            if (header_end == std::string::npos) {
                if (data.size() > 64 * 1024) {
                    return req;
                }
                continue;
            }
            std::istringstream head(data.substr(0, header_end));
            std::string request_line;
            std::getline(head, request_line);
            std::istringstream parts(request_line);
            parts >> req.method >> req.path;
            std::string line;
            while (std::getline(head, line)) {
                if (!line.empty() && line.back() == '\r') {
                    line.pop_back();
                }
                std::string lower;
                for (char c : line) {
                    lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
                }
                if (lower.rfind("content-length:", 0) == 0) {
                    try {
                        content_length = std::stoull(line.substr(15));
                    } catch (const std::exception&) {
                        return req;
                    }
                }
            }
        }
        if (header_end != std::string::npos && data.size() >= header_end + 4 + content_length) {
            req.body = data.substr(header_end + 4, content_length);
            req.ok = !req.method.empty() && !req.path.empty();
            return req;
        }
    }
}

}  // namespace

SimNodeServer::SimNodeServer(std::shared_ptr<SimNodeCore> core,
                             std::shared_ptr<const TimeSource> clock, int port)
    : core_(std::move(core)), clock_(std::move(clock)), port_(port) {}

SimNodeServer::~SimNodeServer() {
    stop();
}

bool SimNodeServer::start() {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) {
        return false;
    }
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<uint16_t>(port_));
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(fd, 64) != 0) {
        ::close(fd);
        return false;
    }
    if (port_ == 0) {
        socklen_t len = sizeof(addr);
        ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
        port_ = ntohs(addr.sin_port);
    }
    listener_fd_.store(fd);
    running_.store(true);
    accept_thread_ = std::thread([this] { accept_loop(); });
    return true;
}

void SimNodeServer::stop() {
    if (!running_.exchange(false)) {
        return;
    }
    const int fd = listener_fd_.exchange(-1);
    if (fd >= 0) {
        ::close(fd);
    }
    if (accept_thread_.joinable()) {
        accept_thread_.join();
    }
    std::lock_guard lock(workers_mu_);
    for (auto& worker : workers_) {
        if (worker.joinable()) {
            worker.join();
        }
    }
    workers_.clear();
}

void SimNodeServer::accept_loop() {
    while (running_.load()) {
        const bool crashed = core_->crashed(clock_->now_ms());
        int fd = listener_fd_.load();

        if (crashed) {
            // Take the listener down so connects are actually refused.
            if (fd >= 0 && listener_fd_.compare_exchange_strong(fd, -1)) {
                ::close(fd);
            }
            sleep_ms(5);
            continue;
        }
        if (fd < 0) {
            // Recovered: rebind.
            const int nfd = ::socket(AF_INET, SOCK_STREAM, 0);
            if (nfd < 0) {
                sleep_ms(20);
                continue;
            }
            int one = 1;
            ::setsockopt(nfd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
            sockaddr_in addr{};
            addr.sin_family = AF_INET;
            addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
            addr.sin_port = htons(static_cast<uint16_t>(port_));
            if (::bind(nfd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
                ::listen(nfd, 64) != 0) {
                ::close(nfd);
                sleep_ms(20);
                continue;
            }
            listener_fd_.store(nfd);
            fd = nfd;
        }

        pollfd pfd{fd, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, 20);
        if (rc <= 0) {
            continue;
        }
        const int conn = ::accept(fd, nullptr, nullptr);
        if (conn < 0) {
            continue;
        }
        std::lock_guard lock(workers_mu_);
        workers_.emplace_back([this, conn] { handle_connection(conn); });
    }
}

void SimNodeServer::handle_connection(int fd) {
    ParsedHttpRequest http = read_request(fd, 5000.0);
    if (!http.ok) {
        ::close(fd);
        return;
    }

    const double now = clock_->now_ms();

    if (http.path.rfind("/control/", 0) == 0) {
        nlohmann::json reply;
        int status = 200;
        try {
            if (http.path == "/control/head") {
                reply = {{"head", core_->local_head(now)},
                         {"global_head", core_->global_head(now)}};
            } else if (http.path == "/control/global-head") {
                reply = {{"head", core_->global_head(now)}};
            } else if (http.path == "/control/fault-config") {
                core_->load_fault_config(SimNodeFaultConfig::from_json(nlohmann::json::parse(http.body)));
                reply = {{"ok", true}};
            } else if (http.path == "/control/crash") {
                const auto j = nlohmann::json::parse(http.body);
                core_->crash(now, j.value("duration_s", 10.0));
                reply = {{"ok", true}};
            } else if (http.path == "/control/restore") {
                core_->restore(now);
                reply = {{"ok", true}};
            } else {
                status = 404;
                reply = {{"error", "unknown control path"}};
            }
        } catch (const std::exception& e) {
            status = 400;
            reply = {{"error", e.what()}};
        }
        write_all(fd, well_formed(status, status == 200 ? "OK" : "Bad Request", reply.dump()));
        ::close(fd);
        return;
    }

    auto parsed = RpcRequest::parse(http.body);
    if (!parsed.has_value()) {
        const std::string body =
            R"({"jsonrpc":"2.0","id":null,"error":{"code":-32600,"message":"invalid request"}})";
        write_all(fd, well_formed(200, "OK", body));
        ::close(fd);
        return;
    }

    const ServeResult served = core_->serve(*parsed, now);
    using Kind = ServeResult::Kind;
    switch (served.kind) {
        case Kind::Body:
            sleep_ms(served.latency_ms);
            write_all(fd, well_formed(200, "OK", served.body));
            ::close(fd);
            return;
        case Kind::Refuse:
            // Mid-connection refusal approximates to dropping the client;
            // true refusal happens while the listener is down during a
            // crash window.
        case Kind::Eof:
        case Kind::IdleClose:
            sleep_ms(served.latency_ms);
            ::close(fd);
            return;
        case Kind::StallHeaders:
            sleep_ms(served.latency_ms);
            ::close(fd);
            return;
        case Kind::StallBody: {
            std::ostringstream head;
            head << "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: "
                 << served.body.size() * 2 << "\r\nConnection: close\r\n\r\n";
            write_all(fd, head.str() + served.body.substr(0, served.body.size() / 2));
            sleep_ms(served.latency_ms);
            ::close(fd);
            return;
        }
        case Kind::Reset:
            sleep_ms(served.latency_ms);
            reset_connection(fd);
            return;
        case Kind::UnexpectedEof: {
            std::ostringstream head;
            head << "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: "
                 << served.body.size() << "\r\nConnection: close\r\n\r\n";
            sleep_ms(served.latency_ms);
            write_all(fd, head.str() + served.body.substr(0, served.body.size() / 2));
            ::close(fd);
            return;
        }
        case Kind::MalformedHttp:
            sleep_ms(served.latency_ms);
            write_all(fd, "BOGUS/0.9 ?? nonsense\r\nxx\r\n\r\n");
            ::close(fd);
            return;
        case Kind::BadChunk:
            sleep_ms(served.latency_ms);
            write_all(fd,
                      "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nTransfer-Encoding: "
                      "chunked\r\nConnection: close\r\n\r\nzz!\r\ngarbage\r\n0\r\n\r\n");
            ::close(fd);
            return;
        case Kind::BadChecksum: {
            const std::string payload = gzip_with_bad_checksum(served.body);
            std::ostringstream head;
            head << "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Encoding: "
                    "gzip\r\nContent-Length: "
                 << payload.size() << "\r\nConnection: close\r\n\r\n";
            sleep_ms(served.latency_ms);
            write_all(fd, head.str() + payload);
            ::close(fd);
            return;
        }
    }
    ::close(fd);
}

}  // namespace nvgate
