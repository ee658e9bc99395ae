// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "nvgate/types.hpp"

namespace nvgate {

enum class Status {
    Available,
    Degraded,
    Unavailable,
};

std::string_view to_string(Status status);
std::optional<Status> status_from_string(std::string_view name);

// The per-response classification tuple. freshness is undefined (nullopt)
// when the body is non-compliant or carries no extractable head; methods
// without head information report 0.
struct AvailabilityVerdict {
    Status status = Status::Unavailable;
    double t_r_ms = 0.0;
    bool compliant = false;
    std::optional<uint64_t> freshness;
};

// True iff the body parses as a JSON-RPC 2.0 response and the result matches
// the method's registered shape. Methods outside the pool degrade to
// envelope-only validity. A well-formed JSON-RPC error object is a compliant
// response: the API answered, it just answered with an error.
bool check_compliance(std::string_view raw, std::string_view method);

// Block distance, clamped at zero when the node is ahead of the oracle.
inline uint64_t freshness(uint64_t node_head, uint64_t oracle_head) {
    return oracle_head > node_head ? oracle_head - node_head : 0;
}

// Maps one exchange to its availability status:
//   available    iff t_r <= T and compliant and f_r <= F
//   degraded     iff t_r <= T and (not compliant or f_r > F)
//   unavailable  iff t_r > T, or the request was denied (transport error
//                with no body), regardless of how fast the denial arrived
// The three cases are exhaustive and mutually exclusive. For a timely body
// with no extractable head, f_r is 0 unless the body is non-compliant.
AvailabilityVerdict classify(const RpcExchange& exchange, uint64_t oracle_head,
                             const ClassifierConfig& config);

// When a body is present but non-compliant, names the defect for the error
// histogram: a corrupted character or a truncated JSON document map to their
// taxonomy kinds; other defects report nullopt.
std::optional<TransportErrorKind> diagnose_body_defect(std::string_view raw);

}  // namespace nvgate
