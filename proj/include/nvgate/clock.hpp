// Copyright 2026 The nvgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>

namespace nvgate {

// Milliseconds since an arbitrary epoch. Virtual clocks start at zero;
// the system clock counts from process start.
class TimeSource {
  public:
    virtual ~TimeSource() = default;
    virtual double now_ms() const = 0;
};

// Manually advanced clock for deterministic experiment cells.
class VirtualClock final : public TimeSource {
  public:
    explicit VirtualClock(double start_ms = 0.0) : t_ms_(start_ms) {}

    double now_ms() const override { return t_ms_; }
    void advance_ms(double delta) { t_ms_ += delta; }
    void set_ms(double t) { t_ms_ = t; }

  private:
    double t_ms_;
};

class SystemClock final : public TimeSource {
  public:
    SystemClock() : start_(std::chrono::steady_clock::now()) {}

    double now_ms() const override {
        auto d = std::chrono::steady_clock::now() - start_;
        return std::chrono::duration<double, std::milli>(d).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace nvgate
