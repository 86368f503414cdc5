// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sparq {

// Library error with a stable machine-readable code (e.g. "shape-mismatch",
// "empty-logits") plus a human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Counted transfers disagree with the closed-form prediction. Kept as a
// distinct type so callers (notably the CLI) can map it to its own exit code.
class LedgerDivergence : public Error {
public:
    explicit LedgerDivergence(const std::string& message)
        : Error("ledger-analytic-divergence", message) {}
};

}  // namespace sparq
