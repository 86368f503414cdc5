// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#include "sparq/ledger.hpp"

namespace sparq {

namespace {
constexpr const char* kCategoryNames[kTransferCategoryCount] = {
    "K-rows", "K-columns", "V", "kv-append", "mean-vector", "score-bookkeeping", "dual-layout-extra",
};
}  // namespace

const char* transfer_category_name(TransferCategory category) {
    return kCategoryNames[static_cast<std::size_t>(category)];
}

void TransferLedger::charge_read(TransferCategory category, std::uint64_t elements) {
    counts_[static_cast<std::size_t>(category)].reads += elements;
}

void TransferLedger::charge_write(TransferCategory category, std::uint64_t elements) {
    counts_[static_cast<std::size_t>(category)].writes += elements;
}

std::uint64_t TransferLedger::reads() const {
    std::uint64_t sum = 0;
    for (const auto& c : counts_) {
        sum += c.reads;
    }
    return sum;
}

std::uint64_t TransferLedger::writes() const {
    std::uint64_t sum = 0;
    for (const auto& c : counts_) {
        sum += c.writes;
    }
    return sum;
}

std::uint64_t TransferLedger::reads(TransferCategory category) const {
    return counts_[static_cast<std::size_t>(category)].reads;
}

std::uint64_t TransferLedger::writes(TransferCategory category) const {
    return counts_[static_cast<std::size_t>(category)].writes;
}

std::uint64_t TransferLedger::total(TransferCategory category) const {
    const auto& c = counts_[static_cast<std::size_t>(category)];
    return c.reads + c.writes;
}

std::uint64_t TransferLedger::reconcilable_total() const {
    return total() - total(TransferCategory::DualLayoutExtra);
}

TransferLedger& TransferLedger::merge(const TransferLedger& other) {
    for (std::size_t i = 0; i < kTransferCategoryCount; ++i) {
        counts_[i].reads += other.counts_[i].reads;
        counts_[i].writes += other.counts_[i].writes;
    }
    noncontiguous_reads += other.noncontiguous_reads;
    return *this;
}

std::string TransferLedger::breakdown() const {
    std::string out;
    for (std::size_t i = 0; i < kTransferCategoryCount; ++i) {
        const auto& c = counts_[i];
        if (c.reads == 0 && c.writes == 0) {
            continue;
        }
        if (!out.empty()) {
            out += "  ";
        }
        out += kCategoryNames[i];
        out += ": ";
        if (c.reads != 0) {
            out += std::to_string(c.reads) + "r";
        }
        if (c.writes != 0) {
            if (c.reads != 0) {
                out += "+";
            }
            out += std::to_string(c.writes) + "w";
        }
    }
    if (out.empty()) {
        out = "(no transfers)";
    }
    return out;
}

}  // namespace sparq
