// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace sparq {

// Labeled buckets for counted element transfers. Every charge lands in
// exactly one category so a mismatch against the closed-form prediction can
// name the culprit.
enum class TransferCategory {
    KRows,             // component rows of K (dim-major reads, r rows of length S)
    KCols,             // full key vectors (seq-major reads, d_h per position)
    Values,            // value vector reads
    KvAppend,          // writing the current k and v (one d_h row each)
    MeanVector,        // running mean value vector read + write-back
    ScoreBookkeeping,  // per-position score accumulators (H2O)
    DualLayoutExtra,   // second copy of k written for the dual key layout
};

inline constexpr std::size_t kTransferCategoryCount = 7;

const char* transfer_category_name(TransferCategory category);

// Accumulator of scalar-element reads and writes, bucketed by category.
// Ledgers are call-local: each attention call fills a fresh one and callers
// merge them. Counters never decrease.
//
// `reconcilable_total()` excludes DualLayoutExtra: the closed-form transfer
// counts model a single logical k/v append (2*d_h), while the cache
// physically writes the key twice to keep both layouts. The extra write is
// tracked but compared separately.
class TransferLedger {
public:
    void charge_read(TransferCategory category, std::uint64_t elements);
    void charge_write(TransferCategory category, std::uint64_t elements);

    std::uint64_t reads() const;
    std::uint64_t writes() const;
    std::uint64_t total() const { return reads() + writes(); }

    std::uint64_t reads(TransferCategory category) const;
    std::uint64_t writes(TransferCategory category) const;
    std::uint64_t total(TransferCategory category) const;

    std::uint64_t reconcilable_total() const;

    // Elements read through a layout that is not contiguous for the access
    // pattern (single-K-layout mode). Informational only: these reads are
    // already counted in their category.
    std::uint64_t noncontiguous_reads = 0;

    TransferLedger& merge(const TransferLedger& other);

    // One line per non-empty category, e.g. "K-rows: 256r  V: 128r".
    std::string breakdown() const;

private:
    struct Counts {
        std::uint64_t reads = 0;
        std::uint64_t writes = 0;
    };
    std::array<Counts, kTransferCategoryCount> counts_{};
};

}  // namespace sparq
