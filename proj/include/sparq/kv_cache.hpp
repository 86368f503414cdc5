// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>

#include "sparq/ledger.hpp"
#include "sparq/numeric.hpp"

namespace sparq {

struct CacheStats {
    std::size_t seq_len = 0;
    std::size_t head_dim = 0;
    // Two K layouts + V + running mean: 3*S*d_h + d_h elements resident.
    std::uint64_t memory_elements = 0;
};

// Per-head key/value store for autoregressive decoding.
//
// Keys are held twice, in position-contiguous (S x d_h) and
// component-contiguous (d_h x S) layouts, so both access patterns of the
// sparse pipeline gather contiguous memory. The layouts are exact transposes
// of each other at all times. A running mean of the value rows is maintained
// incrementally. Entries are never evicted.
//
// `dual_k_layout` only changes transfer accounting (the extra append write
// vs. a non-contiguity statistic on component reads); numerics are
// layout-invariant and both layouts are always materialized.
//
// One writer per head; readers are safe between appends. Distinct heads are
// independent.
class KVCacheHead {
public:
    explicit KVCacheHead(std::size_t head_dim, bool dual_k_layout = true);

    // Appends one key/value pair. When a ledger is supplied, charges the
    // k/v write (2*d_h, plus d_h to the dual-layout bucket when enabled) and
    // optionally the mean-vector read + write-back that mean reallocation
    // incurs per step.
    // Errors: "shape-mismatch" when key or value length differs from d_h.
    void append(std::span<const double> key, std::span<const double> value,
                TransferLedger* ledger = nullptr, bool charge_mean_update = false);

    std::size_t size() const { return length_; }  // S
    std::size_t head_dim() const { return head_dim_; }
    bool dual_k_layout() const { return dual_k_layout_; }

    MatView keys_seq_major() const { return {k_seq_.data(), length_, head_dim_, head_dim_}; }
    MatView keys_dim_major() const { return {k_dim_.data(), head_dim_, length_, dim_capacity_}; }
    MatView values() const { return {v_.data(), length_, head_dim_, head_dim_}; }
    const Vec64& value_mean() const { return value_mean_; }

    CacheStats stats() const;

private:
    void grow_dim_major(std::size_t new_capacity);

    std::size_t head_dim_;
    bool dual_k_layout_;
    std::size_t length_ = 0;
    Vec64 k_seq_;  // row-major S x d_h
    Vec64 v_;      // row-major S x d_h
    // Row-major d_h x capacity; rows are padded to `dim_capacity_` so a
    // component row stays contiguous while the sequence grows (amortized
    // doubling, not charged to the ledger).
    Vec64 k_dim_;
    std::size_t dim_capacity_ = 0;
    Vec64 value_mean_;
};

}  // namespace sparq
