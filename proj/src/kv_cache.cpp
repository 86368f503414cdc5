// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#include "sparq/kv_cache.hpp"

#include <algorithm>

namespace sparq {

KVCacheHead::KVCacheHead(std::size_t head_dim, bool dual_k_layout)
    : head_dim_(head_dim), dual_k_layout_(dual_k_layout), value_mean_(head_dim, 0.0) {
    if (head_dim == 0) {
        throw Error("bad-parameter", "head_dim must be positive");
    }
}

void KVCacheHead::append(std::span<const double> key, std::span<const double> value,
                         TransferLedger* ledger, bool charge_mean_update) {
    if (key.size() != head_dim_ || value.size() != head_dim_) {
        throw Error("shape-mismatch", "append expects key and value of length " + std::to_string(head_dim_));
    }
    if (length_ == dim_capacity_) {
        grow_dim_major(std::max<std::size_t>(8, dim_capacity_ * 2));
    }
    k_seq_.insert(k_seq_.end(), key.begin(), key.end());
    v_.insert(v_.end(), value.begin(), value.end());
    for (std::size_t c = 0; c < head_dim_; ++c) {
        k_dim_[c * dim_capacity_ + length_] = key[c];
    }
    const auto prior = static_cast<double>(length_);
    for (std::size_t c = 0; c < head_dim_; ++c) {
        value_mean_[c] = (prior * value_mean_[c] + value[c]) / (prior + 1.0);
    }
    ++length_;

    if (ledger != nullptr) {
        ledger->charge_write(TransferCategory::KvAppend, 2 * head_dim_);
        if (dual_k_layout_) {
            ledger->charge_write(TransferCategory::DualLayoutExtra, head_dim_);
        }
        if (charge_mean_update) {
            ledger->charge_read(TransferCategory::MeanVector, head_dim_);
            ledger->charge_write(TransferCategory::MeanVector, head_dim_);
        }
    }
}

CacheStats KVCacheHead::stats() const {
    const std::uint64_t s = length_;
    const std::uint64_t d = head_dim_;
    return {length_, head_dim_, 3 * s * d + d};
}

void KVCacheHead::grow_dim_major(std::size_t new_capacity) {
    Vec64 grown(head_dim_ * new_capacity, 0.0);
    for (std::size_t c = 0; c < head_dim_; ++c) {
        std::copy_n(k_dim_.begin() + c * dim_capacity_, length_, grown.begin() + c * new_capacity);
    }
    k_dim_ = std::move(grown);
    dim_capacity_ = new_capacity;
}

}  // namespace sparq
