// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sparq/error.hpp"

namespace sparq {

// All reference math is carried out in 64-bit floats. Transfers are counted
// in scalar elements, so the number format never enters the cost model.
using Vec64 = std::vector<double>;

// Throws Error("non-finite") if any element is NaN or infinite. Applied at
// user-input boundaries (trace files, CLI); internal kernels keep values
// finite by construction.
void require_finite(std::span<const double> values, const char* what);

// Non-owning row-major matrix view. `stride` is the distance between row
// starts and may exceed `cols` (the KV cache grows its dim-major layout with
// spare capacity).
struct MatView {
    const double* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t stride = 0;

    std::span<const double> row(std::size_t r) const { return {data + r * stride, cols}; }
    double at(std::size_t r, std::size_t c) const { return data[r * stride + c]; }
};

// Owning, contiguous row-major matrix of 64-bit floats.
class Mat64 {
public:
    Mat64() = default;
    Mat64(std::size_t rows, std::size_t cols);  // zero-filled
    Mat64(std::size_t rows, std::size_t cols, Vec64 values);

    // Validating constructor for externally supplied data (checks finiteness).
    static Mat64 from_user(std::size_t rows, std::size_t cols, Vec64 values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
    const Vec64& values() const { return values_; }
    MatView view() const { return {values_.data(), rows_, cols_, cols_}; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vec64 values_;
};

// Strictly increasing list of non-negative indices, all below a declared
// bound. Concrete representation of index sets and boolean position masks.
class IndexList {
public:
    IndexList() = default;
    IndexList(std::vector<std::size_t> indices, std::size_t bound);

    static IndexList full(std::size_t n);  // 0..n-1

    std::size_t size() const { return indices_.size(); }
    bool empty() const { return indices_.empty(); }
    std::size_t operator[](std::size_t i) const { return indices_[i]; }
    auto begin() const { return indices_.begin(); }
    auto end() const { return indices_.end(); }
    std::size_t back() const { return indices_.back(); }
    bool contains(std::size_t index) const;  // binary search
    const std::vector<std::size_t>& indices() const { return indices_; }

private:
    std::vector<std::size_t> indices_;
};

// Compensated (Kahan) sum; used where a probability normalizer must stay
// accurate for long inputs.
double kahan_sum(std::span<const double> values);

// softmax(x / temperature), computed with max-subtraction so any finite
// input is safe. Output sums to 1 within 1e-12.
// Errors: "empty-logits" for empty input, "bad-temperature" for t <= 0.
Vec64 stable_softmax(std::span<const double> logits, double temperature);

// Indices of the k largest values, ascending. Ties break toward the smaller
// index. k is clamped to the input length (visible via the result size).
IndexList argtopk(std::span<const double> values, std::size_t k);

// Copies the selected rows, in index order, bit-identically.
// Errors: "index-out-of-range" if an index exceeds m.rows.
Mat64 gather_rows(const MatView& m, const IndexList& idx);

// m (r x c) * x (c) -> (r). Accumulation is sequential and index-ascending
// so results are bit-reproducible across runs.
Vec64 matvec(const MatView& m, std::span<const double> x);

// x (r) * m (r x c) -> (c). Same accumulation-order guarantee as matvec.
Vec64 vecmat(std::span<const double> x, const MatView& m);

// Plain sequential dot product; shape-checked.
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace sparq
