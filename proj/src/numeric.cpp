// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#include "sparq/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace sparq {

void require_finite(std::span<const double> values, const char* what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw Error("non-finite",
                        std::string(what) + " contains a non-finite value at index " + std::to_string(i));
        }
    }
}

Mat64::Mat64(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

Mat64::Mat64(std::size_t rows, std::size_t cols, Vec64 values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
        throw Error("shape-mismatch", "matrix of " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                                          " requires " + std::to_string(rows_ * cols_) + " values, got " +
                                          std::to_string(values_.size()));
    }
}

Mat64 Mat64::from_user(std::size_t rows, std::size_t cols, Vec64 values) {
    Mat64 m(rows, cols, std::move(values));
    require_finite(m.values(), "matrix");
    return m;
}

IndexList::IndexList(std::vector<std::size_t> indices, std::size_t bound) : indices_(std::move(indices)) {
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        if (i > 0 && indices_[i] <= indices_[i - 1]) {
            throw Error("bad-index-list", "indices must be strictly increasing");
        }
        if (indices_[i] >= bound) {
            throw Error("index-out-of-range", "index " + std::to_string(indices_[i]) +
                                                  " exceeds bound " + std::to_string(bound));
        }
    }
}

IndexList IndexList::full(std::size_t n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return IndexList(std::move(all), n);
}

bool IndexList::contains(std::size_t index) const {
    return std::binary_search(indices_.begin(), indices_.end(), index);
}

double kahan_sum(std::span<const double> values) {
    double sum = 0.0;
    double carry = 0.0;
    for (double v : values) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum;
}

Vec64 stable_softmax(std::span<const double> logits, double temperature) {
    if (logits.empty()) {
        throw Error("empty-logits", "softmax requires at least one logit");
    }
    if (!(temperature > 0.0)) {
        throw Error("bad-temperature", "softmax temperature must be positive, got " +
                                           std::to_string(temperature));
    }
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    Vec64 out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp((logits[i] - max_logit) / temperature);
    }
    const double normalizer = kahan_sum(out);
    for (double& v : out) {
        v /= normalizer;
    }
    return out;
}

IndexList argtopk(std::span<const double> values, std::size_t k) {
    const std::size_t n = values.size();
    const std::size_t count = std::min(k, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Total order: larger value first, smaller index first among equals. The
    // selected set is therefore unique, independent of the sort internals.
    const auto prefer = [&values](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) {
            return values[a] > values[b];
        }
        return a < b;
    };
    if (count < n) {
        std::nth_element(order.begin(), order.begin() + count, order.end(), prefer);
        order.resize(count);
    }
    std::sort(order.begin(), order.end());
    return IndexList(std::move(order), n == 0 ? 1 : n);
}

Mat64 gather_rows(const MatView& m, const IndexList& idx) {
    if (!idx.empty() && idx.back() >= m.rows) {
        throw Error("index-out-of-range", "row index " + std::to_string(idx.back()) +
                                              " exceeds matrix rows " + std::to_string(m.rows));
    }
    Mat64 out(idx.size(), m.cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto src = m.row(idx[i]);
        std::memcpy(out.row(i).data(), src.data(), m.cols * sizeof(double));
    }
    return out;
}

Vec64 matvec(const MatView& m, std::span<const double> x) {
    if (x.size() != m.cols) {
        throw Error("shape-mismatch", "matvec: vector length " + std::to_string(x.size()) +
                                          " does not match matrix cols " + std::to_string(m.cols));
    }
    Vec64 out(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        out[r] = dot(m.row(r), x);
    }
    return out;
}

Vec64 vecmat(std::span<const double> x, const MatView& m) {
    if (x.size() != m.rows) {
        throw Error("shape-mismatch", "vecmat: vector length " + std::to_string(x.size()) +
                                          " does not match matrix rows " + std::to_string(m.rows));
    }
    Vec64 out(m.cols, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double w = x[r];
        const auto row = m.row(r);
        for (std::size_t c = 0; c < m.cols; ++c) {
            out[c] += w * row[c];
        }
    }
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw Error("shape-mismatch", "dot: lengths " + std::to_string(a.size()) + " and " +
                                          std::to_string(b.size()) + " differ");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

}  // namespace sparq
