// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sparq/numeric.hpp"
#include "sparq/workload.hpp"

using namespace sparq;

TEST_CASE("softmax: single element is 1") {
    const Vec64 out = stable_softmax(Vec64{0.0}, 1.0);
    REQUIRE(out.size() == 1);
    CHECK(out[0] == 1.0);
}

TEST_CASE("softmax: equal logits are uniform at any temperature") {
    for (double t : {0.1, 1.0, 37.0}) {
        const Vec64 out = stable_softmax(Vec64{3.25, 3.25, 3.25, 3.25}, t);
        for (double v : out) {
            CHECK(v == doctest::Approx(0.25).epsilon(1e-14));
        }
    }
}

TEST_CASE("softmax: matches direct evaluation") {
    const Vec64 out = stable_softmax(Vec64{1.0, 2.0, 3.0}, 1.0);
    CHECK(out[0] == doctest::Approx(0.09003057).epsilon(1e-7));
    CHECK(out[1] == doctest::Approx(0.24472847).epsilon(1e-7));
    CHECK(out[2] == doctest::Approx(0.66524096).epsilon(1e-7));

    const oracle::Vec expect = oracle::softmax({1.0, 2.0, 3.0}, 1.0);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(out[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    }
}

TEST_CASE("softmax: errors") {
    CHECK_THROWS_WITH_AS(stable_softmax(Vec64{}, 1.0), doctest::Contains("empty-logits"), Error);
    CHECK_THROWS_WITH_AS(stable_softmax(Vec64{1.0}, 0.0), doctest::Contains("bad-temperature"), Error);
    CHECK_THROWS_WITH_AS(stable_softmax(Vec64{1.0}, -2.0), doctest::Contains("bad-temperature"), Error);
}

TEST_CASE("softmax: probability vector for extreme finite inputs") {
    Rng rng(2024);
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 1 + rng.index(12);
        Vec64 x(n);
        for (double& v : x) {
            // Magnitudes up to 1e300, both signs.
            const double exponent = (rng.uniform() * 2.0 - 1.0) * 300.0;
            const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            v = sign * std::pow(10.0, exponent);
        }
        const Vec64 out = stable_softmax(x, 0.5 + rng.uniform());
        for (double v : out) {
            REQUIRE(v >= 0.0);
            REQUIRE(std::isfinite(v));
        }
        REQUIRE(std::abs(kahan_sum(out) - 1.0) < 1e-12);
    }
}

TEST_CASE("softmax: temperature equals pre-scaling") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.index(20);
        const double t = 0.25 + 4.0 * rng.uniform();
        Vec64 x(n);
        Vec64 scaled(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.normal() * 10.0;
            scaled[i] = x[i] / t;
        }
        const Vec64 a = stable_softmax(x, t);
        const Vec64 b = stable_softmax(scaled, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("argtopk: examples") {
    CHECK(argtopk(Vec64{3, 1, 2}, 1).indices() == std::vector<std::size_t>{0});
    CHECK(argtopk(Vec64{5, 5, 1}, 1).indices() == std::vector<std::size_t>{0});
    CHECK(argtopk(Vec64{0.1, 0.9, 0.5, 0.9}, 2).indices() == std::vector<std::size_t>{1, 3});
}

TEST_CASE("argtopk: k clamps and full k is the identity") {
    CHECK(argtopk(Vec64{1, 2, 3}, 9).size() == 3);
    CHECK(argtopk(Vec64{4, 2, 9, 1}, 4).indices() == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(argtopk(Vec64{1, 2}, 0).empty());
    CHECK(argtopk(Vec64{}, 3).empty());
}

TEST_CASE("argtopk: agrees with full-sort oracle on tied data") {
    Rng rng(99);
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 1 + rng.index(24);
        Vec64 x(n);
        for (double& v : x) {
            // Small discrete support forces plenty of duplicates.
            v = static_cast<double>(rng.index(5));
        }
        const std::size_t k = rng.index(n + 2);
        CHECK(argtopk(x, k).indices() == oracle::topk_by_sort(x, k));
    }
}

TEST_CASE("gather_rows: examples and inverse permutation") {
    Mat64 m(3, 2, Vec64{1, 2, 3, 4, 5, 6});
    const Mat64 same = gather_rows(m.view(), IndexList::full(3));
    CHECK(same.values() == m.values());

    const Mat64 last = gather_rows(m.view(), IndexList({2}, 3));
    CHECK(last.rows() == 1);
    CHECK(last.values() == Vec64{5, 6});

    Rng rng(5);
    Vec64 data(8 * 4);
    for (double& v : data) {
        v = rng.normal();
    }
    Mat64 big(8, 4, data);
    const Mat64 picked = gather_rows(big.view(), IndexList({1, 5}, 8));
    for (std::size_t c = 0; c < 4; ++c) {
        CHECK(picked.at(0, c) == big.at(1, c));
        CHECK(picked.at(1, c) == big.at(5, c));
    }

    CHECK_THROWS_WITH_AS(gather_rows(m.view(), IndexList({0, 3}, 4)),
                         doctest::Contains("index-out-of-range"), Error);
}

TEST_CASE("gather_rows: subsets copy bit-exactly and compose") {
    Rng rng(777);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t rows = 1 + rng.index(16);
        const std::size_t cols = 1 + rng.index(6);
        Vec64 data(rows * cols);
        for (double& v : data) {
            v = rng.normal() * std::pow(2.0, static_cast<double>(rng.index(40)) - 20.0);
        }
        const Mat64 m(rows, cols, data);

        std::vector<std::size_t> subset;
        for (std::size_t r = 0; r < rows; ++r) {
            if (rng.uniform() < 0.5) {
                subset.push_back(r);
            }
        }
        if (subset.empty()) {
            subset.push_back(rng.index(rows));
        }
        const IndexList idx(subset, rows);
        const Mat64 gathered = gather_rows(m.view(), idx);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            for (std::size_t c = 0; c < cols; ++c) {
                REQUIRE(gathered.at(i, c) == m.at(idx[i], c));
            }
        }
        // Gathering everything back out of the gather changes nothing.
        const Mat64 twice = gather_rows(gathered.view(), IndexList::full(idx.size()));
        REQUIRE(twice.values() == gathered.values());
    }
}

TEST_CASE("matvec and vecmat") {
    Mat64 identity(2, 2, Vec64{1, 0, 0, 1});
    CHECK(matvec(identity.view(), Vec64{3.5, -2.0}) == Vec64{3.5, -2.0});

    Mat64 zeros(3, 2);
    CHECK(matvec(zeros.view(), Vec64{1, 1}) == Vec64{0, 0, 0});

    Mat64 m(2, 2, Vec64{1, 2, 3, 4});
    CHECK(matvec(m.view(), Vec64{1, 1}) == Vec64{3, 7});
    CHECK(vecmat(Vec64{1, 1}, m.view()) == Vec64{4, 6});

    CHECK_THROWS_WITH_AS(matvec(m.view(), Vec64{1, 2, 3}), doctest::Contains("shape-mismatch"), Error);
    CHECK_THROWS_WITH_AS(vecmat(Vec64{1}, m.view()), doctest::Contains("shape-mismatch"), Error);
}

TEST_CASE("Mat64 and IndexList invariants") {
    CHECK_THROWS_WITH_AS(Mat64(2, 2, Vec64{1, 2, 3}), doctest::Contains("shape-mismatch"), Error);
    CHECK_THROWS_WITH_AS(Mat64::from_user(1, 2, Vec64{1.0, std::nan("")}),
                         doctest::Contains("non-finite"), Error);
    CHECK_THROWS_WITH_AS(IndexList({2, 1}, 5), doctest::Contains("bad-index-list"), Error);
    CHECK_THROWS_WITH_AS(IndexList({1, 1}, 5), doctest::Contains("bad-index-list"), Error);
    CHECK_THROWS_WITH_AS(IndexList({5}, 5), doctest::Contains("index-out-of-range"), Error);
    CHECK(IndexList({0, 2, 4}, 5).contains(2));
    CHECK_FALSE(IndexList({0, 2, 4}, 5).contains(3));
}
