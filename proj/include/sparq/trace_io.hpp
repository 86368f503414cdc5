// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sparq/numeric.hpp"

namespace sparq {

// Binary container for captured tensors (e.g. a q vector plus K and V
// matrices pulled out of a real model). Layout, all little-endian:
//
//   bytes 0..7   magic "SPQTRACE"
//   bytes 8..11  format version, u32 (currently 1)
//   then zero or more entries until end of file:
//     u32            name length in bytes
//     bytes          name (UTF-8, no terminator)
//     u32            rank
//     u64 * rank     dims
//     u8             dtype: 0 = 32-bit float, 1 = 64-bit float
//     payload        product(dims) elements, row-major
//
// Values are widened to 64-bit on load (exact for every 32-bit float).
// Parse failures throw Error("trace-parse-error") naming the byte offset;
// payloads must be finite.

inline constexpr char kTraceMagic[8] = {'S', 'P', 'Q', 'T', 'R', 'A', 'C', 'E'};
inline constexpr std::uint32_t kTraceVersion = 1;

enum class TraceDtype : std::uint8_t { Float32 = 0, Float64 = 1 };

struct TraceTensor {
    std::string name;
    std::vector<std::uint64_t> dims;
    TraceDtype dtype = TraceDtype::Float64;
    Vec64 data;  // always 64-bit in memory

    std::uint64_t element_count() const;
};

struct TraceFile {
    std::uint32_t version = kTraceVersion;
    std::vector<TraceTensor> tensors;

    // nullptr when absent.
    const TraceTensor* find(const std::string& name) const;
};

void write_trace(std::ostream& out, const TraceFile& file);
void write_trace_file(const std::string& path, const TraceFile& file);

TraceFile read_trace(std::istream& in);
TraceFile read_trace_file(const std::string& path);

}  // namespace sparq
