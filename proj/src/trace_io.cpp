// Copyright (c) 2026 the sparq-bench authors
// SPDX-License-Identifier: Apache-2.0

#include "sparq/trace_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace sparq {

namespace {

// Sanity bounds: a name or rank beyond these means we are reading garbage,
// not a real trace.
constexpr std::uint32_t kMaxNameLength = 1u << 20;
constexpr std::uint32_t kMaxRank = 8;

[[noreturn]] void parse_error(std::uint64_t offset, const std::string& what) {
    throw Error("trace-parse-error", what + " at byte " + std::to_string(offset));
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::uint64_t offset() const { return offset_; }

    bool at_eof() {
        return in_.peek() == std::char_traits<char>::eof();
    }

    void read_exact(void* dst, std::size_t n, const char* what) {
        in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) {
            parse_error(offset_ + static_cast<std::uint64_t>(in_.gcount()), std::string("truncated ") + what);
        }
        offset_ += n;
    }

    std::uint8_t read_u8(const char* what) {
        std::uint8_t v = 0;
        read_exact(&v, 1, what);
        return v;
    }

    std::uint32_t read_u32(const char* what) {
        std::uint8_t b[4];
        read_exact(b, 4, what);
        return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
               static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
    }

    std::uint64_t read_u64(const char* what) {
        std::uint8_t b[8];
        read_exact(b, 8, what);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) {
            v = v << 8 | b[i];
        }
        return v;
    }

private:
    std::istream& in_;
    std::uint64_t offset_ = 0;
};

void write_u32(std::ostream& out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                       static_cast<char>(v >> 24)};
    out.write(b, 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<char>(v >> (8 * i));
    }
    out.write(b, 8);
}

}  // namespace

std::uint64_t TraceTensor::element_count() const {
    std::uint64_t n = 1;
    for (std::uint64_t d : dims) {
        n *= d;
    }
    return n;
}

const TraceTensor* TraceFile::find(const std::string& name) const {
    for (const TraceTensor& t : tensors) {
        if (t.name == name) {
            return &t;
        }
    }
    return nullptr;
}

void write_trace(std::ostream& out, const TraceFile& file) {
    out.write(kTraceMagic, sizeof(kTraceMagic));
    write_u32(out, file.version);
    for (const TraceTensor& tensor : file.tensors) {
        if (tensor.data.size() != tensor.element_count()) {
            throw Error("trace-shape-error", "tensor '" + tensor.name + "' payload does not match its dims");
        }
        write_u32(out, static_cast<std::uint32_t>(tensor.name.size()));
        out.write(tensor.name.data(), static_cast<std::streamsize>(tensor.name.size()));
        write_u32(out, static_cast<std::uint32_t>(tensor.dims.size()));
        for (std::uint64_t d : tensor.dims) {
            write_u64(out, d);
        }
        const auto dtype = static_cast<std::uint8_t>(tensor.dtype);
        out.write(reinterpret_cast<const char*>(&dtype), 1);
        if (tensor.dtype == TraceDtype::Float64) {
            for (double v : tensor.data) {
                write_u64(out, std::bit_cast<std::uint64_t>(v));
            }
        } else {
            for (double v : tensor.data) {
                write_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
            }
        }
    }
    if (!out) {
        throw Error("io-error", "failed writing trace stream");
    }
}

void write_trace_file(const std::string& path, const TraceFile& file) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("io-error", "cannot open '" + path + "' for writing");
    }
    write_trace(out, file);
}

TraceFile read_trace(std::istream& in) {
    Reader reader(in);

    char magic[sizeof(kTraceMagic)];
    reader.read_exact(magic, sizeof(magic), "magic");
    if (std::memcmp(magic, kTraceMagic, sizeof(magic)) != 0) {
        parse_error(0, "bad magic");
    }

    TraceFile file;
    file.version = reader.read_u32("version");
    if (file.version != kTraceVersion) {
        parse_error(sizeof(kTraceMagic), "unsupported version " + std::to_string(file.version));
    }

    while (!reader.at_eof()) {
        TraceTensor tensor;
        const std::uint64_t entry_offset = reader.offset();

        const std::uint32_t name_len = reader.read_u32("name length");
        if (name_len == 0 || name_len > kMaxNameLength) {
            parse_error(entry_offset, "implausible name length " + std::to_string(name_len));
        }
        tensor.name.resize(name_len);
        reader.read_exact(tensor.name.data(), name_len, "name");

        const std::uint32_t rank = reader.read_u32("rank");
        if (rank == 0 || rank > kMaxRank) {
            parse_error(reader.offset() - 4, "implausible rank " + std::to_string(rank));
        }
        tensor.dims.resize(rank);
        std::uint64_t elements = 1;
        for (std::uint32_t i = 0; i < rank; ++i) {
            tensor.dims[i] = reader.read_u64("dims");
            if (tensor.dims[i] == 0 ||
                elements > std::numeric_limits<std::uint64_t>::max() / tensor.dims[i]) {
                parse_error(reader.offset() - 8, "implausible dimension " + std::to_string(tensor.dims[i]));
            }
            elements *= tensor.dims[i];
        }
        if (elements > (std::uint64_t{1} << 32)) {
            parse_error(entry_offset, "tensor too large (" + std::to_string(elements) + " elements)");
        }

        const std::uint8_t dtype = reader.read_u8("dtype");
        if (dtype > 1) {
            parse_error(reader.offset() - 1, "unknown dtype code " + std::to_string(dtype));
        }
        tensor.dtype = static_cast<TraceDtype>(dtype);

        tensor.data.resize(elements);
        const std::size_t width = tensor.dtype == TraceDtype::Float64 ? 8 : 4;
        std::vector<std::uint8_t> buffer;
        for (std::uint64_t done = 0; done < elements;) {
            const std::uint64_t chunk = std::min<std::uint64_t>(elements - done, 1u << 20);
            const std::uint64_t chunk_offset = reader.offset();
            buffer.resize(static_cast<std::size_t>(chunk) * width);
            reader.read_exact(buffer.data(), buffer.size(), "payload");
            for (std::uint64_t i = 0; i < chunk; ++i) {
                std::uint64_t bits = 0;
                for (std::size_t b = width; b-- > 0;) {
                    bits = bits << 8 | buffer[i * width + b];
                }
                const double value = tensor.dtype == TraceDtype::Float64
                                         ? std::bit_cast<double>(bits)
                                         : static_cast<double>(
                                               std::bit_cast<float>(static_cast<std::uint32_t>(bits)));
                if (!std::isfinite(value)) {
                    parse_error(chunk_offset + i * width, "non-finite payload value");
                }
                tensor.data[done + i] = value;
            }
            done += chunk;
        }
        file.tensors.push_back(std::move(tensor));
    }
    return file;
}

TraceFile read_trace_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("io-error", "cannot open '" + path + "' for reading");
    }
    return read_trace(in);
}

}  // namespace sparq
