#pragma once

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <type_traits>

#include "xma/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian and this code writes host bytes");

namespace xma::io {

// Writes to "<path>.tmp" then renames over path, so readers never observe a
// partially written file.
void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& body);

template <class T>
void put(std::ostream& os, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    os.write(reinterpret_cast<const char*>(&value), sizeof value);
    if (!os) throw IoError("write failed");
}

template <class T>
T get(std::istream& is, const char* what) {
    static_assert(std::is_trivially_copyable_v<T>);
    T value;
    is.read(reinterpret_cast<char*>(&value), sizeof value);
    if (is.gcount() != std::streamsize(sizeof value))
        throw TruncatedFileError(std::string("truncated while reading ") + what);
    return value;
}

void put_bytes(std::ostream& os, const void* data, std::size_t n);
void get_bytes(std::istream& is, void* data, std::size_t n, const char* what);

std::ifstream open_input(const std::filesystem::path& path);

// Throws IoError if the stream has bytes left past the expected end.
void expect_eof(std::istream& is, const char* what);

} // namespace xma::io
