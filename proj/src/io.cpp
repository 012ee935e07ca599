#include "xma/io.hpp"

namespace xma::io {

void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& body) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open for writing: " + tmp.string());
        body(os);
        os.flush();
        if (!os) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot replace " + path.string());
    }
}

void put_bytes(std::ostream& os, const void* data, std::size_t n) {
    os.write(static_cast<const char*>(data), std::streamsize(n));
    if (!os) throw IoError("write failed");
}

void get_bytes(std::istream& is, void* data, std::size_t n, const char* what) {
    is.read(static_cast<char*>(data), std::streamsize(n));
    if (is.gcount() != std::streamsize(n))
        throw TruncatedFileError(std::string("truncated while reading ") + what);
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path.string());
    return is;
}

void expect_eof(std::istream& is, const char* what) {
    if (is.peek() != std::char_traits<char>::eof())
        throw IoError(std::string("trailing bytes after ") + what);
}

} // namespace xma::io
