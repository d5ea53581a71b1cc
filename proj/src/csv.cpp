#include "pide/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace pide {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& file, const std::vector<std::string>& header)
    : os_(file), columns_(header.size()), path_(file) {
    if (!os_) throw std::runtime_error("cannot open CSV for writing: " + file.string());
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
}

CsvWriter& CsvWriter::field(const std::string& v) {
    os_ << (in_row_++ ? "," : "") << v;
    return *this;
}
CsvWriter& CsvWriter::field(double v) { return field(format_double(v)); }
CsvWriter& CsvWriter::field(long v) { return field(std::to_string(v)); }

void CsvWriter::end_row() {
    if (in_row_ != columns_)
        throw std::logic_error("CSV row width mismatch in " + path_.string());
    os_ << '\n';
    in_row_ = 0;
}

void CsvWriter::close() {
    os_.close();
    if (os_.fail()) throw std::runtime_error("CSV write failed: " + path_.string());
}

std::uint64_t hash_bytes(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_file(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for hashing: " + file.string());
    std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return hash_bytes(bytes);
}

}  // namespace pide
