#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace pide {

/// Full round-trip decimal rendering of a double (%.17g, C locale).
std::string format_double(double v);

/// Minimal CSV emitter: header row, '.' decimal separator, full precision.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& file, const std::vector<std::string>& header);

    CsvWriter& field(const std::string& v);
    CsvWriter& field(double v);
    CsvWriter& field(long v);
    void end_row();
    void close();

private:
    std::ofstream os_;
    std::size_t columns_;
    std::size_t in_row_ = 0;
    std::filesystem::path path_;
};

/// FNV-1a over a file's bytes; used for artifact integrity records.
std::uint64_t hash_file(const std::filesystem::path& file);
std::uint64_t hash_bytes(const std::string& bytes);

}  // namespace pide
