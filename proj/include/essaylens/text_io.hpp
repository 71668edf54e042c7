// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace essaylens {

/// Reads a whole file. Paths ending in `.zst` are decompressed transparently.
std::string read_file(const std::filesystem::path& path);

/// Writes `content` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

/// Parses a full string as a double; nullopt on trailing junk or empty input.
std::optional<double> parse_double(std::string_view text);

std::string to_upper(std::string_view text);
std::string to_lower(std::string_view text);
std::string_view trim(std::string_view text);

/// Minimal RFC 4180 reader/writer. Quoted fields may contain separators,
/// doubled quotes and newlines.
struct CsvRecord {
    std::size_t line = 0; ///< physical line where the record starts (1-based)
    std::vector<std::string> fields;
};

std::vector<CsvRecord> parse_csv(std::string_view content, char separator = ',');

std::string csv_escape(std::string_view field, char separator = ',');

class CsvWriter {
public:
    explicit CsvWriter(char separator = ',') : sep_(separator) {}

    CsvWriter& row(const std::vector<std::string>& fields);
    const std::string& str() const noexcept { return out_; }

private:
    char sep_;
    std::string out_;
};

} // namespace essaylens
