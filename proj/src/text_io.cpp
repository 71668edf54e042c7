// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#include "essaylens/text_io.hpp"

#include "essaylens/error.hpp"

#include <boost/iostreams/copy.hpp>
#include <boost/iostreams/filter/zstd.hpp>
#include <boost/iostreams/filtering_stream.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace essaylens {

namespace io = boost::iostreams;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open file: " + path.string());
    }
    std::ostringstream buf;
    if (path.extension() == ".zst") {
        io::filtering_istream zin;
        zin.push(io::zstd_decompressor());
        zin.push(in);
        try {
            io::copy(zin, buf);
        } catch (const std::exception& e) {
            throw ValidationError("zstd decompression failed for " + path.string() + ": " + e.what());
        }
    } else {
        buf << in.rdbuf();
    }
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ValidationError("cannot write file: " + path.string());
    }
    if (path.extension() == ".zst") {
        io::filtering_ostream zout;
        zout.push(io::zstd_compressor());
        zout.push(out);
        zout.write(content.data(), static_cast<std::streamsize>(content.size()));
        zout.reset();
    } else {
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
    }
}

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) {
        return "nan";
    }
    return std::string(buf, end);
}

std::optional<double> parse_double(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

std::string to_upper(std::string_view text) {
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

std::string to_lower(std::string_view text) {
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string_view trim(std::string_view text) {
    const auto ws = " \t\r\n";
    auto b = text.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = text.find_last_not_of(ws);
    return text.substr(b, e - b + 1);
}

std::vector<CsvRecord> parse_csv(std::string_view content, char separator) {
    std::vector<CsvRecord> records;
    CsvRecord current;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    current.line = 1;

    auto end_field = [&] {
        current.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&](std::size_t next_line) {
        end_field();
        // Skip fully blank lines.
        if (!(current.fields.size() == 1 && current.fields[0].empty())) {
            records.push_back(std::move(current));
        }
        current = CsvRecord{};
        current.line = next_line;
    };

    for (std::size_t i = 0; i < content.size(); ++i) {
        char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == separator) {
            end_field();
        } else if (c == '\n') {
            ++line;
            end_record(line);
        } else if (c == '\r') {
            // tolerate CRLF
        } else {
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) {
        throw ValidationError("line " + std::to_string(current.line) + ": unterminated quoted field");
    }
    if (field_started || !field.empty() || !current.fields.empty()) {
        end_record(line);
    }
    return records;
}

std::string csv_escape(std::string_view field, char separator) {
    bool needs = field.find_first_of(std::string{separator, '"', '\n', '\r'}) != std::string_view::npos;
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

CsvWriter& CsvWriter::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_.push_back(sep_);
        out_ += csv_escape(fields[i], sep_);
    }
    out_.push_back('\n');
    return *this;
}

} // namespace essaylens
