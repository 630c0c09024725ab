#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace escflex {

/// A header-indexed CSV file held in memory. Line numbers are 1-based and
/// count the header, so `line(0)` is usually 2.
class CsvTable {
public:
    static CsvTable read(const std::filesystem::path& file);
    static CsvTable parse(std::string_view text, std::string source);

    const std::string& source() const { return source_; }
    const std::vector<std::string>& header() const { return header_; }
    std::size_t size() const { return rows_.size(); }
    std::size_t line(std::size_t row) const { return lines_[row]; }

    /// Index of a required column; throws ScenarioError naming it if absent.
    std::size_t column(std::string_view name) const;
    bool has_column(std::string_view name) const;

    const std::string& cell(std::size_t row, std::size_t col) const { return rows_[row][col]; }
    double number(std::size_t row, std::size_t col) const;
    long long integer(std::size_t row, std::size_t col) const;

private:
    std::string source_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::size_t> lines_;
};

/// Shortest text that parses back to exactly `value`.
std::string format_number(double value);

/// Minimal CSV writer; fields are written verbatim.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    CsvWriter& row(const std::vector<std::string>& fields);
    std::string str() const { return text_; }
    void save(const std::filesystem::path& file) const;

private:
    std::size_t width_;
    std::string text_;
};

void write_text_file(const std::filesystem::path& file, std::string_view text);
std::string read_text_file(const std::filesystem::path& file);

}  // namespace escflex
