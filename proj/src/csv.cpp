#include "escflex/csv.hpp"

#include "escflex/errors.hpp"

#include <fmt/core.h>

#include <charconv>
#include <fstream>
#include <sstream>

namespace escflex {

namespace {

std::string compose(const std::string& file, std::size_t line, const std::string& field,
                    const std::string& what) {
    std::string where = file;
    if (line > 0) where += fmt::format(":{}", line);
    if (!field.empty()) where += fmt::format(" [{}]", field);
    return where.empty() ? what : where + ": " + what;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

ScenarioError::ScenarioError(std::string file, std::size_t line, std::string field,
                             const std::string& what)
    : std::runtime_error(compose(file, line, field, what)),
      file_(std::move(file)),
      line_(line),
      field_(std::move(field)) {}

CsvTable CsvTable::read(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ScenarioError(file.filename().string(), 0, "", "missing file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), file.filename().string());
}

CsvTable CsvTable::parse(std::string_view text, std::string source) {
    CsvTable t;
    t.source_ = std::move(source);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        auto line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        ++line_no;
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        if (trim(line).empty() || trim(line).front() == '#') continue;
        auto fields = split(line);
        if (!have_header) {
            t.header_ = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header_.size()) {
            throw ScenarioError(t.source_, line_no, "",
                                fmt::format("expected {} fields, found {}", t.header_.size(), fields.size()));
        }
        t.rows_.push_back(std::move(fields));
        t.lines_.push_back(line_no);
    }
    if (!have_header) throw ScenarioError(t.source_, 0, "", "empty file (header row required)");
    return t;
}

bool CsvTable::has_column(std::string_view name) const {
    for (const auto& h : header_)
        if (h == name) return true;
    return false;
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i)
        if (header_[i] == name) return i;
    throw ScenarioError(source_, 1, std::string(name), "schema mismatch: missing column");
}

double CsvTable::number(std::size_t row, std::size_t col) const {
    const auto& s = rows_[row][col];
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ScenarioError(source_, lines_[row], header_[col], fmt::format("not a number: '{}'", s));
    return v;
}

long long CsvTable::integer(std::size_t row, std::size_t col) const {
    const auto& s = rows_[row][col];
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ScenarioError(source_, lines_[row], header_[col], fmt::format("not an integer: '{}'", s));
    return v;
}

std::string format_number(double value) {
    if (value == 0.0) return "0";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) { row(header); }

CsvWriter& CsvWriter::row(const std::vector<std::string>& fields) {
    if (fields.size() != width_) throw std::logic_error("CsvWriter: row width mismatch");
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) text_ += ',';
        text_ += fields[i];
    }
    text_ += '\n';
    return *this;
}

void CsvWriter::save(const std::filesystem::path& file) const { write_text_file(file, text_); }

void write_text_file(const std::filesystem::path& file, std::string_view text) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", file.string()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string read_text_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot read {}", file.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace escflex
