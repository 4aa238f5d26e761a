#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scrisk {

// Strict reader for the comma-separated tabular inputs: UTF-8, one header
// row, RFC-4180 quoting. Every parse error carries the 1-based line number.
class CsvReader {
public:
    // Header must match `columns` exactly (same names, same order).
    CsvReader(std::istream& in, const std::string& source_name,
              const std::vector<std::string>& columns);

    // Reads the next record into `out`; false on end of input.
    bool next(std::vector<std::string>& out);

    std::size_t line() const { return line_; }
    const std::string& source() const { return source_name_; }

private:
    std::istream& in_;
    std::string source_name_;
    std::size_t n_columns_;
    std::size_t line_ = 0;

    bool read_record(std::vector<std::string>& out);
};

class CsvWriter {
public:
    CsvWriter(std::ostream& out, const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& fields);

private:
    std::ostream& out_;
    std::size_t n_columns_;
};

std::string csv_quote(const std::string& field);

// Shared numeric formatting: shortest text that round-trips a double.
std::string format_double(double v);

}  // namespace scrisk
