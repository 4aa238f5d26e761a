#include "scrisk/csv.hpp"

#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>

#include "scrisk/error.hpp"

namespace scrisk {

namespace {

std::string where(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line);
}

}  // namespace

CsvReader::CsvReader(std::istream& in, const std::string& source_name,
                     const std::vector<std::string>& columns)
    : in_(in), source_name_(source_name), n_columns_(columns.size()) {
    std::vector<std::string> header;
    if (!read_record(header)) {
        throw ValidationError(source_name_ + ": missing header row");
    }
    if (header != columns) {
        std::string want, got;
        for (const auto& c : columns) want += (want.empty() ? "" : ",") + c;
        for (const auto& c : header) got += (got.empty() ? "" : ",") + c;
        throw ValidationError(where(source_name_, line_) + ": bad header, expected '" +
                              want + "' got '" + got + "'");
    }
}

bool CsvReader::next(std::vector<std::string>& out) {
    if (!read_record(out)) return false;
    if (out.size() != n_columns_) {
        throw ValidationError(where(source_name_, line_) + ": expected " +
                              std::to_string(n_columns_) + " fields, got " +
                              std::to_string(out.size()));
    }
    return true;
}

bool CsvReader::read_record(std::vector<std::string>& out) {
    std::string raw;
    // Skip blank lines between records.
    do {
        if (!std::getline(in_, raw)) return false;
        ++line_;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    } while (raw.empty());

    out.clear();
    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    while (true) {
        if (quoted) {
            if (i >= raw.size()) {
                // Quoted field spans a newline.
                std::string more;
                if (!std::getline(in_, more)) {
                    throw ValidationError(where(source_name_, line_) + ": unterminated quote");
                }
                ++line_;
                if (!more.empty() && more.back() == '\r') more.pop_back();
                raw += '\n';
                raw += more;
            }
            char c = raw[i];
            if (c == '"') {
                if (i + 1 < raw.size() && raw[i + 1] == '"') {
                    field += '"';
                    i += 2;
                } else {
                    quoted = false;
                    ++i;
                }
            } else {
                field += c;
                ++i;
            }
        } else {
            if (i >= raw.size()) {
                out.push_back(field);
                break;
            }
            char c = raw[i];
            if (c == '"' && field.empty()) {
                quoted = true;
                ++i;
            } else if (c == ',') {
                out.push_back(field);
                field.clear();
                ++i;
            } else {
                field += c;
                ++i;
            }
        }
    }
    return true;
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& columns)
    : out_(out), n_columns_(columns.size()) {
    row(columns);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    require_internal(fields.size() == n_columns_, "CsvWriter: wrong field count");
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << csv_quote(fields[i]);
    }
    out_ << '\n';
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string q = "\"";
    for (char c : field) {
        if (c == '"') q += "\"\"";
        else q += c;
    }
    q += '"';
    return q;
}

std::string format_double(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace scrisk
