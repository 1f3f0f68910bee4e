#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfg/core.hpp"

namespace mfg {

// RFC 4180: quote a field when it contains a comma, quote, or newline.
inline std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

inline std::string csv_field(double v) { return format_g17(v); }

// Comment line carrying run provenance, written before the header row.
inline std::string csv_metadata(const std::map<std::string, std::string>& meta) {
    std::string out = "#";
    for (const auto& [k, v] : meta) out += " " + k + "=" + v;
    return out;
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void comment(const std::map<std::string, std::string>& meta) {
        os_ << csv_metadata(meta) << "\n";
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) os_ << ",";
            os_ << csv_quote(fields[i]);
        }
        os_ << "\n";
    }

private:
    std::ostream& os_;
};

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << content;
    if (!f) throw std::runtime_error("write failed: " + path);
}

// Keys come out sorted because the underlying object is ordered.
inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

}  // namespace mfg
