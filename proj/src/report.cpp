#include "hwm/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "hwm/errors.hpp"

namespace hwm {

std::string report_header(const std::string& kind, std::uint64_t config_hash) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(config_hash));
    return "# hwmap-report schema=1 kind=" + kind + " config=" + hex;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::string& path, const CsvReport& report) {
    std::ostringstream os;
    os << report_header(report.kind, report.config_hash) << '\n';
    for (std::size_t i = 0; i < report.columns.size(); ++i)
        os << (i ? "," : "") << report.columns[i];
    os << '\n';
    for (const auto& row : report.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << format_double(row[i]);
        os << '\n';
    }
    write_text_file(path, os.str());
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError(path + ": write failed");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open for reading");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

} // namespace hwm
