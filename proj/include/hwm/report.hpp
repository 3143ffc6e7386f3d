#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hwm {

// CSV reports open with a self-describing comment line
//   # hwmap-report schema=1 kind=<kind> config=<hex>
// followed by the column header. Values print with %.17g so artifacts are
// byte-stable across runs of the same build (no timestamps, no locale).
std::string report_header(const std::string& kind, std::uint64_t config_hash);
std::string format_double(double v);

struct CsvReport {
    std::string kind;
    std::uint64_t config_hash = 0;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_csv(const std::string& path, const CsvReport& report);

// JSON reports carry the same identification as top-level fields
// ("schema", "kind", "config"); body is caller-assembled text.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

} // namespace hwm
