#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fastmr {

std::uint64_t fnv1a(const std::string& bytes);
std::uint64_t file_checksum(const std::string& path);

// One tabular output: '#'-prefixed metadata lines, a header row, then
// data rows. RFC-4180-style quoting, '.' decimal separator, LF line
// endings, full double precision.
struct CsvTable {
    std::vector<std::string> metadata; // rendered as "# <line>"
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(const std::vector<double>& values);
    std::string render() const;
};

std::string csv_format(double v); // shortest round-trip decimal
void write_text_file(const std::string& path, const std::string& body);

// Per-run provenance record, serialized as JSON next to the outputs.
struct RunManifest {
    std::string tool_version;
    std::string subcommand;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    bool complete = false;
    std::map<std::string, std::uint64_t> file_checksums;
    std::map<std::string, double> timings_seconds;

    std::string render_json() const;
};

// Raw path dump: fixed little-endian header (magic "FMRP", schema
// version u32, seed u64, dt f64, n_steps u64) followed by n_steps + 1
// little-endian doubles.
void write_path_dump(const std::string& path, std::uint64_t seed, double dt,
                     const std::vector<double>& values);
std::vector<double> read_path_dump(const std::string& path, std::uint64_t& seed, double& dt);

} // namespace fastmr
