#include "fastmr/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fastmr {

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t file_checksum(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for checksum: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return fnv1a(ss.str());
}

std::string csv_format(double v) {
    // shortest representation that round-trips a double
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

namespace {

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

void CsvTable::add_row(const std::vector<double>& values) {
    std::vector<std::string> row;
    row.reserve(values.size());
    for (double v : values) row.push_back(csv_format(v));
    rows.push_back(std::move(row));
}

std::string CsvTable::render() const {
    std::string out;
    for (const auto& m : metadata) out += "# " + m + "\n";
    for (std::size_t i = 0; i < header.size(); ++i)
        out += (i ? "," : "") + csv_quote(header[i]);
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out += (i ? "," : "") + csv_quote(row[i]);
        out += '\n';
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << body;
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::string RunManifest::render_json() const {
    nlohmann::ordered_json j;
    j["tool_version"] = tool_version;
    j["subcommand"] = subcommand;
    j["seed"] = seed;
    j["config_hash"] = config_hash;
    j["complete"] = complete;
    nlohmann::ordered_json files = nlohmann::ordered_json::object();
    for (const auto& [name, sum] : file_checksums) files[name] = sum;
    j["file_checksums"] = files;
    nlohmann::ordered_json times = nlohmann::ordered_json::object();
    for (const auto& [name, t] : timings_seconds) times[name] = t;
    j["timings_seconds"] = times;
    return j.dump(2) + "\n";
}

namespace {

constexpr std::uint32_t kPathDumpVersion = 1;
constexpr char kPathDumpMagic[4] = {'F', 'M', 'R', 'P'};

template <typename T>
void put_le(std::string& out, T v) {
    // serialize fixed-width integers little-endian regardless of host order
    static_assert(std::is_integral_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out += static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF);
}

void put_le_double(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_le(out, bits);
}

std::uint64_t get_le_u64(const char* p) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
}

double get_le_double(const char* p) {
    const std::uint64_t bits = get_le_u64(p);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

} // namespace

void write_path_dump(const std::string& path, std::uint64_t seed, double dt,
                     const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("write_path_dump: empty path");
    std::string out(kPathDumpMagic, 4);
    put_le(out, kPathDumpVersion);
    put_le(out, seed);
    put_le_double(out, dt);
    put_le(out, static_cast<std::uint64_t>(values.size() - 1)); // n_steps
    for (double v : values) put_le_double(out, v);
    write_text_file(path, out);
}

std::vector<double> read_path_dump(const std::string& path, std::uint64_t& seed, double& dt) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open path dump: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    const std::string b = ss.str();
    if (b.size() < 32 || std::memcmp(b.data(), kPathDumpMagic, 4) != 0)
        throw std::runtime_error("bad path dump header: " + path);
    std::uint32_t version = 0;
    for (std::size_t i = 0; i < 4; ++i)
        version |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[4 + i])) << (8 * i);
    if (version != kPathDumpVersion) throw std::runtime_error("unsupported path dump version");
    seed = get_le_u64(b.data() + 8);
    dt = get_le_double(b.data() + 16);
    const std::uint64_t n_steps = get_le_u64(b.data() + 24);
    if (b.size() != 32 + (n_steps + 1) * 8) throw std::runtime_error("truncated path dump");
    std::vector<double> values(n_steps + 1);
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] = get_le_double(b.data() + 32 + 8 * i);
    return values;
}

} // namespace fastmr
