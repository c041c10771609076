#include "kfp/output_io.hpp"

#include <bit>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "kfp/util.hpp"

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian; big-endian hosts are not supported");

namespace kfp {

namespace {

constexpr std::uint64_t kSnapshotMagic = 0x314e50414e53464bULL;  // "KFSNAPN1"
constexpr std::uint32_t kSnapshotVersion = 1;

template <class T>
void put(std::ofstream& os, const T& value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <class T>
T get(std::ifstream& is, const std::string& what) {
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof value);
    check_runtime(static_cast<bool>(is), "snapshot: truncated file while reading " + what);
    return value;
}

void write_header(std::ofstream& os, const GridSpec& spec) {
    put(os, kSnapshotMagic);
    put(os, kSnapshotVersion);
    put(os, static_cast<std::uint32_t>(spec.dim));
    for (int a = 0; a < 2; ++a) {
        put(os, spec.space[a].lower);
        put(os, spec.space[a].upper);
        put(os, static_cast<std::uint32_t>(spec.space[a].cells));
        put(os, spec.velocity[a].vmax);
        put(os, static_cast<std::uint32_t>(spec.velocity[a].cells));
    }
}

GridSpec read_header(std::ifstream& is) {
    check_runtime(get<std::uint64_t>(is, "magic") == kSnapshotMagic, "snapshot: bad magic");
    check_runtime(get<std::uint32_t>(is, "version") == kSnapshotVersion,
                  "snapshot: unsupported version");
    GridSpec spec;
    spec.dim = static_cast<int>(get<std::uint32_t>(is, "dim"));
    for (int a = 0; a < 2; ++a) {
        spec.space[a].lower = get<double>(is, "lower");
        spec.space[a].upper = get<double>(is, "upper");
        spec.space[a].cells = static_cast<int>(get<std::uint32_t>(is, "cells"));
        spec.velocity[a].vmax = get<double>(is, "vmax");
        spec.velocity[a].cells = static_cast<int>(get<std::uint32_t>(is, "vcells"));
    }
    return spec;
}

void write_payload(std::ofstream& os, const std::vector<double>& data) {
    put(os, static_cast<std::uint64_t>(data.size()));
    os.write(reinterpret_cast<const char*>(data.data()),
             static_cast<std::streamsize>(data.size() * sizeof(double)));
}

std::vector<double> read_payload(std::ifstream& is) {
    const auto count = get<std::uint64_t>(is, "payload count");
    std::vector<double> data(count);
    is.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    check_runtime(static_cast<bool>(is), "snapshot: payload size mismatch");
    is.peek();
    check_runtime(is.eof(), "snapshot: trailing bytes after payload");
    return data;
}

bool same_grid(const GridSpec& a, const GridSpec& b) {
    if (a.dim != b.dim) return false;
    for (int ax = 0; ax < a.dim; ++ax) {
        if (a.space[ax].lower != b.space[ax].lower || a.space[ax].upper != b.space[ax].upper ||
            a.space[ax].cells != b.space[ax].cells)
            return false;
        if (a.velocity[ax].vmax != b.velocity[ax].vmax ||
            a.velocity[ax].cells != b.velocity[ax].cells)
            return false;
    }
    return true;
}

}  // namespace

void write_snapshot(const PhaseGrid& grid, const std::vector<double>& state,
                    const std::string& path) {
    check_runtime(state.size() == grid.phase_cells(), "snapshot: state size does not match grid");
    std::ofstream os(path, std::ios::binary);
    check_runtime(static_cast<bool>(os), "snapshot: cannot open " + path + " for writing");
    write_header(os, grid.spec());
    write_payload(os, state);
    check_runtime(static_cast<bool>(os), "snapshot: write failed for " + path);
}

std::pair<GridSpec, std::vector<double>> read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    check_runtime(static_cast<bool>(is), "snapshot: cannot open " + path);
    GridSpec spec = read_header(is);
    std::vector<double> data = read_payload(is);
    return {spec, std::move(data)};
}

std::vector<double> read_snapshot_for_grid(const PhaseGrid& grid, const std::string& path) {
    auto [spec, data] = read_snapshot(path);
    check_runtime(same_grid(spec, grid.spec()), "snapshot: grid mismatch in " + path);
    check_runtime(data.size() == grid.phase_cells(), "snapshot: payload size mismatch in " + path);
    return data;
}

void write_boundary_table(const std::vector<double>& table, std::size_t faces,
                          std::size_t velocity_cells, const std::string& path) {
    check_runtime(table.size() == faces * velocity_cells, "boundary table: size mismatch");
    std::ofstream os(path, std::ios::binary);
    check_runtime(static_cast<bool>(os), "boundary table: cannot open " + path + " for writing");
    put(os, kSnapshotMagic);
    put(os, kSnapshotVersion);
    put(os, static_cast<std::uint64_t>(faces));
    put(os, static_cast<std::uint64_t>(velocity_cells));
    write_payload(os, table);
}

std::vector<double> read_boundary_table(const std::string& path, std::size_t faces,
                                        std::size_t velocity_cells) {
    std::ifstream is(path, std::ios::binary);
    check_runtime(static_cast<bool>(is), "boundary table: cannot open " + path);
    check_runtime(get<std::uint64_t>(is, "magic") == kSnapshotMagic, "boundary table: bad magic");
    check_runtime(get<std::uint32_t>(is, "version") == kSnapshotVersion,
                  "boundary table: unsupported version");
    check_runtime(get<std::uint64_t>(is, "faces") == faces, "boundary table: face count mismatch");
    check_runtime(get<std::uint64_t>(is, "velocity cells") == velocity_cells,
                  "boundary table: velocity cell count mismatch");
    return read_payload(is);
}

const char* const kLedgerColumns =
    "t,mass,energy,entropy,D_cum,fisher_cum,m3,influx_mass,outflux_mass,influx_energy,"
    "outflux_energy,influx_entropy,outflux_entropy,energy_slack,entropy_slack,picard_iters,min_f";

void write_ledger_csv(const std::string& path, const BalanceLedger& ledger,
                      const CsvMetadata& meta) {
    std::ofstream os(path);
    check_runtime(static_cast<bool>(os), "ledger: cannot open " + path + " for writing");
    os << "# kfp-ledger v1 bc=" << meta.bc_kind << " theta=" << format_g17(meta.theta)
       << " epsilon=" << format_g17(meta.epsilon) << " mass0=" << format_g17(meta.mass0)
       << " energy0=" << format_g17(meta.energy0) << " entropy0=" << format_g17(meta.entropy0)
       << " max_f=" << format_g17(meta.max_f) << " mass_tol=" << format_g17(meta.tol.mass_rel)
       << " energy_tol=" << format_g17(meta.tol.energy_rel)
       << " entropy_tol_rel=" << format_g17(meta.tol.entropy_rel)
       << " entropy_tol_abs=" << format_g17(meta.tol.entropy_abs)
       << " negativity_tol=" << format_g17(meta.tol.negativity_rel) << "\n";
    os << kLedgerColumns << "\n";
    for (const LedgerRow& r : ledger.rows) {
        os << format_g17(r.t) << ',' << format_g17(r.mass) << ',' << format_g17(r.energy) << ','
           << format_g17(r.entropy) << ',' << format_g17(r.d_cum) << ',' << format_g17(r.fisher_cum)
           << ',' << format_g17(r.m3_cum) << ',' << format_g17(r.in_mass) << ','
           << format_g17(r.out_mass) << ',' << format_g17(r.in_energy) << ','
           << format_g17(r.out_energy) << ',' << format_g17(r.in_entropy) << ','
           << format_g17(r.out_entropy) << ',' << format_g17(r.energy_slack) << ','
           << format_g17(r.entropy_slack) << ',' << r.picard_iters << ',' << format_g17(r.min_f)
           << "\n";
    }
    check_runtime(static_cast<bool>(os), "ledger: write failed for " + path);
}

namespace {

double meta_value(const std::string& line, const std::string& key, bool required,
                  double fallback) {
    const std::string tag = " " + key + "=";
    const auto pos = line.find(tag);
    if (pos == std::string::npos) {
        check_runtime(!required, "ledger: metadata key missing: " + key);
        return fallback;
    }
    return std::stod(line.substr(pos + tag.size()));
}

std::string meta_string(const std::string& line, const std::string& key) {
    const std::string tag = " " + key + "=";
    const auto pos = line.find(tag);
    check_runtime(pos != std::string::npos, "ledger: metadata key missing: " + key);
    const auto start = pos + tag.size();
    auto end = line.find(' ', start);
    if (end == std::string::npos) end = line.size();
    return line.substr(start, end - start);
}

}  // namespace

LedgerCsv read_ledger_csv(const std::string& path) {
    std::ifstream is(path);
    check_runtime(static_cast<bool>(is), "ledger: cannot open " + path);
    std::string line;
    check_runtime(static_cast<bool>(std::getline(is, line)) && line.rfind("# kfp-ledger v1", 0) == 0,
                  "ledger: missing or unsupported metadata line");
    LedgerCsv out;
    out.meta.bc_kind = meta_string(line, "bc");
    out.meta.theta = meta_value(line, "theta", true, 0.0);
    out.meta.epsilon = meta_value(line, "epsilon", true, 0.0);
    out.meta.mass0 = meta_value(line, "mass0", true, 0.0);
    out.meta.energy0 = meta_value(line, "energy0", true, 0.0);
    out.meta.entropy0 = meta_value(line, "entropy0", true, 0.0);
    out.meta.max_f = meta_value(line, "max_f", true, 0.0);
    out.meta.tol.mass_rel = meta_value(line, "mass_tol", false, out.meta.tol.mass_rel);
    out.meta.tol.energy_rel = meta_value(line, "energy_tol", false, out.meta.tol.energy_rel);
    out.meta.tol.entropy_rel = meta_value(line, "entropy_tol_rel", false, out.meta.tol.entropy_rel);
    out.meta.tol.entropy_abs = meta_value(line, "entropy_tol_abs", false, out.meta.tol.entropy_abs);
    out.meta.tol.negativity_rel =
        meta_value(line, "negativity_tol", false, out.meta.tol.negativity_rel);

    check_runtime(static_cast<bool>(std::getline(is, line)), "ledger: missing header row");
    check_runtime(line == kLedgerColumns, "ledger: unexpected column header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        check_runtime(cells.size() == 17, "ledger: wrong column count in row");
        LedgerRow r;
        int k = 0;
        auto next = [&] { return std::stod(cells[k++]); };
        r.t = next();
        r.mass = next();
        r.energy = next();
        r.entropy = next();
        r.d_cum = next();
        r.fisher_cum = next();
        r.m3_cum = next();
        r.in_mass = next();
        r.out_mass = next();
        r.in_energy = next();
        r.out_energy = next();
        r.in_entropy = next();
        r.out_entropy = next();
        r.energy_slack = next();
        r.entropy_slack = next();
        r.picard_iters = std::stol(cells[k++]);
        r.min_f = std::stod(cells[k++]);
        out.rows.push_back(r);
    }
    return out;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace kfp
