#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kfp/diagnostics.hpp"
#include "kfp/grid.hpp"
#include "kfp/integrator.hpp"

namespace kfp {

/// Binary snapshot: header records the grid spec, payload is row-major
/// 64-bit floats, little-endian. Round trips are bit-exact.
void write_snapshot(const PhaseGrid& grid, const std::vector<double>& state,
                    const std::string& path);
std::pair<GridSpec, std::vector<double>> read_snapshot(const std::string& path);
/// Read and validate against an expected grid; dimension mismatch is an error.
std::vector<double> read_snapshot_for_grid(const PhaseGrid& grid, const std::string& path);

/// Boundary-value table (faces x velocity cells), same encoding.
void write_boundary_table(const std::vector<double>& table, std::size_t faces,
                          std::size_t velocity_cells, const std::string& path);
std::vector<double> read_boundary_table(const std::string& path, std::size_t faces,
                                        std::size_t velocity_cells);

struct CsvMetadata {
    std::string bc_kind = "inflow";
    double theta = 0.0;
    double epsilon = 0.0;
    double mass0 = 0.0, energy0 = 0.0, entropy0 = 0.0;
    double max_f = 0.0;
    AuditTolerances tol;
};

extern const char* const kLedgerColumns;  // fixed, versioned column order

/// One row per output time; a leading comment line carries the metadata
/// needed to re-audit the file. All floats printed with 17 significant digits.
void write_ledger_csv(const std::string& path, const BalanceLedger& ledger,
                      const CsvMetadata& meta);

struct LedgerCsv {
    CsvMetadata meta;
    std::vector<LedgerRow> rows;
};

LedgerCsv read_ledger_csv(const std::string& path);

/// FNV-1a 64-bit hash of a string (used for the scenario hash).
std::string fnv1a_hex(const std::string& text);

std::string utc_timestamp();

}  // namespace kfp
