#pragma once

#include <string>
#include <vector>

#include "nvsram/cell.hpp"

namespace nvsram {

// Serializes with 14 significant digits so round trips are lossless.
std::string format_value(double v);

// Writes via a temporary in the same directory plus rename; a failure leaves
// no partial file behind.
void atomic_write(const std::string& path, const std::string& content);

// Waveform CSV for a chained operation sequence. Columns: time_s, the probe
// voltages (q, qc, 1a, 2a, 1b, 2b, WT, WD, BL, BL_bar, WL, WRE, EN, RE,
// restore), then mtj1_mz, mtj2_mz, mtj1_i_a, mtj2_i_a. Each operation's
// samples continue the global time axis.
std::string trace_csv_text(const CellInstance& cell,
                           const std::vector<OperationResult>& operations);

inline const std::vector<std::string>& csv_probe_columns() {
    static const std::vector<std::string> cols{"q",  "qc", "1a", "2a",  "1b",     "2b",
                                               "WT", "WD", "BL", "BL_bar", "WL",  "WRE",
                                               "EN", "RE", "restore"};
    return cols;
}

} // namespace nvsram
