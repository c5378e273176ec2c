#include "nvsram/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "nvsram/errors.hpp"

namespace nvsram {

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.14e", v);
    return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write output file: " + tmp.string());
        out << content;
        if (!out.good()) {
            out.close();
            fs::remove(tmp);
            throw ConfigError("failed writing output file: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw ConfigError("cannot finalize output file: " + target.string());
    }
}

std::string trace_csv_text(const CellInstance& cell,
                           const std::vector<OperationResult>& operations) {
    std::string out = "time_s";
    for (const auto& col : csv_probe_columns()) out += "," + col;
    out += ",mtj1_mz,mtj2_mz,mtj1_i_a,mtj2_i_a\n";

    double offset = 0.0;
    bool first_op = true;
    for (const auto& op : operations) {
        const Trace& tr = op.trace;
        for (int k = 0; k < tr.sample_count(); ++k) {
            if (!first_op && k == 0) continue; // boundary sample repeats the carry state
            out += format_value(offset + tr.time[k]);
            for (const auto& col : csv_probe_columns())
                out += "," + format_value(tr.voltage(col, k));
            out += "," + format_value(tr.mtj_mz[k][0]);
            out += "," + format_value(tr.mtj_mz[k][1]);
            out += "," + format_value(tr.element_i[k][cell.mtj1_element]);
            out += "," + format_value(tr.element_i[k][cell.mtj2_element]);
            out += "\n";
        }
        offset += tr.time.empty() ? 0.0 : tr.time.back();
        first_op = false;
    }
    return out;
}

} // namespace nvsram
