#pragma once

// CSV emission helpers shared by the library serializers and the CLI.
// Numbers use the shortest decimal representation that round-trips to the
// same double, capped at 12 significant digits for cross-platform byte
// stability of golden files.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "iterdist/convolve.hpp"
#include "iterdist/limits.hpp"
#include "iterdist/ordering.hpp"
#include "iterdist/sampler.hpp"

namespace iterdist {

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int precision = 1; precision <= 12; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline std::string format_number(int v) { return std::to_string(v); }

// One row, comma-joined, newline-terminated.
template <typename... Ts>
void csv_row(std::ostream& os, const Ts&... fields) {
    bool first = true;
    auto put = [&](const auto& f) {
        if (!first) os << ',';
        first = false;
        if constexpr (std::is_convertible_v<decltype(f), std::string>)
            os << f;
        else
            os << format_number(f);
    };
    (put(fields), ...);
    os << '\n';
}

inline void csv_comment(std::ostream& os, const std::string& text) {
    os << "# " << text << '\n';
}

// Whole-file write through a temp name plus rename, so readers never see a
// partial file.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("write_file_atomic: cannot open " + tmp);
        out << content;
        if (!out) throw std::runtime_error("write_file_atomic: write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("write_file_atomic: rename failed for " + path);
}

// ----- module serializers ---------------------------------------------------

inline void write_diff_report_csv(std::ostream& os,
                                  const std::vector<GammaDifferenceRow>& rows) {
    csv_row(os, "n", "s", "x", "paper_formula", "oracle", "abs_diff");
    for (const auto& r : rows)
        csv_row(os, r.n, r.s, r.x, r.paper_formula, r.oracle, r.abs_diff);
}

inline void write_convergence_csv(std::ostream& os, const ConvergenceReport& rep) {
    csv_row(os, "spec", "s", "sup_distance", "limit_kind");
    for (std::size_t i = 0; i < rep.s_values.size(); ++i)
        csv_row(os, rep.spec.description(), rep.s_values[i], rep.sup_distance[i],
                limit_kind_name(rep.kind));
}

inline void write_order_check_csv(std::ostream& os, const OrderCheckResult& r) {
    csv_row(os, "x", "log_ratio", "monotone_flag");
    for (std::size_t i = 0; i < r.grid.size(); ++i)
        csv_row(os, r.grid[i], r.log_ratio[i],
                static_cast<int>(r.monotone_nondecreasing));
}

inline void write_sample_csv(std::ostream& os, const SampleBatch& batch) {
    csv_comment(os, "spec: " + batch.spec.description());
    csv_comment(os, "s: " + std::to_string(batch.s));
    csv_comment(os, "seed: " + std::to_string(batch.seed));
    csv_row(os, "value");
    for (double v : batch.values) csv_row(os, v);
}

}  // namespace iterdist
