#ifndef CDT_IO_HPP
#define CDT_IO_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cdt/layout.hpp"
#include "cdt/series.hpp"

namespace cdt {

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

/// Series CSV: header `timestamp,contiguous,<label>...`, one row per sample.
void write_series_csv(const std::filesystem::path& path, const ObservationSeries<double>& series);
ObservationSeries<double> read_series_csv(const std::filesystem::path& path);

/// Trajectory CSV: header `time,<factor columns in layout order>` with
/// optional `<column>_sd` blocks appended when stddevs is non-null.
void write_trajectory_csv(const std::filesystem::path& path, const StateLayout& layout,
                          const std::vector<double>& time,
                          const std::vector<VectorX<double>>& states,
                          const std::vector<VectorX<double>>* stddevs = nullptr);

/// Flat key=value manifest, one entry per line, in the given order.
void write_manifest(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::string>>& entries);

/// FNV-1a 64-bit digest of a file's bytes, as lowercase hex.
std::string file_digest(const std::filesystem::path& path);

/// A named curve for SVG plotting.
struct PlotSeries {
    std::string name;
    std::vector<double> y;
};

/// Self-contained polyline SVG: labeled axes, one polyline per series,
/// legend in the top-right corner.
void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::vector<double>& x, const std::vector<PlotSeries>& series);

} // namespace cdt

#endif
