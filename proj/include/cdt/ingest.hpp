#ifndef CDT_INGEST_HPP
#define CDT_INGEST_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "cdt/series.hpp"

namespace cdt {

/// One vibration snapshot file: S rows of C selected channels, stamped with
/// the date-time parsed from the filename.
struct Snapshot {
    double timestamp = 0; // seconds since epoch (UTC)
    Eigen::MatrixXd samples;
    std::string filename;

    int rows() const { return static_cast<int>(samples.rows()); }
    int channels() const { return static_cast<int>(samples.cols()); }
};

enum class FeatureKind { rms, kurtosis, peak, crest };

FeatureKind feature_kind_from_string(const std::string& name);
std::string to_string(FeatureKind kind);

/// Parses the dot-separated timestamp convention, e.g. "2004.02.12.10.32.39".
/// Returns false if the name does not match.
bool parse_snapshot_timestamp(const std::string& filename, double& out_epoch_seconds);

/// Reads every timestamp-named file in the directory, sorted by time.
/// channel_selection picks raw columns (0-based, in the given order); empty
/// selects all columns.
std::vector<Snapshot> read_snapshot_dir(const std::filesystem::path& path,
                                        const std::vector<int>& channel_selection = {});

/// Per-channel scalar feature of one snapshot. Kurtosis is the plain
/// standardized fourth moment (no excess subtraction) with the sample
/// (N-1) standard deviation convention.
Eigen::VectorXd extract_feature(const Snapshot& snapshot, FeatureKind kind);

/// 2x the median inter-snapshot interval, in seconds.
double default_gap_threshold(const std::vector<Snapshot>& snapshots);

/// One feature vector per snapshot; a sample is contiguous with its
/// predecessor when their timestamps are at most gap_threshold_seconds apart.
ObservationSeries<double> to_observation_series(const std::vector<Snapshot>& snapshots,
                                                FeatureKind kind, double gap_threshold_seconds);

/// Rescales every channel to zero mean and unit sample standard deviation,
/// recording the inverse transform.
ObservationSeries<double> standardize(const ObservationSeries<double>& series);

/// Inverts a recorded standardization.
ObservationSeries<double> destandardize(const ObservationSeries<double>& series);

} // namespace cdt

#endif
