#include "cdt/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "cdt/errors.hpp"

namespace cdt {

FeatureKind feature_kind_from_string(const std::string& name) {
    if (name == "rms") return FeatureKind::rms;
    if (name == "kurtosis") return FeatureKind::kurtosis;
    if (name == "peak") return FeatureKind::peak;
    if (name == "crest") return FeatureKind::crest;
    throw validation_error("unknown feature kind: " + name);
}

std::string to_string(FeatureKind kind) {
    switch (kind) {
    case FeatureKind::rms: return "rms";
    case FeatureKind::kurtosis: return "kurtosis";
    case FeatureKind::peak: return "peak";
    case FeatureKind::crest: return "crest";
    }
    return "?";
}

bool parse_snapshot_timestamp(const std::string& filename, double& out_epoch_seconds) {
    int fields[6]; // year month day hour minute second
    int pos = 0;
    for (int f = 0; f < 6; ++f) {
        if (f > 0) {
            if (pos >= static_cast<int>(filename.size()) || filename[pos] != '.') return false;
            ++pos;
        }
        int value = 0, digits = 0;
        while (pos < static_cast<int>(filename.size()) &&
               std::isdigit(static_cast<unsigned char>(filename[pos]))) {
            value = value * 10 + (filename[pos] - '0');
            ++pos;
            ++digits;
        }
        if (digits == 0) return false;
        fields[f] = value;
    }
    if (pos != static_cast<int>(filename.size())) return false;
    if (fields[1] < 1 || fields[1] > 12 || fields[2] < 1 || fields[2] > 31 || fields[3] > 23 ||
        fields[4] > 59 || fields[5] > 60)
        return false;

    std::tm tm{};
    tm.tm_year = fields[0] - 1900;
    tm.tm_mon = fields[1] - 1;
    tm.tm_mday = fields[2];
    tm.tm_hour = fields[3];
    tm.tm_min = fields[4];
    tm.tm_sec = fields[5];
    const std::time_t t = timegm(&tm); // UTC, no DST surprises
    if (t == static_cast<std::time_t>(-1)) return false;
    out_epoch_seconds = static_cast<double>(t);
    return true;
}

namespace {

Snapshot parse_snapshot_file(const std::filesystem::path& path, double timestamp,
                             const std::vector<int>& channel_selection) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open snapshot file: " + path.string());

    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    int width = -1;
    while (std::getline(in, line)) {
        ++line_no;
        std::vector<double> row;
        const char* p = line.c_str();
        const char* end = p + line.size();
        while (p < end) {
            while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
            if (p >= end) break;
            char* after = nullptr;
            const double v = std::strtod(p, &after);
            if (after == p || (after < end && *after != ' ' && *after != '\t' && *after != '\r'))
                throw parse_error(path.filename().string() + ":" + std::to_string(line_no) +
                                  ": non-numeric token");
            row.push_back(v);
            p = after;
        }
        if (row.empty()) continue; // blank line
        if (width < 0)
            width = static_cast<int>(row.size());
        else if (static_cast<int>(row.size()) != width)
            throw parse_error(path.filename().string() + ":" + std::to_string(line_no) +
                              ": expected " + std::to_string(width) + " columns, got " +
                              std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw parse_error(path.filename().string() + ": no data rows");

    std::vector<int> cols = channel_selection;
    if (cols.empty())
        for (int c = 0; c < width; ++c) cols.push_back(c);
    for (const int c : cols)
        if (c < 0 || c >= width)
            throw validation_error(path.filename().string() + ": channel index " +
                                   std::to_string(c) + " out of range (file has " +
                                   std::to_string(width) + " columns)");

    Snapshot snap;
    snap.timestamp = timestamp;
    snap.filename = path.filename().string();
    snap.samples.resize(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
    for (int i = 0; i < snap.rows(); ++i)
        for (int j = 0; j < snap.channels(); ++j) snap.samples(i, j) = rows[i][cols[j]];
    return snap;
}

} // namespace

std::vector<Snapshot> read_snapshot_dir(const std::filesystem::path& path,
                                        const std::vector<int>& channel_selection) {
    if (!std::filesystem::is_directory(path))
        throw parse_error("not a directory: " + path.string());

    std::vector<std::pair<double, std::filesystem::path>> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
        if (!entry.is_regular_file()) continue;
        double ts;
        if (parse_snapshot_timestamp(entry.path().filename().string(), ts))
            files.emplace_back(ts, entry.path());
    }
    if (files.empty())
        throw parse_error("no timestamp-named snapshot files in " + path.string());
    std::sort(files.begin(), files.end());

    std::vector<Snapshot> snapshots;
    snapshots.reserve(files.size());
    for (const auto& [ts, file] : files)
        snapshots.push_back(parse_snapshot_file(file, ts, channel_selection));
    return snapshots;
}

Eigen::VectorXd extract_feature(const Snapshot& snapshot, FeatureKind kind) {
    const int s = snapshot.rows();
    const int c = snapshot.channels();
    if (s < 1) throw validation_error("snapshot has no samples");
    if (kind == FeatureKind::kurtosis && s < 2)
        throw validation_error("kurtosis needs at least 2 samples per snapshot");

    Eigen::VectorXd out(c);
    for (int j = 0; j < c; ++j) {
        const auto col = snapshot.samples.col(j);
        switch (kind) {
        case FeatureKind::rms:
            out[j] = std::sqrt(col.squaredNorm() / s);
            break;
        case FeatureKind::peak:
            out[j] = col.cwiseAbs().maxCoeff();
            break;
        case FeatureKind::crest: {
            const double rms = std::sqrt(col.squaredNorm() / s);
            if (rms == 0)
                throw numerical_error("crest factor undefined for an all-zero channel");
            out[j] = col.cwiseAbs().maxCoeff() / rms;
            break;
        }
        case FeatureKind::kurtosis: {
            const double mean = col.mean();
            const Eigen::VectorXd centered = col.array() - mean;
            const double var = centered.squaredNorm() / (s - 1); // sample convention
            if (var == 0)
                throw numerical_error("kurtosis undefined for a constant channel");
            const double m4 = centered.array().pow(4).sum() / s;
            out[j] = m4 / (var * var);
            break;
        }
        }
    }
    return out;
}

double default_gap_threshold(const std::vector<Snapshot>& snapshots) {
    if (snapshots.size() < 2)
        throw validation_error("need at least 2 snapshots to infer a gap threshold");
    std::vector<double> gaps;
    for (std::size_t i = 1; i < snapshots.size(); ++i)
        gaps.push_back(snapshots[i].timestamp - snapshots[i - 1].timestamp);
    std::sort(gaps.begin(), gaps.end());
    const std::size_t m = gaps.size() / 2;
    const double median = gaps.size() % 2 ? gaps[m] : 0.5 * (gaps[m - 1] + gaps[m]);
    return 2.0 * median;
}

ObservationSeries<double> to_observation_series(const std::vector<Snapshot>& snapshots,
                                                FeatureKind kind, double gap_threshold_seconds) {
    if (snapshots.size() < 2) throw validation_error("need at least 2 snapshots");

    const int n = static_cast<int>(snapshots.size());
    const int g = snapshots.front().channels();
    ObservationSeries<double> series;
    series.values.resize(n, g);
    series.timestamps.resize(n);
    series.contiguous_with_previous.assign(n, false);
    for (int c = 0; c < g; ++c) series.channel_labels.push_back("ch" + std::to_string(c + 1));

    for (int i = 0; i < n; ++i) {
        if (snapshots[i].channels() != g)
            throw validation_error(snapshots[i].filename + ": channel count mismatch");
        if (i > 0 && snapshots[i].timestamp <= snapshots[i - 1].timestamp)
            throw validation_error(snapshots[i].filename +
                                   ": timestamps not strictly increasing");
        series.values.row(i) = extract_feature(snapshots[i], kind).transpose();
        series.timestamps[i] = snapshots[i].timestamp;
        if (i > 0)
            series.contiguous_with_previous[i] =
                snapshots[i].timestamp - snapshots[i - 1].timestamp <= gap_threshold_seconds;
    }
    return series;
}

ObservationSeries<double> standardize(const ObservationSeries<double>& series) {
    const int n = series.samples();
    const int g = series.channels();
    if (n < 2) throw validation_error("standardization needs at least 2 samples");

    ObservationSeries<double> out = series;
    std::vector<ChannelTransform<double>> transforms(g);
    for (int c = 0; c < g; ++c) {
        const double mean = series.values.col(c).mean();
        const double var =
            (series.values.col(c).array() - mean).matrix().squaredNorm() / (n - 1);
        if (var == 0)
            throw validation_error("channel " + std::to_string(c) +
                                   " has zero variance, cannot standardize");
        const double sd = std::sqrt(var);
        out.values.col(c) = (series.values.col(c).array() - mean) / sd;
        transforms[c] = {mean, sd};
    }
    out.standardization = std::move(transforms);
    return out;
}

ObservationSeries<double> destandardize(const ObservationSeries<double>& series) {
    if (!series.standardization)
        throw validation_error("series carries no standardization to invert");
    ObservationSeries<double> out = series;
    for (int c = 0; c < series.channels(); ++c) {
        const auto& t = (*series.standardization)[c];
        out.values.col(c) = series.values.col(c).array() * t.scale + t.mean;
    }
    out.standardization.reset();
    return out;
}

} // namespace cdt
