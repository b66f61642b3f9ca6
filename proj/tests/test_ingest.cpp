#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "cdt/ingest.hpp"

using namespace cdt;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = fs::path(CDT_TEST_DATA_DIR) / "snapshots";

Snapshot make_snapshot(double timestamp, const Eigen::MatrixXd& samples) {
    Snapshot s;
    s.timestamp = timestamp;
    s.samples = samples;
    return s;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("cdt_ingest_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("fixture directory parses to 3 snapshots of 4x8") {
    const auto snapshots = read_snapshot_dir(kFixtures);
    REQUIRE(snapshots.size() == 3);
    for (const auto& s : snapshots) {
        CHECK(s.channels() == 4);
        CHECK(s.rows() == 8);
    }
    CHECK(snapshots[0].filename == "2004.02.12.10.32.39");
    CHECK(snapshots[1].timestamp - snapshots[0].timestamp == 600.0);
    CHECK(snapshots[2].timestamp - snapshots[1].timestamp == 600.0);
    // spot-check raw values against the bundled file contents
    CHECK(snapshots[0].samples(0, 0) == -0.105);
    CHECK(snapshots[0].samples(7, 3) == -0.084);
    CHECK(snapshots[2].samples(1, 2) == 0.182);
}

TEST_CASE("channel selection reorders and restricts columns") {
    const auto snapshots = read_snapshot_dir(kFixtures, {2, 0});
    REQUIRE(snapshots.size() == 3);
    CHECK(snapshots[0].channels() == 2);
    CHECK(snapshots[0].samples(0, 0) == 0.049);  // raw column 2
    CHECK(snapshots[0].samples(0, 1) == -0.105); // raw column 0

    CHECK_THROWS_AS(read_snapshot_dir(kFixtures, {4}), validation_error);
}

TEST_CASE("empty directory and malformed files are reported") {
    TempDir tmp;
    CHECK_THROWS_AS(read_snapshot_dir(tmp.path), parse_error);

    std::ofstream(tmp.path / "2004.02.12.11.02.39") << "0.1\t0.2\n0.3\tabc\n";
    try {
        read_snapshot_dir(tmp.path);
        FAIL("expected a parse error");
    } catch (const parse_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("2004.02.12.11.02.39") != std::string::npos);
        CHECK(msg.find(":2") != std::string::npos); // line number
    }

    CHECK_THROWS_AS(read_snapshot_dir(tmp.path / "missing"), parse_error);
}

TEST_CASE("ragged rows are rejected with a line number") {
    TempDir tmp;
    std::ofstream(tmp.path / "2004.02.12.11.02.39") << "0.1\t0.2\n0.3\n";
    CHECK_THROWS_AS(read_snapshot_dir(tmp.path), parse_error);
}

TEST_CASE("timestamp filename parsing") {
    double t = 0;
    CHECK(parse_snapshot_timestamp("2004.02.12.10.32.39", t));
    CHECK(t == 1076581959.0); // date -u -d '2004-02-12 10:32:39' +%s
    CHECK(!parse_snapshot_timestamp("readme.txt", t));
    CHECK(!parse_snapshot_timestamp("2004.02.12.10.32", t));
    CHECK(!parse_snapshot_timestamp("2004.13.12.10.32.39", t));
    CHECK(!parse_snapshot_timestamp("2004.02.12.10.32.39.txt", t));
}

TEST_CASE("rms hand computation") {
    Eigen::MatrixXd samples(2, 1);
    samples << 3, 4;
    const auto rms = extract_feature(make_snapshot(0, samples), FeatureKind::rms);
    CHECK(rms[0] == doctest::Approx(std::sqrt(12.5)).epsilon(1e-12));
}

TEST_CASE("constant channel: rms, peak, crest") {
    Eigen::MatrixXd samples = Eigen::MatrixXd::Constant(10, 2, -2.5);
    const auto snap = make_snapshot(0, samples);
    CHECK(extract_feature(snap, FeatureKind::rms)[0] == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(extract_feature(snap, FeatureKind::peak)[1] == 2.5);
    CHECK(extract_feature(snap, FeatureKind::crest)[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(extract_feature(snap, FeatureKind::kurtosis), numerical_error);

    const auto zeros = make_snapshot(0, Eigen::MatrixXd::Zero(4, 1));
    CHECK_THROWS_AS(extract_feature(zeros, FeatureKind::crest), numerical_error);
}

TEST_CASE("kurtosis of standard normal samples is near 3") {
    std::mt19937_64 gen(2026);
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::MatrixXd samples(20480, 1);
    for (int i = 0; i < samples.rows(); ++i) samples(i, 0) = dist(gen);
    const auto kurt = extract_feature(make_snapshot(0, samples), FeatureKind::kurtosis);
    CHECK(kurt[0] >= 2.8);
    CHECK(kurt[0] <= 3.2);

    Eigen::MatrixXd one(1, 1);
    one << 1.0;
    CHECK_THROWS_AS(extract_feature(make_snapshot(0, one), FeatureKind::kurtosis),
                    validation_error);
}

// independent per-feature recomputation with plain loops
TEST_CASE("fixture features match an independent recomputation") {
    const auto snapshots = read_snapshot_dir(kFixtures);
    for (const auto kind :
         {FeatureKind::rms, FeatureKind::kurtosis, FeatureKind::peak, FeatureKind::crest}) {
        const auto series = to_observation_series(snapshots, kind, 700.0);
        REQUIRE(series.samples() == 3);
        REQUIRE(series.channels() == 4);
        for (int i = 0; i < 3; ++i)
            for (int c = 0; c < 4; ++c) {
                const auto& m = snapshots[i].samples;
                const int s = static_cast<int>(m.rows());
                double sumsq = 0, sum = 0, peak = 0;
                for (int row = 0; row < s; ++row) {
                    sumsq += m(row, c) * m(row, c);
                    sum += m(row, c);
                    peak = std::max(peak, std::abs(m(row, c)));
                }
                const double rms = std::sqrt(sumsq / s);
                const double mean = sum / s;
                double var = 0, m4 = 0;
                for (int row = 0; row < s; ++row) {
                    const double d = m(row, c) - mean;
                    var += d * d;
                    m4 += d * d * d * d;
                }
                var /= (s - 1);
                m4 /= s;
                double expect = 0;
                switch (kind) {
                case FeatureKind::rms: expect = rms; break;
                case FeatureKind::peak: expect = peak; break;
                case FeatureKind::crest: expect = peak / rms; break;
                case FeatureKind::kurtosis: expect = m4 / (var * var); break;
                }
                CHECK(std::abs(series.values(i, c) - expect) <= 1e-9);
            }
    }
}

TEST_CASE("gap flags follow timestamps and threshold only") {
    std::vector<Snapshot> snapshots;
    const Eigen::MatrixXd samples = Eigen::MatrixXd::Random(8, 2);
    for (const double t : {0.0, 600.0, 1200.0, 1200.0 + 2 * 86400.0, 1200.0 + 2 * 86400.0 + 600.0})
        snapshots.push_back(make_snapshot(t, samples));

    const auto series = to_observation_series(snapshots, FeatureKind::rms, 900.0);
    REQUIRE(series.samples() == 5);
    CHECK(!series.contiguous_with_previous[0]);
    CHECK(series.contiguous_with_previous[1]);
    CHECK(series.contiguous_with_previous[2]);
    CHECK(!series.contiguous_with_previous[3]); // the 2-day gap
    CHECK(series.contiguous_with_previous[4]);
}

TEST_CASE("tied timestamps are rejected") {
    const Eigen::MatrixXd samples = Eigen::MatrixXd::Random(4, 2);
    std::vector<Snapshot> snapshots{make_snapshot(100, samples), make_snapshot(100, samples)};
    CHECK_THROWS_AS(to_observation_series(snapshots, FeatureKind::rms, 900.0), validation_error);
    snapshots.pop_back();
    CHECK_THROWS_AS(to_observation_series(snapshots, FeatureKind::rms, 900.0), validation_error);
}

TEST_CASE("default gap threshold is twice the median interval") {
    std::vector<Snapshot> snapshots;
    const Eigen::MatrixXd samples = Eigen::MatrixXd::Random(4, 1);
    for (const double t : {0.0, 600.0, 1200.0, 1800.0, 90000.0})
        snapshots.push_back(make_snapshot(t, samples));
    CHECK(default_gap_threshold(snapshots) == 1200.0);
}

TEST_CASE("standardize: hand case and round trip") {
    ObservationSeries<double> series;
    series.values.resize(2, 1);
    series.values << 0, 2;
    series.timestamps = {0, 1};
    series.contiguous_with_previous = {false, true};
    series.channel_labels = {"ch1"};

    const auto std_series = standardize(series);
    // sample sd of {0, 2} is sqrt(2)
    CHECK(std::abs(std_series.values(0, 0) + 0.707107) <= 1e-6);
    CHECK(std::abs(std_series.values(1, 0) - 0.707107) <= 1e-6);
    REQUIRE(std_series.standardization.has_value());
    CHECK((*std_series.standardization)[0].mean == 1.0);

    const auto back = destandardize(std_series);
    CHECK((back.values - series.values).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(!back.standardization.has_value());

    // already standardized input is a fixed point
    const auto twice = standardize(std_series);
    CHECK((twice.values - std_series.values).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("standardized channels have zero mean and unit sample sd") {
    std::mt19937_64 gen(8);
    std::normal_distribution<double> dist(3.0, 2.5);
    ObservationSeries<double> series;
    series.values.resize(100, 3);
    for (int i = 0; i < 100; ++i)
        for (int c = 0; c < 3; ++c) series.values(i, c) = dist(gen);
    series.timestamps.resize(100);
    for (int i = 0; i < 100; ++i) series.timestamps[i] = i;
    series.contiguous_with_previous.assign(100, true);
    series.contiguous_with_previous[0] = false;
    series.channel_labels = {"a", "b", "c"};

    const auto out = standardize(series);
    for (int c = 0; c < 3; ++c) {
        const double mean = out.values.col(c).mean();
        const double sd = std::sqrt((out.values.col(c).array() - mean).square().sum() / 99);
        CHECK(std::abs(mean) <= 1e-9);
        CHECK(std::abs(sd - 1.0) <= 1e-9);
    }
}

TEST_CASE("zero-variance channel cannot be standardized") {
    ObservationSeries<double> series;
    series.values = Eigen::MatrixXd::Constant(5, 1, 3.0);
    series.timestamps = {0, 1, 2, 3, 4};
    series.contiguous_with_previous = {false, true, true, true, true};
    series.channel_labels = {"flat"};
    CHECK_THROWS_AS(standardize(series), validation_error);
}

TEST_CASE("feature kind names round-trip") {
    for (const auto kind :
         {FeatureKind::rms, FeatureKind::kurtosis, FeatureKind::peak, FeatureKind::crest})
        CHECK(feature_kind_from_string(to_string(kind)) == kind);
    CHECK_THROWS_AS(feature_kind_from_string("spectral"), validation_error);
}
