#ifndef CDT_SERIES_HPP
#define CDT_SERIES_HPP

#include <optional>
#include <string>
#include <vector>

#include "cdt/errors.hpp"
#include "cdt/layout.hpp"

namespace cdt {

/// Per-channel affine transform applied during standardization.
template <typename Scalar = double>
struct ChannelTransform {
    Scalar mean = Scalar(0);
    Scalar scale = Scalar(1); // sample standard deviation before standardizing
};

/// G-channel feature time series. values is N x G. contiguous_with_previous[n]
/// says whether (y[n-1], y[n]) is a valid lag-1 pair; index 0 is always false.
template <typename Scalar = double>
struct ObservationSeries {
    MatrixX<Scalar> values;
    std::vector<double> timestamps; // seconds since epoch, or plain indices
    std::vector<bool> contiguous_with_previous;
    std::vector<std::string> channel_labels;
    std::optional<std::vector<ChannelTransform<Scalar>>> standardization;

    int samples() const { return static_cast<int>(values.rows()); }
    int channels() const { return static_cast<int>(values.cols()); }

    static ObservationSeries contiguous(MatrixX<Scalar> values) {
        ObservationSeries s;
        const int n = static_cast<int>(values.rows());
        s.values = std::move(values);
        s.timestamps.resize(n);
        for (int i = 0; i < n; ++i) s.timestamps[i] = i;
        s.contiguous_with_previous.assign(n, true);
        if (n > 0) s.contiguous_with_previous[0] = false;
        for (int c = 0; c < s.channels(); ++c)
            s.channel_labels.push_back("node" + std::to_string(c + 1));
        return s;
    }
};

} // namespace cdt

#endif
