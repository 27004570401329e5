#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace delayosc {

using cd = std::complex<double>;

struct TimeSample {
    double t = 0.0;
    cd a{0.0};
    double n = 0.0;
    double dX = 0.0;
    double dP = 0.0;
    std::size_t interval = 0;
};

/// Observables of the current system sampled on a fixed grid. A sample at an
/// interval boundary belongs to the interval it closes.
struct TimeSeries {
    std::vector<TimeSample> samples;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    const TimeSample& operator[](std::size_t i) const { return samples[i]; }
    const TimeSample& back() const { return samples.back(); }

    /// Every stride-th sample, keeping the first.
    TimeSeries decimated(std::size_t stride) const;
};

/// printf "%.12g"; the single formatting rule behind every CSV we emit.
std::string format_number(double x);

/// Columns: t, re_a, im_a, n, dX, dP, interval_index.
void write_csv(std::ostream& os, const TimeSeries& ts);
void write_csv_file(const std::string& path, const TimeSeries& ts);

}  // namespace delayosc
