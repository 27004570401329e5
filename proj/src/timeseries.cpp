#include "delayosc/timeseries.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "delayosc/errors.hpp"

namespace delayosc {

TimeSeries TimeSeries::decimated(std::size_t stride) const {
    if (stride == 0) throw InvalidArgument("decimation stride must be >= 1");
    TimeSeries out;
    for (std::size_t i = 0; i < samples.size(); i += stride) out.samples.push_back(samples[i]);
    return out;
}

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

void write_csv(std::ostream& os, const TimeSeries& ts) {
    os << "t,re_a,im_a,n,dX,dP,interval_index\n";
    for (const auto& s : ts.samples) {
        os << format_number(s.t) << ',' << format_number(s.a.real()) << ',' << format_number(s.a.imag()) << ','
           << format_number(s.n) << ',' << format_number(s.dX) << ',' << format_number(s.dP) << ',' << s.interval
           << '\n';
    }
}

void write_csv_file(const std::string& path, const TimeSeries& ts) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path + " for writing");
    write_csv(f, ts);
}

}  // namespace delayosc
