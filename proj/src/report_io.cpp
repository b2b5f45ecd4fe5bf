#include "ntklab/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace ntklab {

std::string format_double(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream out;
    out << kTrajectoryHeader << "\n";
    for (const TrajectoryRecord& r : traj.records) {
        // wall_ms is pinned to 0 in the file: the CSV must replay
        // byte-identically, so measured timing lives in the manifest instead
        out << r.iter << ',' << format_double(r.loss) << ','
            << format_double(r.v_perp) << ',' << format_double(r.v_par) << ','
            << format_double(r.dist_minnorm_sq) << ','
            << format_double(r.dist_init_sq) << ','
            << format_double(r.max_unit_drift) << ',' << r.sign_flips << ",0\n";
    }
    return out.str();
}

std::string table_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    for (size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << "\n";
    }
    return out.str();
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope: need >= 2 matched points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw std::invalid_argument("loglog_slope: nonpositive sample");
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("loglog_slope: degenerate x");
    return (n * sxy - sx * sy) / denom;
}

}  // namespace ntklab
