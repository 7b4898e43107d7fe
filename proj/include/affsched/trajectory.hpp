#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace affsched {

// Sampled cumulative occupancy fractions over time. Row layout matches the
// CSV schema: t,q00,q01,q10,q11,...,q{imax}0,q{imax}1 (level-major, j minor).
struct Trajectory {
    int imax = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> rows;

    static int column(int level, int j) { return 2 * level + j; }
    double at(size_t sample, int level, int j) const { return rows[sample][static_cast<size_t>(column(level, j))]; }
    size_t n_samples() const { return times.size(); }

    void write_csv(std::ostream& out) const;
    static Trajectory read_csv(std::istream& in);
};

} // namespace affsched
