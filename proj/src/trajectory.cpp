#include "affsched/trajectory.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace affsched {

namespace {

void append_double(std::string& buf, double v) {
    char tmp[32];
    auto [end, ec] = std::to_chars(tmp, tmp + sizeof(tmp), v);
    if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
    buf.append(tmp, end);
}

} // namespace

void Trajectory::write_csv(std::ostream& out) const {
    std::string line = "t";
    for (int i = 0; i <= imax; ++i) {
        for (int j = 0; j < 2; ++j) {
            line += ",q" + std::to_string(i) + std::to_string(j);
        }
    }
    line += '\n';
    out << line;
    for (size_t s = 0; s < times.size(); ++s) {
        line.clear();
        append_double(line, times[s]);
        for (double v : rows[s]) {
            line += ',';
            append_double(line, v);
        }
        line += '\n';
        out << line;
    }
}

Trajectory Trajectory::read_csv(std::istream& in) {
    Trajectory traj;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty trajectory file");
    size_t cols = 0;
    for (char c : line) {
        if (c == ',') ++cols;
    }
    if (cols == 0 || cols % 2 != 0) throw std::runtime_error("malformed trajectory header");
    traj.imax = static_cast<int>(cols / 2) - 1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(cols);
        const char* p = line.data();
        const char* end = line.data() + line.size();
        bool first = true;
        while (p < end) {
            const char* comma = p;
            while (comma < end && *comma != ',') ++comma;
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(p, comma, v);
            if (ec != std::errc{} || ptr != comma) throw std::runtime_error("malformed trajectory value");
            if (first) {
                traj.times.push_back(v);
                first = false;
            } else {
                row.push_back(v);
            }
            p = comma + 1;
        }
        if (row.size() != cols) throw std::runtime_error("trajectory row width mismatch");
        traj.rows.push_back(std::move(row));
    }
    return traj;
}

} // namespace affsched
