// SPDX-License-Identifier: Apache-2.0
#include "glidecast/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "glidecast/error.hpp"

namespace glidecast {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "t,x,y,z\n";
    for (const auto& s : traj.samples) {
        out << format_double(s.t) << ',' << format_double(s.x) << ',' << format_double(s.y) << ','
            << format_double(s.z) << '\n';
    }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    std::ostringstream out;
    write_trajectory_csv(out, traj);
    write_text_file(path, out.str());
}

namespace {

double parse_field(std::string_view field, const std::filesystem::path& path, std::size_t line) {
    double value = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw Error(path.string() + ":" + std::to_string(line) + ": cannot parse '" +
                    std::string(field) + "' as a number");
    }
    return value;
}

} // namespace

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open trajectory '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line) || line != "t,x,y,z") {
        throw Error(path.string() + ": expected header 't,x,y,z'");
    }
    Trajectory traj;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::array<double, 4> v{};
        std::size_t start = 0;
        for (std::size_t k = 0; k < 4; ++k) {
            const std::size_t comma = line.find(',', start);
            const bool last = k == 3;
            if (last != (comma == std::string::npos)) {
                throw Error(path.string() + ":" + std::to_string(line_no) +
                            ": expected 4 comma-separated fields");
            }
            const std::string_view field(line.data() + start,
                                         (last ? line.size() : comma) - start);
            v[k] = parse_field(field, path, line_no);
            start = comma + 1;
        }
        if (!traj.samples.empty() && !(v[0] > traj.samples.back().t)) {
            throw Error(path.string() + ":" + std::to_string(line_no) +
                        ": time must be strictly increasing");
        }
        traj.samples.push_back({v[0], v[1], v[2], v[3]});
    }
    traj.termination = Termination::external;
    return traj;
}

void write_dataset_csv(std::ostream& out, const SequenceDataset& train,
                       const SequenceDataset& test) {
    out << "window_index,step,xn,yn,zn,target_axis,target_value\n";
    std::size_t window_index = 0;
    for (const SequenceDataset* d : {&train, &test}) {
        for (std::size_t i = 0; i < d->size(); ++i, ++window_index) {
            const Tensor& w = d->inputs[i];
            for (std::size_t s = 0; s < w.dim(0); ++s) {
                out << window_index << ',' << s << ',' << format_double(w.at(s, 0)) << ','
                    << format_double(w.at(s, 1)) << ',' << format_double(w.at(s, 2)) << ",,\n";
            }
            for (Axis a : kAxes) {
                out << window_index << ',' << w.dim(0) << ",,,," << to_string(a) << ','
                    << format_double(d->targets[index(a)][i]) << '\n';
            }
        }
    }
}

void write_history_csv(std::ostream& out, const TrainHistory& history) {
    out << "epoch,axis,loss,mae\n";
    for (const auto& r : history.records) {
        out << r.epoch << ',' << to_string(r.axis) << ',' << format_double(r.loss) << ','
            << format_double(r.mae) << '\n';
    }
}

void write_positions_csv(std::ostream& out, const std::vector<double>& times,
                         const std::vector<Position>& positions) {
    if (times.size() != positions.size()) {
        throw InvalidInputError("write_positions_csv: times and positions differ in length");
    }
    out << "t,x,y,z\n";
    for (std::size_t i = 0; i < positions.size(); ++i) {
        out << format_double(times[i]) << ',' << format_double(positions[i][0]) << ','
            << format_double(positions[i][1]) << ',' << format_double(positions[i][2]) << '\n';
    }
}

void write_plot_csv(std::ostream& out, const std::vector<TrajectorySample>& actual,
                    const std::vector<Position>& predicted) {
    if (actual.size() != predicted.size()) {
        throw InvalidInputError("write_plot_csv: actual and predicted rows differ in length");
    }
    out << "t,x,y,z,x_pred,y_pred,z_pred\n";
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const auto& s = actual[i];
        const auto& p = predicted[i];
        out << format_double(s.t) << ',' << format_double(s.x) << ',' << format_double(s.y) << ','
            << format_double(s.z) << ',' << format_double(p[0]) << ',' << format_double(p[1])
            << ',' << format_double(p[2]) << '\n';
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open '" + path.string() + "' for writing");
    }
    out << text;
    if (!out) {
        throw Error("failed writing '" + path.string() + "'");
    }
}

} // namespace glidecast
