// SPDX-License-Identifier: Apache-2.0
// CSV readers and writers. Doubles are written in the shortest form that
// parses back to the same bits; lines end in '\n'.
#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "glidecast/dataset.hpp"
#include "glidecast/integrator.hpp"
#include "glidecast/model.hpp"
#include "glidecast/training.hpp"

namespace glidecast {

std::string format_double(double value);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
/// Expects the `t,x,y,z` header. Throws Error on malformed rows.
Trajectory read_trajectory_csv(const std::filesystem::path& path);

/// Header `window_index,step,xn,yn,zn,target_axis,target_value`. Each window
/// contributes L input rows (steps 0..L-1, target columns empty) followed by
/// three target rows at step L (input columns empty).
void write_dataset_csv(std::ostream& out, const SequenceDataset& train, const SequenceDataset& test);

/// Header `epoch,axis,loss,mae`.
void write_history_csv(std::ostream& out, const TrainHistory& history);

/// Header `t,x,y,z`.
void write_positions_csv(std::ostream& out, const std::vector<double>& times,
                         const std::vector<Position>& positions);

/// Header `t,x,y,z,x_pred,y_pred,z_pred`.
void write_plot_csv(std::ostream& out, const std::vector<TrajectorySample>& actual,
                    const std::vector<Position>& predicted);

/// Writes `text` to `path`, throwing Error on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace glidecast
