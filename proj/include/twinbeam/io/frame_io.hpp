#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twinbeam/detector.hpp"

namespace twinbeam {

/// Frame files carry a small text header followed by the raw row-major grid:
/// unsigned 8-bit for thresholded counting frames, little-endian float64
/// otherwise. A stack directory additionally holds an index file listing the
/// frame files in order.
void write_frame(const Frame& frame, const std::string& path);
Frame read_frame(const std::string& path);

std::string frame_file_name(std::int64_t frame_index);

void write_stack_index(const std::string& dir,
                       const std::vector<std::string>& files,
                       std::uint64_t seed);
std::vector<std::string> read_stack_index(const std::string& dir);

/// 8-bit portable graymap preview, normalized to the frame maximum.
void write_pgm(const Frame& frame, const std::string& path);

}  // namespace twinbeam
