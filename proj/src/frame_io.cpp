#include "twinbeam/io/frame_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace twinbeam {

namespace {

constexpr const char* kFrameMagic = "TWINBEAM-FRAME 1";
constexpr const char* kIndexMagic = "TWINBEAM-INDEX 1";

}  // namespace

void write_frame(const Frame& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write frame file: " + path);
  const bool byte_payload = frame.thresholded;
  out << kFrameMagic << "\n";
  out << "width " << frame.values.width() << "\n";
  out << "height " << frame.values.height() << "\n";
  out << "binning " << frame.binning << "\n";
  out << "regime " << to_string(frame.regime) << "\n";
  out << "frame_index " << frame.frame_index << "\n";
  out << "thresholded " << (frame.thresholded ? 1 : 0) << "\n";
  out << "signal_region " << frame.signal_region.x0 << " "
      << frame.signal_region.y0 << " " << frame.signal_region.x1 << " "
      << frame.signal_region.y1 << "\n";
  out << "idler_region " << frame.idler_region.x0 << " "
      << frame.idler_region.y0 << " " << frame.idler_region.x1 << " "
      << frame.idler_region.y1 << "\n";
  out << "dtype " << (byte_payload ? "u8" : "f64") << "\n";
  out << "end\n";
  if (byte_payload) {
    std::vector<std::uint8_t> bytes(frame.values.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
      bytes[i] = frame.values.data()[i] > 0.0 ? 1 : 0;
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  } else {
    out.write(reinterpret_cast<const char*>(frame.values.data()),
              static_cast<std::streamsize>(frame.values.size() *
                                           sizeof(double)));
  }
  if (!out) throw std::runtime_error("short write on frame file: " + path);
}

Frame read_frame(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read frame file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kFrameMagic) {
    throw std::runtime_error("not a frame file: " + path);
  }
  Frame frame;
  int width = 0, height = 0;
  std::string dtype;
  while (std::getline(in, line) && line != "end") {
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (key == "width") {
      fields >> width;
    } else if (key == "height") {
      fields >> height;
    } else if (key == "binning") {
      fields >> frame.binning;
    } else if (key == "regime") {
      std::string name;
      fields >> name;
      frame.regime = regime_from_string(name);
    } else if (key == "frame_index") {
      fields >> frame.frame_index;
    } else if (key == "thresholded") {
      int flag = 0;
      fields >> flag;
      frame.thresholded = flag != 0;
    } else if (key == "signal_region") {
      fields >> frame.signal_region.x0 >> frame.signal_region.y0 >>
          frame.signal_region.x1 >> frame.signal_region.y1;
    } else if (key == "idler_region") {
      fields >> frame.idler_region.x0 >> frame.idler_region.y0 >>
          frame.idler_region.x1 >> frame.idler_region.y1;
    } else if (key == "dtype") {
      fields >> dtype;
    } else {
      throw std::runtime_error("unknown frame header field '" + key + "' in " +
                               path);
    }
    if (!fields) {
      throw std::runtime_error("malformed frame header in " + path);
    }
  }
  if (line != "end" || width <= 0 || height <= 0 ||
      (dtype != "u8" && dtype != "f64")) {
    throw std::runtime_error("malformed frame file: " + path);
  }
  frame.values = Grid2D<double>(width, height);
  if (dtype == "u8") {
    std::vector<std::uint8_t> bytes(frame.values.size());
    in.read(reinterpret_cast<char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!in) throw std::runtime_error("truncated frame payload: " + path);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
      frame.values.data()[i] = bytes[i];
    }
  } else {
    in.read(reinterpret_cast<char*>(frame.values.data()),
            static_cast<std::streamsize>(frame.values.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated frame payload: " + path);
  }
  return frame;
}

std::string frame_file_name(std::int64_t frame_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06lld.tbf",
                static_cast<long long>(frame_index));
  return buf;
}

void write_stack_index(const std::string& dir,
                       const std::vector<std::string>& files,
                       std::uint64_t seed) {
  const std::string path = dir + "/index.txt";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write stack index: " + path);
  out << kIndexMagic << "\n";
  out << "seed " << seed << "\n";
  out << "frames " << files.size() << "\n";
  for (const std::string& f : files) out << f << "\n";
}

std::vector<std::string> read_stack_index(const std::string& dir) {
  const std::string path = dir + "/index.txt";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read stack index: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kIndexMagic) {
    throw std::runtime_error("not a stack index: " + path);
  }
  std::size_t n_frames = 0;
  std::vector<std::string> files;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (key == "seed") {
      continue;
    } else if (key == "frames") {
      fields >> n_frames;
    } else {
      files.push_back(dir + "/" + line);
    }
  }
  if (files.size() != n_frames) {
    throw std::runtime_error("stack index frame count mismatch in " + path);
  }
  return files;
}

void write_pgm(const Frame& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write PGM file: " + path);
  double peak = 0.0;
  for (const double v : frame.values) peak = std::max(peak, v);
  if (peak <= 0.0) peak = 1.0;
  out << "P5\n"
      << frame.values.width() << " " << frame.values.height() << "\n255\n";
  std::vector<std::uint8_t> bytes(frame.values.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const double v = frame.values.data()[i] / peak;
    bytes[i] = static_cast<std::uint8_t>(v <= 0.0 ? 0 : v * 255.0 + 0.5);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace twinbeam
