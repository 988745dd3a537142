#include <string>
#include <vector>

#include "twinbeam/pipeline.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return twinbeam::run_pipeline(args);
}
