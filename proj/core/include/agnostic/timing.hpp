#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace agnostic {

// Wall-clock seconds per pipeline stage, in execution order. Reports keep
// these apart from every reproducible field.
struct Timings {
  std::vector<std::pair<std::string, double>> stages;

  void add(std::string stage, double seconds) { stages.emplace_back(std::move(stage), seconds); }
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}

  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace agnostic
