#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "nbscreen/cli.hpp"

namespace nbscreen::test {

/// Fresh scratch directory removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("nbscreen-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct CliResult {
  int code;
  std::string out, err;
};

inline CliResult run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

/// synth -> split -> train -> predict -> evaluate --format json, all in `dir`.
/// Returns the JSON report text, or the failing step's stderr prefixed with
/// "FAILED".
inline std::string run_pipeline(const ScratchDir& dir, std::uint64_t seed) {
  const auto s = std::to_string(seed);
  const std::vector<std::vector<std::string>> steps{
      {"synth", "--marginals", data_path("table1_contingency.csv"), "--out", dir.file("data.csv"), "--seed", s},
      {"split", "--input", dir.file("data.csv"), "--train-frac", "0.7", "--seed", s, "--out-train",
       dir.file("train.csv"), "--out-test", dir.file("test.csv")},
      {"train", "--input", dir.file("train.csv"), "--alpha", "1", "--model", dir.file("model.json")},
      {"predict", "--model", dir.file("model.json"), "--input", dir.file("test.csv"), "--out", dir.file("pred.csv")},
  };
  for (const auto& step : steps) {
    const auto r = run_cli(step);
    if (r.code != 0) return "FAILED " + step[0] + ": " + r.err;
  }
  const auto r = run_cli({"evaluate", "--predictions", dir.file("pred.csv"), "--truth", dir.file("test.csv"), "--format",
                          "json"});
  if (r.code != 0) return "FAILED evaluate: " + r.err;
  return r.out;
}

}  // namespace nbscreen::test
