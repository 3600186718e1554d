#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "uct/gmf.hpp"
#include "uct/model.hpp"

namespace uct_test {

inline std::shared_ptr<const uct::Metamodel> gmf_mm() {
  static std::shared_ptr<const uct::Metamodel> mm = uct::gmf::bundled_metamodel();
  return mm;
}

inline uct::Model gmf1_model() {
  return uct::parse_model(gmf_mm(), uct::gmf::kExampleInputText);
}

inline uct::Model gmf1_expected_model() {
  return uct::parse_model(gmf_mm(), uct::gmf::kExampleExpectedText);
}

inline std::filesystem::path fresh_temp_dir(const std::string& tag) {
  auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  auto dir = std::filesystem::temp_directory_path() /
             (tag + "_" + std::to_string(stamp));
  std::filesystem::create_directories(dir);
  return dir;
}

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

/// Runs the built CLI with the given arguments.
inline CliResult run_cli(const std::string& args) {
  auto dir = fresh_temp_dir("uct_cli_out");
  auto out = dir / "out.txt";
  std::string cmd = std::string(UCT_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
  int rc = std::system(cmd.c_str());
  CliResult res;
  res.exit_code = WEXITSTATUS(rc);
  std::ifstream in(out);
  std::ostringstream ss;
  ss << in.rdbuf();
  res.output = ss.str();
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  return res;
}

inline std::string write_temp_file(const std::filesystem::path& dir,
                                   const std::string& name, const std::string& content) {
  auto p = dir / name;
  std::ofstream(p) << content;
  return p.string();
}

}  // namespace uct_test
