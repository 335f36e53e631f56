#include "elsurv/report.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "elsurv/errors.hpp"

namespace elsurv {

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void write_kv_file(const std::string& path, const KvList& entries) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
}

void write_manifest(const std::string& out_dir,
                    const std::vector<std::string>& args, const KvList& extra) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / "manifest.txt");
  if (!out) throw ParseError("cannot write manifest in '" + out_dir + "'");
  out << "version = " << kVersion << "\n";
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[64];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  out << "written = " << stamp << "\n";
  for (const auto& [k, v] : extra) out << k << " = " << v << "\n";
  for (const auto& a : args) out << "arg: " << a << "\n";
}

std::vector<std::string> read_manifest_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest '" + path + "'");
  std::vector<std::string> args;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("arg: ", 0) == 0) args.push_back(line.substr(5));
  }
  if (args.empty()) throw ParseError("manifest holds no command arguments");
  return args;
}

}  // namespace elsurv
