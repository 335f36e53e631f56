#pragma once

#include <string>
#include <utility>
#include <vector>

namespace elsurv {

inline constexpr const char* kVersion = "0.1.0";

std::string fmt_g17(double v);
std::string fmt_g6(double v);

using KvList = std::vector<std::pair<std::string, std::string>>;

void write_kv_file(const std::string& path, const KvList& entries);

// Every command writes one of these next to its outputs; `elsurv replay`
// re-executes the recorded argument list.
void write_manifest(const std::string& out_dir,
                    const std::vector<std::string>& args, const KvList& extra);

std::vector<std::string> read_manifest_args(const std::string& path);

}  // namespace elsurv
