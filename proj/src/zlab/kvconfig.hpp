#pragma once

// "key = value" text files with '#' comments. Used for manifests, attacker
// profiles and bundle metadata.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace zlab {

struct KvEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

using KvList = std::vector<KvEntry>;

// Throws Error(Config) on a line without '='.
KvList parse_kv(std::string_view text);
KvList load_kv(const std::filesystem::path& path);
std::string serialize_kv(const std::vector<std::pair<std::string, std::string>>& entries);

double kv_double(const KvEntry& e);
std::int64_t kv_int(const KvEntry& e);
std::uint64_t kv_u64(const KvEntry& e);
bool kv_bool(const KvEntry& e);

}  // namespace zlab
