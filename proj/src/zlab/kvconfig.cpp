#include "zlab/kvconfig.hpp"

#include <charconv>

#include "zlab/error.hpp"
#include "zlab/textio.hpp"

namespace zlab {

namespace {

[[noreturn]] void bad_value(const KvEntry& e, const char* what) {
  throw Error(ErrorKind::Config, "line " + std::to_string(e.line) + ": " + e.key + " needs " + what + ", got '" +
                                     e.value + "'",
              e.line);
}

}  // namespace

KvList parse_kv(std::string_view text) {
  KvList out;
  std::size_t pos = 0, line_no = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string line = textio::trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Config, "line " + std::to_string(line_no) + ": expected key = value", line_no);
    }
    KvEntry e{textio::trim(std::string_view(line).substr(0, eq)), textio::trim(std::string_view(line).substr(eq + 1)),
              line_no};
    if (e.key.empty()) throw Error(ErrorKind::Config, "line " + std::to_string(line_no) + ": empty key", line_no);
    out.push_back(std::move(e));
  }
  return out;
}

KvList load_kv(const std::filesystem::path& path) {
  std::string text;
  for (const auto& l : textio::read_lines(path)) {
    text += l;
    text += '\n';
  }
  return parse_kv(text);
}

std::string serialize_kv(const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string out;
  for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
  return out;
}

double kv_double(const KvEntry& e) {
  auto v = textio::parse_double(e.value);
  if (!v) bad_value(e, "a number");
  return *v;
}

std::int64_t kv_int(const KvEntry& e) {
  auto v = textio::parse_int(e.value);
  if (!v) bad_value(e, "an integer");
  return *v;
}

std::uint64_t kv_u64(const KvEntry& e) {
  std::uint64_t v = 0;
  const auto* b = e.value.data();
  const auto* end = b + e.value.size();
  auto res = std::from_chars(b, end, v);
  if (e.value.empty() || res.ec != std::errc{} || res.ptr != end) bad_value(e, "an unsigned integer");
  return v;
}

bool kv_bool(const KvEntry& e) {
  if (e.value == "1" || e.value == "true" || e.value == "yes" || e.value == "on") return true;
  if (e.value == "0" || e.value == "false" || e.value == "no" || e.value == "off") return false;
  bad_value(e, "a boolean");
}

}  // namespace zlab
