#include "kgp/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kgp/error.hpp"

namespace kgp {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string profile_csv(const std::vector<std::string>& names, const std::vector<RadialFunction>& columns) {
  if (names.size() != columns.size() || columns.empty()) throw DomainError("profile_csv: names and columns differ");
  for (const auto& c : columns) require_same_grid(columns.front(), c);
  std::ostringstream out;
  out << "r";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  const auto r = columns.front().grid().nodes();
  for (std::size_t i = 0; i < r.size(); ++i) {
    out << format_double(r[i]);
    for (const auto& c : columns) out << ',' << format_double(c[i]);
    out << '\n';
  }
  return out.str();
}

}  // namespace kgp
