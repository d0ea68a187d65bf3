#include "spsim/histogram_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spsim {

namespace {

[[noreturn]] void parse_fail(const std::string& name, std::size_t line,
                             const std::string& what) {
  std::ostringstream msg;
  msg << name << ":" << line << ": " << what;
  throw std::runtime_error(msg.str());
}

bool data_line(const std::string& raw, std::string& out) {
  const auto first = raw.find_first_not_of(" \t\r");
  if (first == std::string::npos) return false;
  if (raw[first] == '#') return false;
  out = raw.substr(first);
  return true;
}

}  // namespace

HbtHistogram read_histogram(std::istream& in, const std::string& name) {
  HbtHistogram h;
  std::string raw, line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++lineno;
    if (!data_line(raw, line)) continue;
    std::istringstream fields(line);
    if (!have_header) {
      if (!(fields >> h.bin_width >> h.period >> h.center_index))
        parse_fail(name, lineno, "expected header '<bin_width> <period> <center_index>'");
      std::string extra;
      if (fields >> extra) parse_fail(name, lineno, "unexpected trailing field '" + extra + "'");
      if (!(h.bin_width > 0)) parse_fail(name, lineno, "bin width must be positive");
      if (!(h.period > 0)) parse_fail(name, lineno, "period must be positive");
      if (h.center_index < 0) parse_fail(name, lineno, "center index must be nonnegative");
      have_header = true;
      continue;
    }
    long long count = 0;
    if (!(fields >> count)) parse_fail(name, lineno, "expected an integer bin count");
    std::string extra;
    if (fields >> extra) parse_fail(name, lineno, "unexpected trailing field '" + extra + "'");
    if (count < 0) parse_fail(name, lineno, "bin counts must be nonnegative");
    h.counts.push_back(static_cast<std::uint64_t>(count));
  }
  if (!have_header) parse_fail(name, lineno, "missing header line");
  if (h.counts.empty()) parse_fail(name, lineno, "histogram has no bins");
  if (h.center_index >= static_cast<std::int64_t>(h.counts.size()))
    parse_fail(name, lineno, "center index beyond the last bin");
  return h;
}

HbtHistogram read_histogram_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open histogram file '" + path + "'");
  return read_histogram(in, path);
}

void write_histogram(std::ostream& out, const HbtHistogram& histogram) {
  out << "# intensity-correlation histogram\n";
  out << "# bin_width period center_index\n";
  char header[96];
  std::snprintf(header, sizeof header, "%.12e %.12e %lld\n", histogram.bin_width,
                histogram.period, static_cast<long long>(histogram.center_index));
  out << header;
  for (std::uint64_t c : histogram.counts) out << c << "\n";
}

void write_histogram_file(const std::string& path, const HbtHistogram& histogram) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_histogram(out, histogram);
  if (!out.good()) throw std::runtime_error("failed writing histogram to '" + path + "'");
}

}  // namespace spsim
