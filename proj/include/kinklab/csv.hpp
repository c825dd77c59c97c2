#ifndef KINKLAB_CSV_HPP
#define KINKLAB_CSV_HPP

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "kinklab/common.hpp"
#include "kinklab/state.hpp"

namespace kinklab {

// Shortest decimal form that re-parses to the exact binary double (at most
// 17 significant digits), so emitted CSVs round-trip bit-for-bit.
inline std::string format_double(double v) {
  char buf[40];
  for (int precision : {15, 16}) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Write-then-rename so readers never observe a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename to " + path.string() + " failed: " + ec.message());
}

// Trace CSV: header "t,n,p", one row per (time, link), Unix newlines.
inline void write_trace_csv(const std::filesystem::path& path, const ProbabilityTrace& trace) {
  std::string out = "t,n,p\n";
  out.reserve(32 * trace.n_times() * (trace.distributions.empty() ? 1 : trace.distributions[0].size()));
  for (int it = 0; it < trace.n_times(); ++it) {
    const std::string t_str = format_double(trace.times[it]);
    const auto& p = trace.distributions[it];
    for (int n = 0; n < p.size(); ++n) {
      out += t_str;
      out += ',';
      out += std::to_string(n);
      out += ',';
      out += format_double(p(n));
      out += '\n';
    }
  }
  write_file_atomic(path, out);
}

namespace detail {

inline double parse_csv_double(std::string_view field, int line_no) {
  double value = 0.0;
  const auto* begin = field.data();
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw IoError("line " + std::to_string(line_no) + ": cannot parse number '" +
                  std::string(field) + "'");
  if (!std::isfinite(value))
    throw IoError("line " + std::to_string(line_no) + ": non-finite value '" +
                  std::string(field) + "'");
  return value;
}

}  // namespace detail

// Parse a trace CSV back into times and distributions. Malformed rows are
// reported with their line number.
inline ProbabilityTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw IoError("line 1: empty file " + path.string());
  ++line_no;
  if (line == "t,n,p\r") line.pop_back();
  if (line != "t,n,p")
    throw IoError("line 1: expected header 't,n,p', got '" + line + "'");

  ProbabilityTrace trace;
  std::vector<double> current;
  double current_t = 0.0;
  bool have_block = false;
  int block_start_line = 0;
  int expected_links = -1;

  const auto flush_block = [&](int at_line) {
    if (!have_block) return;
    if (expected_links >= 0 && static_cast<int>(current.size()) != expected_links)
      throw IoError("line " + std::to_string(at_line) + ": time block starting at line " +
                    std::to_string(block_start_line) + " has " + std::to_string(current.size()) +
                    " rows, expected " + std::to_string(expected_links));
    expected_links = static_cast<int>(current.size());
    Eigen::VectorXd p = Eigen::Map<Eigen::VectorXd>(current.data(), expected_links);
    trace.append(current_t, std::move(p));
    current.clear();
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos ||
        line.find(',', c2 + 1) != std::string::npos)
      throw IoError("line " + std::to_string(line_no) + ": expected 3 columns, got '" + line + "'");

    const double t = detail::parse_csv_double(std::string_view(line).substr(0, c1), line_no);
    const double n = detail::parse_csv_double(std::string_view(line).substr(c1 + 1, c2 - c1 - 1), line_no);
    const double p = detail::parse_csv_double(std::string_view(line).substr(c2 + 1), line_no);

    if (!have_block || t != current_t) {
      flush_block(line_no);
      current_t = t;
      have_block = true;
      block_start_line = line_no;
    }
    if (static_cast<int>(n) != static_cast<int>(current.size()))
      throw IoError("line " + std::to_string(line_no) + ": link index " +
                    std::to_string(static_cast<int>(n)) + " out of order, expected " +
                    std::to_string(current.size()));
    current.push_back(p);
  }
  flush_block(line_no + 1);
  if (trace.n_times() == 0) throw IoError("line " + std::to_string(line_no) + ": no data rows");
  return trace;
}

// Metrics CSV: "key,value" rows, in the order given.
inline void write_metrics_csv(const std::filesystem::path& path,
                              const std::vector<std::pair<std::string, double>>& metrics) {
  std::string out = "key,value\n";
  for (const auto& [key, value] : metrics) {
    out += key;
    out += ',';
    out += format_double(value);
    out += '\n';
  }
  write_file_atomic(path, out);
}

inline std::vector<std::pair<std::string, double>> read_metrics_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  int line_no = 0;
  std::vector<std::pair<std::string, double>> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line == "key,value")) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos)
      throw IoError("line " + std::to_string(line_no) + ": expected 'key,value'");
    out.emplace_back(line.substr(0, comma),
                     detail::parse_csv_double(std::string_view(line).substr(comma + 1), line_no));
  }
  return out;
}

}  // namespace kinklab

#endif
