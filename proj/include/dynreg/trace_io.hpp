#ifndef DYNREG_TRACE_IO_HPP
#define DYNREG_TRACE_IO_HPP

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynreg/metrics.hpp"

namespace dynreg {

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 17 significant digits in fixed-width scientific notation; strtod reads it back exactly.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline double parse_real(const std::string& field, std::size_t line) {
  const char* begin = field.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (field.empty() || end != begin + field.size() || errno == ERANGE) {
    throw TraceFormatError("trace line " + std::to_string(line) + ": bad number '" + field + "'");
  }
  return v;
}

inline std::string trace_header(Index dimension) {
  std::string h = "t";
  for (Index i = 0; i < dimension; ++i) h += ",x_hat_" + std::to_string(i);
  for (Index i = 0; i < dimension; ++i) h += ",x_star_" + std::to_string(i);
  h += ",f_value,f_min,dist_before,dist_after,grad_at_min_norm,degraded";
  return h;
}

/// x_star columns hold the comparator minimizers (the scenario's, when attached).
inline std::string write_trace_csv(const ExperimentTrace& trace) {
  std::ostringstream out;
  const Index n = trace.rounds.empty() ? 0 : trace.rounds.front().action.size();
  const auto stars = trace.comparator_points();
  out << trace_header(n) << '\n';
  for (std::size_t i = 0; i < trace.rounds.size(); ++i) {
    const auto& r = trace.rounds[i];
    out << r.t;
    for (Index k = 0; k < n; ++k) out << ',' << format_real(r.action[k]);
    for (Index k = 0; k < n; ++k) out << ',' << format_real(stars[i][k]);
    out << ',' << format_real(r.cost_value) << ',' << format_real(r.min_value) << ',' << format_real(r.dist_before)
        << ',' << format_real(r.dist_after) << ',' << format_real(r.grad_at_min_norm) << ',' << (r.degraded ? 1 : 0)
        << '\n';
  }
  return out.str();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline ExperimentTrace parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw TraceFormatError("trace: empty file");
  const auto header = split_csv_line(line);
  Index n = 0;
  while (static_cast<std::size_t>(n + 1) < header.size() && header[static_cast<std::size_t>(n + 1)].starts_with("x_hat_")) ++n;
  if (line != trace_header(n)) throw TraceFormatError("trace: unexpected header");
  const std::size_t width = 1 + 2 * static_cast<std::size_t>(n) + 6;

  ExperimentTrace trace;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != width) {
      throw TraceFormatError("trace line " + std::to_string(lineno) + ": expected " + std::to_string(width) +
                             " fields, got " + std::to_string(f.size()));
    }
    RoundOutcome r;
    const double t = parse_real(f[0], lineno);
    r.t = static_cast<std::int64_t>(t);
    if (static_cast<double>(r.t) != t || r.t != static_cast<std::int64_t>(trace.rounds.size()) + 1)
      throw TraceFormatError("trace line " + std::to_string(lineno) + ": rounds must be numbered 1..T");
    r.action.resize(n);
    r.target.resize(n);
    std::size_t k = 1;
    for (Index i = 0; i < n; ++i) r.action[i] = parse_real(f[k++], lineno);
    for (Index i = 0; i < n; ++i) r.target[i] = parse_real(f[k++], lineno);
    r.cost_value = parse_real(f[k++], lineno);
    r.min_value = parse_real(f[k++], lineno);
    r.dist_before = parse_real(f[k++], lineno);
    r.dist_after = parse_real(f[k++], lineno);
    r.grad_at_min_norm = parse_real(f[k++], lineno);
    if (f[k] != "0" && f[k] != "1") throw TraceFormatError("trace line " + std::to_string(lineno) + ": degraded must be 0 or 1");
    r.degraded = f[k] == "1";
    trace.minimizers.push_back(r.target);
    trace.rounds.push_back(std::move(r));
  }
  if (trace.rounds.empty()) throw TraceFormatError("trace: no rounds");
  return trace;
}

/// Write-temp-then-rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace dynreg

#endif  // DYNREG_TRACE_IO_HPP
