#pragma once

// Parameter checkpoints: one `name rows cols v1 v2 ...` line per parameter,
// values with 17 significant digits so a write/read cycle is bit-exact.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "hierslu/corpus.hpp"
#include "hierslu/tensor.hpp"

namespace hierslu {

inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_real(std::string_view s) {
  const std::string str(s);
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (str.empty() || end != str.c_str() + str.size()) {
    throw Error(ErrorCode::MalformedLine, "bad number '" + str + "'");
  }
  return v;
}

inline void write_checkpoint(std::ostream& out, const ParameterStore& store) {
  for (const auto& [name, t] : store.params()) {
    out << name << ' ' << t.rows << ' ' << t.cols;
    for (double v : t.data) out << ' ' << format_real(v);
    out << '\n';
  }
}

inline ParameterStore read_checkpoint(std::istream& in) {
  ParameterStore store;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto parts = detail::split_ws(line);
    if (parts.empty()) continue;
    if (parts.size() < 3) {
      throw Error(ErrorCode::MalformedLine, "checkpoint line " + std::to_string(lineno));
    }
    const auto rows = static_cast<std::size_t>(std::stoull(std::string(parts[1])));
    const auto cols = static_cast<std::size_t>(std::stoull(std::string(parts[2])));
    if (parts.size() != 3 + rows * cols) {
      throw Error(ErrorCode::DimensionMismatch,
                  "checkpoint line " + std::to_string(lineno) + ": " + std::string(parts[0]));
    }
    Tensor t(rows, cols);
    for (std::size_t k = 0; k < t.size(); ++k) t.data[k] = parse_real(parts[3 + k]);
    store.add(std::string(parts[0]), std::move(t));
  }
  return store;
}

inline void save_checkpoint(const std::string& path, const ParameterStore& store) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::UnreadableFile, "cannot write " + path);
  write_checkpoint(out, store);
}

inline ParameterStore load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::UnreadableFile, path);
  return read_checkpoint(in);
}

}  // namespace hierslu
