#pragma once

// Exported embeddings: `kind:name v1 ... vk` per line.

#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "hierslu/checkpoint.hpp"
#include "hierslu/corpus.hpp"

namespace hierslu {

enum class EntryKind { Domain, Intent, Slot, Word };

inline std::string_view to_string(EntryKind k) {
  switch (k) {
    case EntryKind::Domain: return "domain";
    case EntryKind::Intent: return "intent";
    case EntryKind::Slot: return "slot";
    case EntryKind::Word: return "word";
  }
  return "?";
}

inline EntryKind parse_entry_kind(std::string_view s) {
  if (s == "domain") return EntryKind::Domain;
  if (s == "intent") return EntryKind::Intent;
  if (s == "slot") return EntryKind::Slot;
  if (s == "word") return EntryKind::Word;
  throw Error(ErrorCode::MalformedLine, "unknown entry kind '" + std::string(s) + "'");
}

struct SnapshotEntry {
  EntryKind kind;
  std::string name;
  std::vector<double> vector;

  std::string key() const { return std::string(to_string(kind)) + ":" + name; }
};

struct EmbeddingSnapshot {
  std::vector<SnapshotEntry> entries;

  void add(EntryKind kind, std::string name, std::vector<double> v) {
    entries.push_back({kind, std::move(name), std::move(v)});
  }

  const SnapshotEntry* find(std::string_view key) const {
    for (const auto& e : entries) {
      if (e.key() == key) return &e;
    }
    return nullptr;
  }

  const SnapshotEntry* find(EntryKind kind, const std::string& name) const {
    for (const auto& e : entries) {
      if (e.kind == kind && e.name == name) return &e;
    }
    return nullptr;
  }

  std::size_t count(EntryKind kind) const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.kind == kind;
    return n;
  }
};

inline void write_snapshot(std::ostream& out, const EmbeddingSnapshot& snap) {
  for (const auto& e : snap.entries) {
    out << e.key();
    for (double v : e.vector) out << ' ' << format_real(v);
    out << '\n';
  }
}

inline EmbeddingSnapshot read_snapshot(std::istream& in) {
  EmbeddingSnapshot snap;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto parts = detail::split_ws(line);
    if (parts.empty()) continue;
    const auto colon = parts[0].find(':');
    if (colon == std::string_view::npos || colon + 1 == parts[0].size()) {
      throw Error(ErrorCode::MalformedLine, "snapshot line " + std::to_string(lineno));
    }
    SnapshotEntry e{parse_entry_kind(parts[0].substr(0, colon)),
                    std::string(parts[0].substr(colon + 1)), {}};
    for (std::size_t k = 1; k < parts.size(); ++k) e.vector.push_back(parse_real(parts[k]));
    snap.entries.push_back(std::move(e));
  }
  return snap;
}

inline void save_snapshot(const std::string& path, const EmbeddingSnapshot& snap) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::UnreadableFile, "cannot write " + path);
  write_snapshot(out, snap);
}

inline EmbeddingSnapshot load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::UnreadableFile, path);
  return read_snapshot(in);
}

}  // namespace hierslu
