#pragma once

// Annotated utterance corpus: parsing, de-lexicalization, the
// domain -> intent -> slot hierarchy, vocabulary, pre-trained word vectors
// and per-intent sampling.

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hierslu/error.hpp"

namespace hierslu {

using Rng = std::mt19937_64;

inline constexpr std::string_view kOtherSlot = "other";

struct Token {
  std::string word;
  std::string slot;

  bool operator==(const Token&) const = default;
};

struct LabeledUtterance {
  std::string domain;
  std::string intent;
  std::vector<Token> tokens;

  bool operator==(const LabeledUtterance&) const = default;
};

// Literal words and slot names after de-lexicalization.
struct DelexSequence {
  std::vector<std::string> items;

  bool operator==(const DelexSequence&) const = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

// Parses `domain<TAB>intent<TAB>word;slot word;slot ...`.
inline LabeledUtterance parse_utterance_line(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto fields = detail::split(line, '\t');
  if (fields.size() != 3) {
    throw Error(ErrorCode::MalformedLine,
                "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
  }
  LabeledUtterance u;
  u.domain = std::string(detail::trim(fields[0]));
  u.intent = std::string(detail::trim(fields[1]));
  if (u.domain.empty() || u.intent.empty()) {
    throw Error(ErrorCode::MalformedLine, "empty domain or intent");
  }
  for (auto tok : detail::split_ws(fields[2])) {
    const auto sep = tok.find(';');
    if (sep == std::string_view::npos || tok.find(';', sep + 1) != std::string_view::npos) {
      throw Error(ErrorCode::MalformedLine,
                  "token '" + std::string(tok) + "' needs exactly one ';'");
    }
    Token t{std::string(tok.substr(0, sep)), std::string(tok.substr(sep + 1))};
    if (t.word.empty() || t.slot.empty()) {
      throw Error(ErrorCode::MalformedLine, "empty word or slot in '" + std::string(tok) + "'");
    }
    u.tokens.push_back(std::move(t));
  }
  if (u.tokens.empty()) throw Error(ErrorCode::MalformedLine, "empty token sequence");
  return u;
}

inline std::string format_utterance_line(const LabeledUtterance& u) {
  std::string out = u.domain + '\t' + u.intent + '\t';
  for (std::size_t i = 0; i < u.tokens.size(); ++i) {
    if (i) out += ' ';
    out += u.tokens[i].word;
    out += ';';
    out += u.tokens[i].slot;
  }
  return out;
}

// Skips blank lines and lines starting with '#'.
inline std::vector<LabeledUtterance> read_corpus(std::istream& in) {
  std::vector<LabeledUtterance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || detail::trim(line).empty()) continue;
    try {
      out.push_back(parse_utterance_line(line));
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<LabeledUtterance> read_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::UnreadableFile, path);
  return read_corpus(in);
}

inline void write_corpus(std::ostream& out, const std::vector<LabeledUtterance>& corpus) {
  for (const auto& u : corpus) out << format_utterance_line(u) << '\n';
}

// Slot-tagged words become their slot name; a run of consecutive tokens with
// the same slot collapses to a single item. "other" words pass through.
inline DelexSequence delexicalize(const std::vector<Token>& tokens) {
  if (tokens.empty()) throw Error(ErrorCode::EmptySequence, "delexicalize: no tokens");
  DelexSequence seq;
  std::string_view prev_slot;
  for (const auto& t : tokens) {
    if (t.slot == kOtherSlot) {
      seq.items.push_back(t.word);
      prev_slot = {};
    } else if (t.slot != prev_slot) {
      seq.items.push_back(t.slot);
      prev_slot = t.slot;
    }
  }
  return seq;
}

struct Hierarchy {
  std::vector<std::string> domains;
  std::map<std::string, std::vector<std::string>> intents_of;
  std::map<std::string, std::vector<std::string>> slots_of;
  std::map<std::string, std::vector<DelexSequence>> utterances_of;
  std::map<std::string, std::set<std::string>> slot_words;
  std::map<std::string, std::string> domain_of;

  std::size_t num_domains() const { return domains.size(); }

  std::size_t domain_index(const std::string& domain) const {
    const auto it = std::lower_bound(domains.begin(), domains.end(), domain);
    if (it == domains.end() || *it != domain) {
      throw Error(ErrorCode::IndexOutOfRange, "unknown domain " + domain);
    }
    return static_cast<std::size_t>(it - domains.begin());
  }

  bool has_intent(const std::string& intent) const { return domain_of.count(intent) != 0; }

  // Domain-major, each block sorted; the canonical global intent order.
  std::vector<std::string> all_intents() const {
    std::vector<std::string> out;
    for (const auto& d : domains) {
      const auto& is = intents_of.at(d);
      out.insert(out.end(), is.begin(), is.end());
    }
    return out;
  }

  std::size_t num_intents() const { return domain_of.size(); }

  const std::vector<DelexSequence>& utterances(const std::string& intent) const {
    const auto it = utterances_of.find(intent);
    if (it == utterances_of.end()) throw Error(ErrorCode::UnknownIntent, intent);
    return it->second;
  }
};

inline Hierarchy build_hierarchy(const std::vector<LabeledUtterance>& utterances) {
  if (utterances.empty()) throw Error(ErrorCode::EmptyCorpus, "no utterances");
  Hierarchy h;
  std::map<std::string, std::set<std::string>> intents;
  std::map<std::string, std::set<std::string>> slots;
  for (const auto& u : utterances) {
    const auto [it, inserted] = h.domain_of.emplace(u.intent, u.domain);
    if (!inserted && it->second != u.domain) {
      throw Error(ErrorCode::IntentInMultipleDomains,
                  "intent " + u.intent + " under both " + it->second + " and " + u.domain);
    }
    intents[u.domain].insert(u.intent);
    auto& intent_slots = slots[u.intent];
    for (const auto& t : u.tokens) {
      if (t.slot == kOtherSlot) continue;
      intent_slots.insert(t.slot);
      h.slot_words[t.slot].insert(t.word);
    }
    h.utterances_of[u.intent].push_back(delexicalize(u.tokens));
  }
  for (auto& [d, is] : intents) {
    h.domains.push_back(d);
    h.intents_of[d] = {is.begin(), is.end()};
  }
  for (auto& [i, ss] : slots) h.slots_of[i] = {ss.begin(), ss.end()};
  return h;
}

struct Vocab {
  std::unordered_map<std::string, std::size_t> id_of;
  std::vector<std::string> names;

  std::size_t size() const { return names.size(); }

  std::size_t at(const std::string& item) const {
    const auto it = id_of.find(item);
    if (it == id_of.end()) throw Error(ErrorCode::UnknownEntry, "not in vocabulary: " + item);
    return it->second;
  }

  bool contains(const std::string& item) const { return id_of.count(item) != 0; }

  static Vocab from_names(std::vector<std::string> names) {
    Vocab v;
    v.names = std::move(names);
    for (std::size_t i = 0; i < v.names.size(); ++i) v.id_of.emplace(v.names[i], i);
    return v;
  }
};

inline Vocab build_vocab(const Hierarchy& h) {
  std::set<std::string> items;
  for (const auto& [intent, seqs] : h.utterances_of) {
    for (const auto& s : seqs) items.insert(s.items.begin(), s.items.end());
  }
  return Vocab::from_names({items.begin(), items.end()});
}

struct WordVectorTable {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;

  const std::vector<double>* find(const std::string& word) const {
    const auto it = vectors.find(word);
    return it == vectors.end() ? nullptr : &it->second;
  }
};

// One `word v1 ... v_dim` entry per line; later duplicates replace earlier ones.
inline WordVectorTable read_word_vectors(std::istream& in, std::size_t dim) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "word vector dim must be positive");
  WordVectorTable table;
  table.dim = dim;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto parts = detail::split_ws(line);
    if (parts.empty()) continue;
    if (parts.size() != dim + 1) {
      throw Error(ErrorCode::DimensionMismatch,
                  "line " + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                      " values, got " + std::to_string(parts.size() - 1));
    }
    std::vector<double> v(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const std::string s(parts[k + 1]);
      char* end = nullptr;
      v[k] = std::strtod(s.c_str(), &end);
      if (end != s.c_str() + s.size()) {
        throw Error(ErrorCode::MalformedLine,
                    "line " + std::to_string(lineno) + ": bad number '" + s + "'");
      }
    }
    table.vectors[std::string(parts[0])] = std::move(v);
  }
  return table;
}

inline WordVectorTable load_word_vectors(const std::string& path, std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::UnreadableFile, path);
  return read_word_vectors(in, dim);
}

// Uniform [-0.1, 0.1] stand-ins for words without a pre-trained vector.
// Each missing word is drawn once and reused afterwards.
class MissingWordVectors {
 public:
  MissingWordVectors(std::size_t dim, Rng& rng) : dim_(dim), rng_(&rng) {}

  const std::vector<double>& get(const std::string& word) {
    auto it = cache_.find(word);
    if (it != cache_.end()) return it->second;
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    std::vector<double> v(dim_);
    for (auto& x : v) x = dist(*rng_);
    return cache_.emplace(word, std::move(v)).first->second;
  }

  const std::vector<double>& lookup(const WordVectorTable& wv, const std::string& word) {
    if (const auto* v = wv.find(word)) return *v;
    return get(word);
  }

 private:
  std::size_t dim_;
  Rng* rng_;
  std::map<std::string, std::vector<double>> cache_;
};

inline std::vector<double> init_slot_embedding(const std::string& slot, const Hierarchy& h,
                                               const WordVectorTable& wv,
                                               MissingWordVectors& missing) {
  const auto it = h.slot_words.find(slot);
  if (it == h.slot_words.end() || it->second.empty()) {
    throw Error(ErrorCode::UnknownEntry, "no words observed for slot " + slot);
  }
  std::vector<double> sum(wv.dim, 0.0);
  for (const auto& w : it->second) {
    const auto& v = missing.lookup(wv, w);
    for (std::size_t k = 0; k < wv.dim; ++k) sum[k] += v[k];
  }
  const double n = static_cast<double>(it->second.size());
  for (auto& x : sum) x /= n;
  return sum;
}

inline std::vector<double> init_slot_embedding(const std::string& slot, const Hierarchy& h,
                                               const WordVectorTable& wv, Rng& rng) {
  MissingWordVectors missing(wv.dim, rng);
  return init_slot_embedding(slot, h, wv, missing);
}

// Uniform draw without replacement of min(n, |utterances|) indices. When n
// covers the whole pool every index is returned in stored order and the
// generator is left untouched.
inline std::vector<std::size_t> sample_utterance_indices(const Hierarchy& h,
                                                         const std::string& intent,
                                                         std::size_t n, Rng& rng) {
  const auto& pool = h.utterances(intent);
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample size must be positive");
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  if (n >= idx.size()) return idx;
  const std::size_t m = std::min(n, idx.size());
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(m);
  return idx;
}

inline std::vector<DelexSequence> sample_utterances(const Hierarchy& h, const std::string& intent,
                                                    std::size_t n, Rng& rng) {
  const auto& pool = h.utterances(intent);
  std::vector<DelexSequence> out;
  for (auto i : sample_utterance_indices(h, intent, n, rng)) out.push_back(pool[i]);
  return out;
}

}  // namespace hierslu
