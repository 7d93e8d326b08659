#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hierslu/corpus.hpp"
#include "hierslu/hier_model.hpp"
#include "hierslu/snapshot.hpp"

namespace hierslu {

// Zero when either vector has zero norm.
inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::ShapeMismatch, "cosine of vectors with lengths " + std::to_string(a.size()) +
                                              " and " + std::to_string(b.size()));
  }
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

struct SeparationReport {
  double intra_cosine = 0.0;
  double inter_cosine = 0.0;
  double margin = 0.0;
  double accuracy = 0.0;
  double joint_loss = 0.0;
};

using DomainClassifier = std::function<std::vector<double>(const std::vector<double>&)>;

// Mean cosine over same-domain and cross-domain intent pairs (an empty pair
// set contributes 0), plus how many domain vectors the classifier maps to
// their own label.
inline SeparationReport separation_report(const EmbeddingSnapshot& snap, const Hierarchy& h,
                                          const DomainClassifier& classify) {
  const auto require = [&](EntryKind kind, const std::string& name) -> const std::vector<double>& {
    const auto* e = snap.find(kind, name);
    if (!e) throw Error(ErrorCode::MissingEmbedding, std::string(to_string(kind)) + ":" + name);
    return e->vector;
  };
  const auto intents = h.all_intents();
  std::vector<const std::vector<double>*> vecs;
  for (const auto& i : intents) vecs.push_back(&require(EntryKind::Intent, i));

  double intra = 0.0, inter = 0.0;
  std::size_t n_intra = 0, n_inter = 0;
  for (std::size_t a = 0; a < intents.size(); ++a) {
    for (std::size_t b = a + 1; b < intents.size(); ++b) {
      const double c = cosine(*vecs[a], *vecs[b]);
      if (h.domain_of.at(intents[a]) == h.domain_of.at(intents[b])) {
        intra += c;
        ++n_intra;
      } else {
        inter += c;
        ++n_inter;
      }
    }
  }
  SeparationReport r;
  r.intra_cosine = n_intra ? intra / static_cast<double>(n_intra) : 0.0;
  r.inter_cosine = n_inter ? inter / static_cast<double>(n_inter) : 0.0;
  r.margin = r.intra_cosine - r.inter_cosine;

  std::size_t correct = 0;
  for (std::size_t l = 0; l < h.domains.size(); ++l) {
    const auto z = classify(require(EntryKind::Domain, h.domains[l]));
    if (z.size() != h.domains.size()) {
      throw Error(ErrorCode::ShapeMismatch, "classifier returned " + std::to_string(z.size()) + " scores");
    }
    const auto best = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
    correct += best == l;
    r.joint_loss -= std::log(std::max(z[l], kLogFloor));
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(h.domains.size());
  return r;
}

inline SeparationReport separation_report(const EmbeddingSnapshot& snap, const Hierarchy& h,
                                          const HierModel& m) {
  return separation_report(snap, h, [&](const std::vector<double>& d) { return domain_probabilities(m, d); });
}

struct Neighbor {
  std::string key;
  double cosine;
};

// Top-k entries by cosine to `query`, excluding the query itself and
// entries of a different dimension. Ties are broken by key.
inline std::vector<Neighbor> nearest_neighbors(const EmbeddingSnapshot& snap, const std::string& query,
                                               std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  const auto* q = snap.find(query);
  if (!q) throw Error(ErrorCode::UnknownEntry, query);
  std::vector<Neighbor> out;
  for (const auto& e : snap.entries) {
    const auto key = e.key();
    if (key == query || e.vector.size() != q->vector.size()) continue;
    out.push_back({key, cosine(q->vector, e.vector)});
  }
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.cosine != b.cosine ? a.cosine > b.cosine : a.key < b.key;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

}  // namespace hierslu
