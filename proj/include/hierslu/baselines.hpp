#pragma once

// Comparison embedding learners that ignore the hierarchy:
//   variant 1: utterance encoding vs. a label lookup table, negative sampling
//   variant 2: softmax classifier over labels; output-layer rows are the
//              label embeddings
//   variant 3: variant 1 against the domain and intent tables jointly

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hierslu/autodiff.hpp"
#include "hierslu/corpus.hpp"
#include "hierslu/encoder.hpp"
#include "hierslu/hier_model.hpp"
#include "hierslu/optim.hpp"
#include "hierslu/snapshot.hpp"

namespace hierslu {

enum class BaselineVariant { NegativeSampling = 1, Classifier = 2, Joint = 3 };
enum class LabelTarget { Domain, Intent };

struct NegSampleConfig {
  // Number of negatives per positive; drawn uniformly from the other labels.
  std::size_t q = 4;
};

struct BaselineConfig {
  std::size_t k_s = 50;
  std::size_t hidden = 50;
  // Variant 2 hidden layer width; 0 means 2 * hidden.
  std::size_t classifier_hidden = 0;
  SequencePooling pooling = SequencePooling::FinalState;

  std::size_t encoding_dim() const { return 2 * hidden; }
  std::size_t mlp_width() const { return classifier_hidden ? classifier_hidden : 2 * hidden; }
};

struct BaselineModel {
  BaselineVariant variant = BaselineVariant::NegativeSampling;
  LabelTarget target = LabelTarget::Domain;
  BaselineConfig config;
  Vocab vocab;
  ParameterStore params;
};

// A training example: de-lexicalized utterance plus its two labels.
struct LabeledSequence {
  const DelexSequence* sequence;
  std::size_t domain;
  std::size_t intent;
};

inline std::vector<LabeledSequence> flatten_corpus(const Hierarchy& h) {
  std::vector<LabeledSequence> out;
  const auto intents = h.all_intents();
  for (std::size_t i = 0; i < intents.size(); ++i) {
    const std::size_t d = h.domain_index(h.domain_of.at(intents[i]));
    for (const auto& seq : h.utterances(intents[i])) out.push_back({&seq, d, i});
  }
  return out;
}

inline std::size_t label_count(const Hierarchy& h, LabelTarget target) {
  return target == LabelTarget::Domain ? h.num_domains() : h.num_intents();
}

inline bool uses_domain_table(const BaselineModel& m) {
  return m.variant == BaselineVariant::Joint ||
         (m.variant == BaselineVariant::NegativeSampling && m.target == LabelTarget::Domain);
}

inline bool uses_intent_table(const BaselineModel& m) {
  return m.variant == BaselineVariant::Joint ||
         (m.variant == BaselineVariant::NegativeSampling && m.target == LabelTarget::Intent);
}

inline void require_negatives(const Hierarchy& h, const BaselineModel& m, const NegSampleConfig& neg) {
  if (m.variant == BaselineVariant::Classifier) return;
  if (neg.q == 0) throw Error(ErrorCode::InvalidArgument, "q must be positive");
  const auto check = [&](LabelTarget t, const char* what) {
    const std::size_t n = label_count(h, t);
    if (neg.q + 1 > n) {
      throw Error(ErrorCode::InsufficientLabels, "q=" + std::to_string(neg.q) + " needs at least " +
                                                     std::to_string(neg.q + 1) + " " + what +
                                                     " labels, have " + std::to_string(n));
    }
  };
  if (uses_domain_table(m)) check(LabelTarget::Domain, "domain");
  if (uses_intent_table(m)) check(LabelTarget::Intent, "intent");
}

inline BaselineModel init_baseline(const Hierarchy& h, BaselineVariant variant, LabelTarget target,
                                   const BaselineConfig& cfg, const WordVectorTable& word_vectors,
                                   Rng& rng) {
  if (!cfg.k_s || !cfg.hidden) throw Error(ErrorCode::InvalidArgument, "dimensions must be positive");
  BaselineModel m;
  m.variant = variant;
  m.target = variant == BaselineVariant::Joint ? LabelTarget::Domain : target;
  m.config = cfg;
  m.vocab = build_vocab(h);
  const auto wv = resolve_word_vectors(word_vectors, cfg.k_s);
  m.params.add("emb", init_input_table(h, m.vocab, wv, rng));
  add_bilstm_params(m.params, "enc", cfg.k_s, cfg.hidden, rng);
  const std::size_t dim = cfg.encoding_dim();
  if (uses_domain_table(m)) m.params.add("domain.table", glorot_init(h.num_domains(), dim, rng));
  if (uses_intent_table(m)) m.params.add("intent.table", glorot_init(h.num_intents(), dim, rng));
  if (variant == BaselineVariant::Classifier) {
    const std::size_t width = cfg.mlp_width();
    m.params.add("cls.V1", glorot_init(width, dim, rng));
    m.params.add("cls.b1", Tensor(width, 1));
    m.params.add("cls.V2", glorot_init(label_count(h, target), width, rng));
    m.params.add("cls.b2", Tensor(label_count(h, target), 1));
  }
  return m;
}

inline Var encode_utterance(Tape& t, const BaselineModel& m, const DelexSequence& seq) {
  return encode_sequence(t, t.param(m.params, "emb"), bind_bilstm(t, m.params, "enc"), m.vocab, seq,
                         m.config.pooling);
}

// -log sigmoid(u.pos) - sum over negatives of log sigmoid(-u.neg).
inline Var neg_sampling_loss(Tape& t, Var u, Var positive, std::span<const Var> negatives) {
  if (negatives.empty()) throw Error(ErrorCode::InvalidArgument, "no negative samples");
  std::vector<Var> terms{log_sigmoid(t, dot(t, u, positive))};
  for (const auto& n : negatives) terms.push_back(log_sigmoid(t, neg(t, dot(t, u, n))));
  return neg(t, sum(t, terms));
}

// q distinct labels from [0, count) excluding `positive`, uniformly.
inline std::vector<std::size_t> draw_negatives(std::size_t count, std::size_t positive, std::size_t q,
                                               Rng& rng) {
  if (count == 0 || q + 1 > count) {
    throw Error(ErrorCode::InsufficientLabels,
                "cannot draw " + std::to_string(q) + " negatives from " + std::to_string(count) + " labels");
  }
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < count; ++i) {
    if (i != positive) pool.push_back(i);
  }
  for (std::size_t i = 0; i < q; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(q);
  return pool;
}

struct NegativeDraw {
  std::vector<std::size_t> domain;
  std::vector<std::size_t> intent;
};

inline NegativeDraw draw_example_negatives(const BaselineModel& m, const Hierarchy& h,
                                           const LabeledSequence& ex, const NegSampleConfig& neg,
                                           Rng& rng) {
  NegativeDraw d;
  if (uses_domain_table(m)) d.domain = draw_negatives(h.num_domains(), ex.domain, neg.q, rng);
  if (uses_intent_table(m)) d.intent = draw_negatives(h.num_intents(), ex.intent, neg.q, rng);
  return d;
}

inline Var table_loss(Tape& t, Var u, Var table, std::size_t positive,
                      const std::vector<std::size_t>& negatives) {
  std::vector<Var> negs;
  for (auto n : negatives) negs.push_back(row(t, table, n));
  return neg_sampling_loss(t, u, row(t, table, positive), negs);
}

// Loss of one example under the model's variant. Negatives are only read by
// variants 1 and 3.
inline Var baseline_example_loss(Tape& t, const BaselineModel& m, const LabeledSequence& ex,
                                 const NegativeDraw& negatives) {
  const Var u = encode_utterance(t, m, *ex.sequence);
  switch (m.variant) {
    case BaselineVariant::NegativeSampling:
      return m.target == LabelTarget::Domain
                 ? table_loss(t, u, t.param(m.params, "domain.table"), ex.domain, negatives.domain)
                 : table_loss(t, u, t.param(m.params, "intent.table"), ex.intent, negatives.intent);
    case BaselineVariant::Classifier: {
      const Var z = classify_domain(t, t.param(m.params, "cls.V1"), t.param(m.params, "cls.b1"),
                                    t.param(m.params, "cls.V2"), t.param(m.params, "cls.b2"),
                                    Activation::Tanh, u);
      return domain_loss(t, z, m.target == LabelTarget::Domain ? ex.domain : ex.intent);
    }
    case BaselineVariant::Joint: {
      const Var ld = table_loss(t, u, t.param(m.params, "domain.table"), ex.domain, negatives.domain);
      const Var li = table_loss(t, u, t.param(m.params, "intent.table"), ex.intent, negatives.intent);
      const std::vector<Var> parts{ld, li};
      return sum(t, parts);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown baseline variant");
}

// One random labeled utterance per iteration, one Adam step on its loss.
inline std::vector<double> train_baseline(BaselineModel& m, const Hierarchy& h,
                                          const NegSampleConfig& neg, std::size_t iterations,
                                          OptimizerState& opt, Rng& rng) {
  if (iterations == 0) throw Error(ErrorCode::InvalidArgument, "iterations must be positive");
  require_negatives(h, m, neg);
  const auto examples = flatten_corpus(h);
  std::uniform_int_distribution<std::size_t> pick(0, examples.size() - 1);
  std::vector<double> trace;
  m.params.zero_grad();
  for (std::size_t it = 0; it < iterations; ++it) {
    const auto& ex = examples[pick(rng)];
    const auto negatives = draw_example_negatives(m, h, ex, neg, rng);
    Tape tape;
    const Var loss = baseline_example_loss(tape, m, ex, negatives);
    const double value = tape.value(loss)[0];
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::NonFiniteLoss, "baseline loss at iteration " + std::to_string(it));
    }
    backward(tape, loss, m.params);
    adam_step(m.params, opt);
    trace.push_back(value);
  }
  return trace;
}

struct BaselineRun {
  BaselineModel model;
  std::vector<double> trace;
};

inline BaselineRun train_baseline1(const Hierarchy& h, LabelTarget target, const NegSampleConfig& neg,
                                   std::size_t iterations, OptimizerState& opt, Rng& rng,
                                   const BaselineConfig& cfg = {}, const WordVectorTable& wv = {}) {
  BaselineRun run{init_baseline(h, BaselineVariant::NegativeSampling, target, cfg, wv, rng), {}};
  run.trace = train_baseline(run.model, h, neg, iterations, opt, rng);
  return run;
}

inline BaselineRun train_baseline2(const Hierarchy& h, LabelTarget target, std::size_t iterations,
                                   OptimizerState& opt, Rng& rng, const BaselineConfig& cfg = {},
                                   const WordVectorTable& wv = {}) {
  BaselineRun run{init_baseline(h, BaselineVariant::Classifier, target, cfg, wv, rng), {}};
  run.trace = train_baseline(run.model, h, {}, iterations, opt, rng);
  return run;
}

inline BaselineRun train_baseline3(const Hierarchy& h, const NegSampleConfig& neg, std::size_t iterations,
                                   OptimizerState& opt, Rng& rng, const BaselineConfig& cfg = {},
                                   const WordVectorTable& wv = {}) {
  BaselineRun run{init_baseline(h, BaselineVariant::Joint, LabelTarget::Domain, cfg, wv, rng), {}};
  run.trace = train_baseline(run.model, h, neg, iterations, opt, rng);
  return run;
}

// Mean example loss over the whole corpus with negatives drawn from a fixed
// seed, so values before and after training are comparable.
inline double baseline_corpus_loss(const BaselineModel& m, const Hierarchy& h,
                                   const NegSampleConfig& neg, std::uint64_t seed) {
  require_negatives(h, m, neg);
  Rng rng(seed);
  const auto examples = flatten_corpus(h);
  double total = 0.0;
  for (const auto& ex : examples) {
    const auto negatives = draw_example_negatives(m, h, ex, neg, rng);
    Tape tape;
    total += tape.value(baseline_example_loss(tape, m, ex, negatives))[0];
  }
  return total / static_cast<double>(examples.size());
}

// Training-set accuracy of the variant 2 classifier.
inline double baseline_accuracy(const BaselineModel& m, const Hierarchy& h) {
  if (m.variant != BaselineVariant::Classifier) {
    throw Error(ErrorCode::InvalidArgument, "accuracy is defined for the classifier baseline only");
  }
  const auto examples = flatten_corpus(h);
  std::size_t correct = 0;
  for (const auto& ex : examples) {
    Tape t;
    const Var u = encode_utterance(t, m, *ex.sequence);
    const Var z = classify_domain(t, t.param(m.params, "cls.V1"), t.param(m.params, "cls.b1"),
                                  t.param(m.params, "cls.V2"), t.param(m.params, "cls.b2"),
                                  Activation::Tanh, u);
    const auto& p = t.value(z).data;
    const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    correct += best == (m.target == LabelTarget::Domain ? ex.domain : ex.intent);
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

// Output layer is stored classes x hidden; label p's embedding is row p,
// i.e. column p of the (hidden x classes) layout.
inline std::vector<std::vector<double>> extract_label_embeddings(const BaselineModel& m) {
  const auto& v2 = m.params.value("cls.V2");
  std::vector<std::vector<double>> out;
  for (std::size_t p = 0; p < v2.rows; ++p) out.push_back(table_row(v2, p));
  return out;
}

inline EmbeddingSnapshot export_baseline(const BaselineModel& m, const Hierarchy& h) {
  EmbeddingSnapshot snap;
  const auto intents = h.all_intents();
  if (m.variant == BaselineVariant::Classifier) {
    const auto labels = extract_label_embeddings(m);
    const auto& names = m.target == LabelTarget::Domain ? h.domains : intents;
    const auto kind = m.target == LabelTarget::Domain ? EntryKind::Domain : EntryKind::Intent;
    for (std::size_t p = 0; p < names.size(); ++p) snap.add(kind, names[p], labels.at(p));
  } else {
    if (uses_domain_table(m)) {
      const auto& table = m.params.value("domain.table");
      for (std::size_t d = 0; d < h.domains.size(); ++d) snap.add(EntryKind::Domain, h.domains[d], table_row(table, d));
    }
    if (uses_intent_table(m)) {
      const auto& table = m.params.value("intent.table");
      for (std::size_t i = 0; i < intents.size(); ++i) snap.add(EntryKind::Intent, intents[i], table_row(table, i));
    }
  }
  export_input_table(snap, m.params.value("emb"), m.vocab, h);
  return snap;
}

}  // namespace hierslu
