#pragma once

// Hierarchical domain/intent/slot embedding model.
//
//   utterance  u = BiLSTM(embedded de-lexicalized items)
//   intent     i = act(W_intent * mean{u over sampled utterances})
//   domain     d = act(W_domain * mean{i})                       (average)
//              d = act(W_domain * max{W_pool * i + b_pool})      (max-pool)
//   scores     z = softmax(V2 * act(V1 * d + b1) + b2)
//   loss       sum over domains l of -log z[l]

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hierslu/autodiff.hpp"
#include "hierslu/corpus.hpp"
#include "hierslu/encoder.hpp"
#include "hierslu/optim.hpp"
#include "hierslu/snapshot.hpp"

namespace hierslu {

enum class Aggregator { Average, MaxPool };
enum class Activation { Tanh, Sigmoid };

inline constexpr double kLogFloor = 1e-12;

struct EmbeddingConfig {
  std::size_t k_s = 50;
  std::size_t k_i = 100;
  std::size_t k_d = 100;
  std::size_t hidden = 50;
  std::size_t samples = 8;
  // 0 means "same as k_d".
  std::size_t classifier_hidden = 0;
  Aggregator aggregator = Aggregator::Average;
  Activation activation = Activation::Tanh;
  SequencePooling pooling = SequencePooling::FinalState;

  std::size_t mlp_width() const { return classifier_hidden ? classifier_hidden : k_d; }

  void validate() const {
    if (!k_s || !k_i || !k_d || !hidden || !samples) {
      throw Error(ErrorCode::InvalidArgument, "embedding dimensions and sample count must be positive");
    }
  }
};

inline Var activate(Tape& t, Var x, Activation a) {
  return a == Activation::Tanh ? tanh(t, x) : sigmoid(t, x);
}

struct HierModel {
  EmbeddingConfig config;
  Vocab vocab;
  std::vector<std::string> domains;
  ParameterStore params;
};

// Input table rows: slots start at the mean of their words' pre-trained
// vectors, words at their own pre-trained vector; words without one get a
// seeded uniform [-0.1, 0.1] draw.
inline Tensor init_input_table(const Hierarchy& h, const Vocab& vocab, const WordVectorTable& wv,
                               Rng& rng) {
  Tensor table(vocab.size(), wv.dim);
  MissingWordVectors missing(wv.dim, rng);
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    const auto& name = vocab.names[r];
    const std::vector<double> v = h.slot_words.count(name)
                                      ? init_slot_embedding(name, h, wv, missing)
                                      : missing.lookup(wv, name);
    std::copy(v.begin(), v.end(), table.data.begin() + static_cast<std::ptrdiff_t>(r * wv.dim));
  }
  return table;
}

inline WordVectorTable resolve_word_vectors(const WordVectorTable& wv, std::size_t k_s) {
  if (wv.dim == 0) return WordVectorTable{k_s, {}};
  if (wv.dim != k_s) {
    throw Error(ErrorCode::DimensionMismatch, "word vectors have dim " + std::to_string(wv.dim) +
                                                  " but k_s is " + std::to_string(k_s));
  }
  return wv;
}

inline HierModel init_hier_model(const Hierarchy& h, const EmbeddingConfig& cfg,
                                 const WordVectorTable& word_vectors, Rng& rng) {
  cfg.validate();
  HierModel m;
  m.config = cfg;
  m.vocab = build_vocab(h);
  m.domains = h.domains;
  const auto wv = resolve_word_vectors(word_vectors, cfg.k_s);
  m.params.add("emb", init_input_table(h, m.vocab, wv, rng));
  add_bilstm_params(m.params, "enc", cfg.k_s, cfg.hidden, rng);
  m.params.add("intent.W", glorot_init(cfg.k_i, 2 * cfg.hidden, rng));
  m.params.add("domain.W", glorot_init(cfg.k_d, cfg.k_i, rng));
  if (cfg.aggregator == Aggregator::MaxPool) {
    m.params.add("pool.W", glorot_init(cfg.k_i, cfg.k_i, rng));
    m.params.add("pool.b", Tensor(cfg.k_i, 1));
  }
  const std::size_t width = cfg.mlp_width();
  m.params.add("cls.V1", glorot_init(width, cfg.k_d, rng));
  m.params.add("cls.b1", Tensor(width, 1));
  m.params.add("cls.V2", glorot_init(h.num_domains(), width, rng));
  m.params.add("cls.b2", Tensor(h.num_domains(), 1));
  return m;
}

struct HierModelVars {
  Var table;
  BiLstmVars encoder;
  Var intent_w;
  Var domain_w;
  std::optional<Var> pool_w;
  std::optional<Var> pool_b;
  Var v1, b1, v2, b2;
};

inline HierModelVars bind_hier_model(Tape& t, const HierModel& m) {
  HierModelVars v;
  v.table = t.param(m.params, "emb");
  v.encoder = bind_bilstm(t, m.params, "enc");
  v.intent_w = t.param(m.params, "intent.W");
  v.domain_w = t.param(m.params, "domain.W");
  if (m.params.contains("pool.W")) {
    v.pool_w = t.param(m.params, "pool.W");
    v.pool_b = t.param(m.params, "pool.b");
  }
  v.v1 = t.param(m.params, "cls.V1");
  v.b1 = t.param(m.params, "cls.b1");
  v.v2 = t.param(m.params, "cls.V2");
  v.b2 = t.param(m.params, "cls.b2");
  return v;
}

// Looks up every item's input-table row and runs the BiLSTM.
inline Var encode_sequence(Tape& t, Var table, const BiLstmVars& encoder, const Vocab& vocab,
                           const DelexSequence& seq, SequencePooling pooling) {
  if (seq.items.empty()) throw Error(ErrorCode::EmptySequence, "empty de-lexicalized sequence");
  std::vector<Var> xs;
  xs.reserve(seq.items.size());
  for (const auto& item : seq.items) xs.push_back(row(t, table, vocab.at(item)));
  return bilstm_encode(t, encoder, xs, pooling);
}

// act(W_intent * mean of encoded samples). `samples` overrides the configured
// sample count; anything >= the pool size uses every utterance.
inline Var intent_embedding(Tape& t, const HierModel& m, const HierModelVars& v, const Hierarchy& h,
                            const std::string& intent, Rng& rng,
                            std::optional<std::size_t> samples = std::nullopt) {
  if (!h.has_intent(intent)) throw Error(ErrorCode::UnknownIntent, intent);
  const auto& pool = h.utterances(intent);
  std::vector<Var> encoded;
  for (auto idx : sample_utterance_indices(h, intent, samples.value_or(m.config.samples), rng)) {
    encoded.push_back(encode_sequence(t, v.table, v.encoder, m.vocab, pool[idx], m.config.pooling));
  }
  return activate(t, matvec(t, v.intent_w, mean(t, encoded)), m.config.activation);
}

namespace detail {

// Orders set members by value so reductions do not depend on input order.
inline std::vector<Var> canonical_order(const Tape& t, std::span<const Var> xs) {
  std::vector<Var> out(xs.begin(), xs.end());
  std::stable_sort(out.begin(), out.end(), [&](Var a, Var b) {
    const auto& x = t.value(a).data;
    const auto& y = t.value(b).data;
    return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
  });
  return out;
}

}  // namespace detail

// act(W_domain * mean(intents)); no bias.
inline Var domain_embedding_avg(Tape& t, Var domain_w, Activation act, std::span<const Var> intents) {
  if (intents.empty()) throw Error(ErrorCode::EmptyIntentSet, "domain with no intents");
  const auto ordered = detail::canonical_order(t, intents);
  return activate(t, matvec(t, domain_w, mean(t, ordered)), act);
}

// act(W_domain * elementwise-max{W_pool * i + b_pool}).
inline Var domain_embedding_maxpool(Tape& t, Var domain_w, Var pool_w, Var pool_b, Activation act,
                                    std::span<const Var> intents) {
  if (intents.empty()) throw Error(ErrorCode::EmptyIntentSet, "domain with no intents");
  std::vector<Var> mapped;
  for (const auto& i : detail::canonical_order(t, intents)) {
    mapped.push_back(add(t, matvec(t, pool_w, i), pool_b));
  }
  return activate(t, matvec(t, domain_w, max_pool(t, mapped)), act);
}

inline Var domain_embedding(Tape& t, const HierModel& m, const HierModelVars& v,
                            std::span<const Var> intents) {
  if (m.config.aggregator == Aggregator::Average) {
    return domain_embedding_avg(t, v.domain_w, m.config.activation, intents);
  }
  return domain_embedding_maxpool(t, v.domain_w, *v.pool_w, *v.pool_b, m.config.activation, intents);
}

// softmax(V2 * act(V1 * d + b1) + b2).
inline Var classify_domain(Tape& t, Var v1, Var b1, Var v2, Var b2, Activation act, Var d) {
  const Var hidden = activate(t, add(t, matvec(t, v1, d), b1), act);
  return softmax(t, add(t, matvec(t, v2, hidden), b2));
}

inline Var classify_domain(Tape& t, const HierModel& m, const HierModelVars& v, Var d) {
  return classify_domain(t, v.v1, v.b1, v.v2, v.b2, m.config.activation, d);
}

// -log(max(z[label], 1e-12)).
inline Var domain_loss(Tape& t, Var z, std::size_t label) {
  if (label >= t.value(z).size()) {
    throw Error(ErrorCode::IndexOutOfRange, "domain label " + std::to_string(label) +
                                                " with " + std::to_string(t.value(z).size()) +
                                                " classes");
  }
  return neg(t, log(t, pick(t, z, label), kLogFloor));
}

struct ForwardResult {
  std::map<std::string, Var> intent_vars;
  std::map<std::string, Var> domain_vars;
  std::vector<Var> probability_vars;
  Var joint_loss_var;

  std::map<std::string, std::vector<double>> intent_embeddings;
  std::map<std::string, std::vector<double>> domain_embeddings;
  std::vector<std::vector<double>> probabilities;
  std::vector<double> domain_losses;
  double joint_loss = 0.0;
};

// One prediction per domain from its aggregated embedding; the joint loss is
// the sum of the per-domain losses.
inline ForwardResult joint_forward(Tape& t, const HierModel& m, const Hierarchy& h, Rng& rng,
                                   std::optional<std::size_t> samples = std::nullopt) {
  if (h.num_domains() == 0) throw Error(ErrorCode::EmptyCorpus, "empty hierarchy");
  if (h.num_domains() != m.domains.size()) {
    throw Error(ErrorCode::ShapeMismatch, "hierarchy has " + std::to_string(h.num_domains()) +
                                              " domains, model has " +
                                              std::to_string(m.domains.size()));
  }
  const auto v = bind_hier_model(t, m);
  ForwardResult r;
  std::vector<Var> losses;
  for (std::size_t l = 0; l < h.domains.size(); ++l) {
    const auto& domain = h.domains[l];
    std::vector<Var> intents;
    for (const auto& intent : h.intents_of.at(domain)) {
      const Var iv = intent_embedding(t, m, v, h, intent, rng, samples);
      r.intent_vars[intent] = iv;
      r.intent_embeddings[intent] = t.value(iv).data;
      intents.push_back(iv);
    }
    const Var d = domain_embedding(t, m, v, intents);
    const Var z = classify_domain(t, m, v, d);
    const Var loss = domain_loss(t, z, l);
    r.domain_vars[domain] = d;
    r.domain_embeddings[domain] = t.value(d).data;
    r.probability_vars.push_back(z);
    r.probabilities.push_back(t.value(z).data);
    r.domain_losses.push_back(t.value(loss)[0]);
    losses.push_back(loss);
  }
  r.joint_loss_var = sum(t, losses);
  r.joint_loss = t.value(r.joint_loss_var)[0];
  return r;
}

struct TrainOptions {
  std::size_t iterations = 1;
  // Stop early once an iteration's joint loss falls below this value.
  std::optional<double> stop_below;
  std::function<void(std::size_t, double)> on_iteration;
};

// Each iteration draws fresh utterance samples, back-propagates the joint
// loss and takes one Adam step. Returns the per-iteration loss trace.
inline std::vector<double> train(HierModel& m, const Hierarchy& h, const TrainOptions& opts,
                                 OptimizerState& opt, Rng& rng) {
  if (opts.iterations == 0) throw Error(ErrorCode::InvalidArgument, "iterations must be positive");
  std::vector<double> trace;
  m.params.zero_grad();
  for (std::size_t it = 0; it < opts.iterations; ++it) {
    Tape tape;
    const auto r = joint_forward(tape, m, h, rng);
    if (!std::isfinite(r.joint_loss)) {
      throw Error(ErrorCode::NonFiniteLoss, "joint loss is " + std::to_string(r.joint_loss) +
                                                " at iteration " + std::to_string(it));
    }
    backward(tape, r.joint_loss_var, m.params);
    adam_step(m.params, opt);
    trace.push_back(r.joint_loss);
    if (opts.on_iteration) opts.on_iteration(it, r.joint_loss);
    if (opts.stop_below && r.joint_loss < *opts.stop_below) break;
  }
  return trace;
}

inline std::vector<double> train(HierModel& m, const Hierarchy& h, std::size_t iterations,
                                 OptimizerState& opt, Rng& rng) {
  TrainOptions opts;
  opts.iterations = iterations;
  return train(m, h, opts, opt, rng);
}

inline std::vector<double> table_row(const Tensor& table, std::size_t r) {
  const auto first = table.data.begin() + static_cast<std::ptrdiff_t>(r * table.cols);
  return {first, first + static_cast<std::ptrdiff_t>(table.cols)};
}

// Appends slot and word rows of an input table, slots first, each sorted.
inline void export_input_table(EmbeddingSnapshot& snap, const Tensor& table, const Vocab& vocab,
                               const Hierarchy& h) {
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    if (h.slot_words.count(vocab.names[r])) snap.add(EntryKind::Slot, vocab.names[r], table_row(table, r));
  }
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    if (!h.slot_words.count(vocab.names[r])) snap.add(EntryKind::Word, vocab.names[r], table_row(table, r));
  }
}

// Domains, intents, slots, words. Without `samples`, every utterance of an
// intent is encoded, which makes the export deterministic.
inline EmbeddingSnapshot export_embeddings(const HierModel& m, const Hierarchy& h, Rng& rng,
                                           std::optional<std::size_t> samples = std::nullopt) {
  std::size_t all = 1;
  for (const auto& [_, pool] : h.utterances_of) all = std::max(all, pool.size());
  Tape tape;
  const auto r = joint_forward(tape, m, h, rng, samples.value_or(all));
  EmbeddingSnapshot snap;
  for (const auto& d : h.domains) snap.add(EntryKind::Domain, d, r.domain_embeddings.at(d));
  for (const auto& i : h.all_intents()) snap.add(EntryKind::Intent, i, r.intent_embeddings.at(i));
  export_input_table(snap, m.params.value("emb"), m.vocab, h);
  return snap;
}

// Class probabilities for an arbitrary domain vector under the trained
// classifier.
inline std::vector<double> domain_probabilities(const HierModel& m, const std::vector<double>& d) {
  Tape t;
  const auto v = bind_hier_model(t, m);
  if (d.size() != m.config.k_d) {
    throw Error(ErrorCode::ShapeMismatch, "domain vector length " + std::to_string(d.size()));
  }
  return t.value(classify_domain(t, m, v, t.constant(Tensor::vector(d)))).data;
}

}  // namespace hierslu
