#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "hierslu/gradcheck_suite.hpp"
#include "hierslu/metrics.hpp"
#include "hierslu/model_io.hpp"
#include "hierslu/synth.hpp"

namespace hierslu {
namespace {

std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("hierslu_eval_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

TEST(Synth, DefaultCounts) {
  const auto corpus = synth_generate(SynthSpec{});
  EXPECT_EQ(corpus.size(), 1200u);
  const auto h = build_hierarchy(corpus);
  EXPECT_EQ(h.num_domains(), 4u);
  EXPECT_EQ(h.num_intents(), 12u);
  std::size_t slots = 0;
  for (const auto& [_, s] : h.slots_of) slots += s.size();
  EXPECT_EQ(slots, 24u);
  for (const auto& u : corpus) {
    EXPECT_GE(u.tokens.size(), 3u);
    EXPECT_LE(u.tokens.size(), 6u);
  }
}

TEST(Synth, SeededAndDistinctAcrossSeeds) {
  SynthSpec a, b;
  b.seed = 14;
  EXPECT_EQ(synth_generate(a), synth_generate(a));
  EXPECT_NE(synth_generate(a), synth_generate(b));
}

TEST(Synth, WriteReadCycle) {
  const auto corpus = synth_generate(SynthSpec{});
  std::stringstream io;
  write_corpus(io, corpus);
  EXPECT_EQ(read_corpus(io), corpus);
}

TEST(Synth, BagOfSlotsIdentifiesDomain) {
  const auto corpus = synth_generate(SynthSpec{});
  std::size_t correct = 0;
  for (const auto& u : corpus) {
    std::map<std::string, int> votes;
    for (const auto& t : u.tokens) {
      if (t.slot != kOtherSlot) ++votes["domain" + t.slot.substr(5, 2)];
    }
    ASSERT_FALSE(votes.empty());
    const auto best = std::max_element(votes.begin(), votes.end(),
                                       [](const auto& x, const auto& y) { return x.second < y.second; });
    correct += best->first == u.domain;
  }
  EXPECT_EQ(correct, corpus.size());
}

TEST(Synth, RejectsBadSpec) {
  SynthSpec s;
  s.min_len = 5;
  s.max_len = 2;
  EXPECT_THROW(synth_generate(s), Error);
}

TEST(Cosine, Values) {
  EXPECT_DOUBLE_EQ(cosine({1, 0}, {0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(cosine({1, 2}, {2, 4}), 1.0);
  EXPECT_DOUBLE_EQ(cosine({1, 2}, {-1, -2}), -1.0);
  EXPECT_EQ(cosine({0, 0}, {1, 2}), 0.0);
  EXPECT_THROW(cosine({1}, {1, 2}), Error);
}

Hierarchy two_by_two() {
  std::istringstream in("A\ta1\tx;other\nA\ta2\tx;other\nB\tb1\tx;other\nB\tb2\tx;other\n");
  return build_hierarchy(read_corpus(in));
}

std::vector<double> one_hot(std::size_t n, std::size_t k) {
  std::vector<double> v(n, 0.0);
  v[k] = 1.0;
  return v;
}

TEST(Separation, OrthogonalDomains) {
  const auto h = two_by_two();
  EmbeddingSnapshot s;
  s.add(EntryKind::Intent, "a1", {1, 0.1});
  s.add(EntryKind::Intent, "a2", {1, 0.0});
  s.add(EntryKind::Intent, "b1", {0, 1});
  s.add(EntryKind::Intent, "b2", {0.1, 1});
  s.add(EntryKind::Domain, "A", {1, 0});
  s.add(EntryKind::Domain, "B", {0, 1});
  const auto r = separation_report(s, h, [](const std::vector<double>& d) { return d; });
  const double c = 1.0 / std::sqrt(1.01);
  EXPECT_NEAR(r.intra_cosine, c, 1e-15);
  EXPECT_NEAR(r.inter_cosine, (0.1 / std::sqrt(1.01) + 0.0 + 0.2 / 1.01 + 0.1 / std::sqrt(1.01)) / 4.0, 1e-15);
  EXPECT_DOUBLE_EQ(r.margin, r.intra_cosine - r.inter_cosine);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.joint_loss, 0.0);
}

TEST(Separation, DegenerateIdenticalEmbeddings) {
  const auto h = two_by_two();
  EmbeddingSnapshot s;
  for (const auto* i : {"a1", "a2", "b1", "b2"}) s.add(EntryKind::Intent, i, {0.3, 0.3});
  s.add(EntryKind::Domain, "A", {1, 1});
  s.add(EntryKind::Domain, "B", {1, 1});
  const auto r = separation_report(s, h, [](const std::vector<double>&) { return std::vector<double>{0.5, 0.5}; });
  EXPECT_DOUBLE_EQ(r.margin, 0.0);
  EXPECT_EQ(r.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(r.joint_loss, 1.3862943611198906);
}

TEST(Separation, SingleIntentDomainsHaveNoIntraPairs) {
  std::istringstream in("A\ta1\tx;other\nB\tb1\tx;other\n");
  const auto h = build_hierarchy(read_corpus(in));
  EmbeddingSnapshot s;
  s.add(EntryKind::Intent, "a1", {1, 0});
  s.add(EntryKind::Intent, "b1", {1, 1});
  s.add(EntryKind::Domain, "A", one_hot(2, 0));
  s.add(EntryKind::Domain, "B", one_hot(2, 1));
  const auto r = separation_report(s, h, [](const std::vector<double>& d) { return d; });
  EXPECT_EQ(r.intra_cosine, 0.0);
  EXPECT_NEAR(r.inter_cosine, 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Separation, MissingEmbedding) {
  const auto h = two_by_two();
  EmbeddingSnapshot s;
  s.add(EntryKind::Intent, "a1", {1, 0});
  try {
    separation_report(s, h, [](const std::vector<double>& d) { return d; });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingEmbedding);
  }
}

EmbeddingSnapshot neighbor_snapshot() {
  EmbeddingSnapshot s;
  s.add(EntryKind::Intent, "q", {1, 0});
  s.add(EntryKind::Intent, "dup", {1, 0});
  s.add(EntryKind::Intent, "near", {1, 0.5});
  s.add(EntryKind::Word, "ortho", {0, 1});
  s.add(EntryKind::Word, "anti", {-1, 0});
  s.add(EntryKind::Word, "ortho2", {0, -3});
  s.add(EntryKind::Slot, "other_dim", {1, 0, 0});
  return s;
}

TEST(Neighbors, RankedByCosine) {
  const auto n = nearest_neighbors(neighbor_snapshot(), "intent:q", 10);
  ASSERT_EQ(n.size(), 5u);
  EXPECT_EQ(n[0].key, "intent:dup");
  EXPECT_EQ(n[0].cosine, 1.0);
  EXPECT_EQ(n[1].key, "intent:near");
  EXPECT_EQ(n[2].key, "word:ortho");
  EXPECT_EQ(n[3].key, "word:ortho2");
  EXPECT_EQ(n[4].key, "word:anti");
  for (std::size_t k = 1; k < n.size(); ++k) EXPECT_GE(n[k - 1].cosine, n[k].cosine);
}

TEST(Neighbors, ClampAndErrors) {
  const auto s = neighbor_snapshot();
  EXPECT_EQ(nearest_neighbors(s, "intent:q", 2).size(), 2u);
  EXPECT_TRUE(nearest_neighbors(s, "slot:other_dim", 3).empty());
  try {
    nearest_neighbors(s, "intent:zzz", 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownEntry);
  }
  EXPECT_THROW(nearest_neighbors(s, "intent:q", 0), Error);
}

TEST(Snapshot, WriteReadCycle) {
  auto s = neighbor_snapshot();
  s.add(EntryKind::Domain, "x", {1.0 / 3.0, -1e-300});
  std::stringstream io;
  write_snapshot(io, s);
  const auto back = read_snapshot(io);
  ASSERT_EQ(back.entries.size(), s.entries.size());
  for (std::size_t k = 0; k < s.entries.size(); ++k) {
    EXPECT_EQ(back.entries[k].key(), s.entries[k].key());
    EXPECT_EQ(back.entries[k].vector, s.entries[k].vector);
  }
}

TEST(Snapshot, RejectsMalformed) {
  std::istringstream bad_kind("thing:x 1 2\n");
  EXPECT_THROW(read_snapshot(bad_kind), Error);
  std::istringstream no_colon("intent 1 2\n");
  EXPECT_THROW(read_snapshot(no_colon), Error);
}

TEST(ModelIo, HierarchicalRoundTrip) {
  const auto corpus = tiny_corpus();
  const auto h = build_hierarchy(corpus);
  Rng rng(3);
  auto cfg = tiny_config(Aggregator::MaxPool);
  cfg.pooling = SequencePooling::MeanState;
  const auto m = init_hier_model(h, cfg, {}, rng);
  const auto dir = temp_dir("hier");
  save_hier_model(dir, m, corpus, {1.5, 0.5});
  const auto loaded = load_model(dir);
  const auto& back = std::get<HierModel>(loaded.model);
  EXPECT_EQ(back.config.aggregator, Aggregator::MaxPool);
  EXPECT_EQ(back.config.pooling, SequencePooling::MeanState);
  EXPECT_EQ(back.config.samples, cfg.samples);
  EXPECT_EQ(back.domains, m.domains);
  EXPECT_EQ(back.vocab.names, m.vocab.names);
  EXPECT_EQ(back.params.params(), m.params.params());
  EXPECT_EQ(loaded.corpus, corpus);
  Rng a(1), b(1);
  const auto ra = separation_report(export_embeddings(m, h, a), h, m);
  const auto rb = separation_report(export_embeddings(back, loaded.hierarchy, b), loaded.hierarchy, back);
  EXPECT_EQ(ra.margin, rb.margin);
  EXPECT_EQ(ra.joint_loss, rb.joint_loss);
  std::filesystem::remove_all(dir);
}

TEST(ModelIo, BaselineRoundTrip) {
  const auto corpus = tiny_corpus();
  const auto h = build_hierarchy(corpus);
  Rng rng(3);
  const auto m = init_baseline(h, BaselineVariant::Classifier, LabelTarget::Intent, tiny_baseline_config(), {}, rng);
  const auto dir = temp_dir("baseline");
  save_baseline_model(dir, m, {2}, corpus, {1.0});
  const auto back = std::get<BaselineModel>(load_model(dir).model);
  EXPECT_EQ(back.variant, BaselineVariant::Classifier);
  EXPECT_EQ(back.target, LabelTarget::Intent);
  EXPECT_EQ(back.config.mlp_width(), 4u);
  EXPECT_EQ(back.params.params(), m.params.params());
  std::filesystem::remove_all(dir);
}

TEST(ModelIo, MissingDirectory) {
  try {
    load_model(temp_dir("absent"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnreadableFile);
  }
}

}  // namespace
}  // namespace hierslu
