#pragma once

// Finite-difference checks of every trainable loss on a tiny corpus:
// 2 domains x 2 intents x <= 3 utterances of length <= 4, k_s = h = 3,
// k_i = k_d = 4, every utterance used per intent.

#include <sstream>
#include <string>
#include <vector>

#include "hierslu/baselines.hpp"
#include "hierslu/corpus.hpp"
#include "hierslu/gradcheck.hpp"
#include "hierslu/hier_model.hpp"

namespace hierslu {

inline constexpr double kGradCheckEps = 1e-5;
inline constexpr double kGradCheckTol = 1e-4;

inline std::vector<LabeledUtterance> tiny_corpus() {
  static constexpr const char* kLines =
      "Music\tPlayMusic\tplay;other thriller;song\n"
      "Music\tPlayMusic\tplay;other bad;song now;other\n"
      "Music\tPlayMusic\tplay;other michael;artist jackson;artist\n"
      "Music\tStopMusic\tstop;other thriller;song\n"
      "Music\tStopMusic\tstop;other now;other\n"
      "Phone\tCall\tcall;other bob;person\n"
      "Phone\tCall\tcall;other alice;person please;other now;other\n"
      "Phone\tText\ttext;other bob;person now;other\n"
      "Phone\tText\ttext;other alice;person hello;message\n"
      "Phone\tText\tsend;other hi;message to;other bob;person\n";
  std::istringstream in(kLines);
  return read_corpus(in);
}

inline EmbeddingConfig tiny_config(Aggregator agg, Activation act = Activation::Tanh) {
  EmbeddingConfig c;
  c.k_s = 3;
  c.hidden = 3;
  c.k_i = 4;
  c.k_d = 4;
  c.samples = 1000;
  c.aggregator = agg;
  c.activation = act;
  return c;
}

inline BaselineConfig tiny_baseline_config() {
  BaselineConfig c;
  c.k_s = 3;
  c.hidden = 3;
  c.classifier_hidden = 4;
  return c;
}

struct NamedGradCheck {
  std::string name;
  GradCheckReport report;
};

inline GradCheckReport gradcheck_hier(const Hierarchy& h, const EmbeddingConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  HierModel m = init_hier_model(h, cfg, {}, rng);
  // Every utterance is used, so the generator is never consulted.
  const TapedLoss f = [&](Tape& t, const ParameterStore&) {
    Rng unused(0);
    return joint_forward(t, m, h, unused).joint_loss_var;
  };
  return check_gradients(f, m.params, kGradCheckEps, kGradCheckTol);
}

inline GradCheckReport gradcheck_baseline(const Hierarchy& h, BaselineVariant variant, LabelTarget target,
                                          std::size_t q, std::uint64_t seed) {
  Rng rng(seed);
  BaselineModel m = init_baseline(h, variant, target, tiny_baseline_config(), {}, rng);
  const NegSampleConfig neg{q};
  const auto examples = flatten_corpus(h);
  const std::vector<LabeledSequence> picked{examples.front(), examples[examples.size() / 2],
                                            examples.back()};
  std::vector<NegativeDraw> negatives;
  for (const auto& ex : picked) {
    negatives.push_back(variant == BaselineVariant::Classifier ? NegativeDraw{}
                                                               : draw_example_negatives(m, h, ex, neg, rng));
  }
  const TapedLoss f = [&](Tape& t, const ParameterStore&) {
    std::vector<Var> losses;
    for (std::size_t i = 0; i < picked.size(); ++i) {
      losses.push_back(baseline_example_loss(t, m, picked[i], negatives[i]));
    }
    return sum(t, losses);
  };
  return check_gradients(f, m.params, kGradCheckEps, kGradCheckTol);
}

inline std::vector<NamedGradCheck> run_gradcheck_suite() {
  const Hierarchy h = build_hierarchy(tiny_corpus());
  return {
      {"hierarchical/avg/tanh", gradcheck_hier(h, tiny_config(Aggregator::Average), 11)},
      {"hierarchical/maxpool/tanh", gradcheck_hier(h, tiny_config(Aggregator::MaxPool), 12)},
      {"baseline1/domain", gradcheck_baseline(h, BaselineVariant::NegativeSampling, LabelTarget::Domain, 1, 21)},
      {"baseline1/intent", gradcheck_baseline(h, BaselineVariant::NegativeSampling, LabelTarget::Intent, 3, 22)},
      {"baseline2/domain", gradcheck_baseline(h, BaselineVariant::Classifier, LabelTarget::Domain, 1, 23)},
      {"baseline2/intent", gradcheck_baseline(h, BaselineVariant::Classifier, LabelTarget::Intent, 1, 24)},
      {"baseline3/joint", gradcheck_baseline(h, BaselineVariant::Joint, LabelTarget::Domain, 1, 25)},
  };
}

}  // namespace hierslu
