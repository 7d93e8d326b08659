#pragma once

// Synthetic corpora with a planted, recoverable hierarchy: intents own
// disjoint slots, slots own disjoint word pools, and filler words tagged
// "other" are shared across the whole corpus.

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "hierslu/corpus.hpp"

namespace hierslu {

struct SynthSpec {
  std::size_t n_domains = 4;
  std::size_t intents_per_domain = 3;
  std::size_t slots_per_intent = 2;
  std::size_t utterances_per_intent = 100;
  std::size_t carrier_vocab_size = 60;
  std::size_t words_per_slot = 5;
  std::size_t min_len = 3;
  std::size_t max_len = 6;
  std::uint64_t seed = 13;

  void validate() const {
    if (!n_domains || !intents_per_domain || !slots_per_intent || !utterances_per_intent ||
        !carrier_vocab_size || !words_per_slot || !min_len || max_len < min_len) {
      throw Error(ErrorCode::InvalidArgument, "synthetic spec values must be positive, min_len <= max_len");
    }
  }
};

namespace detail {

inline std::string padded(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%02zu", i);
  return buf;
}

}  // namespace detail

inline std::string synth_domain_name(std::size_t d) { return "domain" + detail::padded(d); }

inline std::string synth_intent_name(std::size_t d, std::size_t i) {
  return synth_domain_name(d) + "_intent" + detail::padded(i);
}

inline std::string synth_slot_name(std::size_t d, std::size_t i, std::size_t s) {
  return "slot_" + detail::padded(d) + "_" + detail::padded(i) + "_" + detail::padded(s);
}

// Each position is a slot-tagged word or a filler word with equal chance;
// every utterance carries at least one slot word.
inline std::vector<LabeledUtterance> synth_generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::uniform_int_distribution<std::size_t> len_dist(spec.min_len, spec.max_len);
  std::uniform_int_distribution<std::size_t> filler_dist(0, spec.carrier_vocab_size - 1);
  std::uniform_int_distribution<std::size_t> slot_dist(0, spec.slots_per_intent - 1);
  std::uniform_int_distribution<std::size_t> word_dist(0, spec.words_per_slot - 1);
  std::bernoulli_distribution is_slot(0.5);

  std::vector<LabeledUtterance> out;
  out.reserve(spec.n_domains * spec.intents_per_domain * spec.utterances_per_intent);
  for (std::size_t d = 0; d < spec.n_domains; ++d) {
    for (std::size_t i = 0; i < spec.intents_per_domain; ++i) {
      for (std::size_t u = 0; u < spec.utterances_per_intent; ++u) {
        LabeledUtterance utt{synth_domain_name(d), synth_intent_name(d, i), {}};
        const std::size_t len = len_dist(rng);
        std::vector<bool> slotted(len);
        bool any = false;
        for (std::size_t p = 0; p < len; ++p) any |= (slotted[p] = is_slot(rng));
        if (!any) slotted[std::uniform_int_distribution<std::size_t>(0, len - 1)(rng)] = true;
        for (std::size_t p = 0; p < len; ++p) {
          if (slotted[p]) {
            const std::size_t s = slot_dist(rng);
            const auto slot = synth_slot_name(d, i, s);
            utt.tokens.push_back({"w" + slot.substr(4) + "_" + std::to_string(word_dist(rng)), slot});
          } else {
            utt.tokens.push_back({"filler" + detail::padded(filler_dist(rng)), std::string(kOtherSlot)});
          }
        }
        out.push_back(std::move(utt));
      }
    }
  }
  return out;
}

}  // namespace hierslu
