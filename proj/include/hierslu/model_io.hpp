#pragma once

// Model directories:
//   config.json     model kind, dimensions and training flags
//   parameters.txt  checkpoint (see checkpoint.hpp)
//   corpus.tsv      the training corpus, to rebuild the hierarchy
//   loss.txt        per-iteration training loss

#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hierslu/baselines.hpp"
#include "hierslu/checkpoint.hpp"
#include "hierslu/corpus.hpp"
#include "hierslu/hier_model.hpp"

namespace hierslu {

inline std::string to_string(Aggregator a) { return a == Aggregator::Average ? "avg" : "maxpool"; }
inline std::string to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "sigmoid"; }
inline std::string to_string(SequencePooling p) { return p == SequencePooling::FinalState ? "final" : "mean"; }
inline std::string to_string(LabelTarget t) { return t == LabelTarget::Domain ? "domain" : "intent"; }

inline Aggregator parse_aggregator(const std::string& s) {
  if (s == "avg" || s == "average") return Aggregator::Average;
  if (s == "maxpool") return Aggregator::MaxPool;
  throw Error(ErrorCode::InvalidArgument, "unknown aggregator " + s);
}

inline Activation parse_activation(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "sigmoid") return Activation::Sigmoid;
  throw Error(ErrorCode::InvalidArgument, "unknown activation " + s);
}

inline SequencePooling parse_pooling(const std::string& s) {
  if (s == "final") return SequencePooling::FinalState;
  if (s == "mean") return SequencePooling::MeanState;
  throw Error(ErrorCode::InvalidArgument, "unknown pooling " + s);
}

inline LabelTarget parse_target(const std::string& s) {
  if (s == "domain") return LabelTarget::Domain;
  if (s == "intent") return LabelTarget::Intent;
  throw Error(ErrorCode::InvalidArgument, "unknown target " + s);
}

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::UnreadableFile, "cannot write " + p.string());
  out << text;
}

inline nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::UnreadableFile, p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedLine, p.string() + ": " + e.what());
  }
}

inline void save_common(const std::filesystem::path& dir, const nlohmann::json& config,
                        const ParameterStore& params, const std::vector<LabeledUtterance>& corpus,
                        const std::vector<double>& trace) {
  std::filesystem::create_directories(dir);
  write_text(dir / "config.json", config.dump(2) + "\n");
  save_checkpoint((dir / "parameters.txt").string(), params);
  std::ostringstream c;
  write_corpus(c, corpus);
  write_text(dir / "corpus.tsv", c.str());
  std::string loss;
  for (double v : trace) loss += format_real(v) + "\n";
  write_text(dir / "loss.txt", loss);
}

}  // namespace detail

inline nlohmann::json config_json(const EmbeddingConfig& c) {
  return {{"k_s", c.k_s},
          {"k_i", c.k_i},
          {"k_d", c.k_d},
          {"hidden", c.hidden},
          {"samples", c.samples},
          {"classifier_hidden", c.mlp_width()},
          {"aggregator", to_string(c.aggregator)},
          {"activation", to_string(c.activation)},
          {"pooling", to_string(c.pooling)}};
}

inline void save_hier_model(const std::filesystem::path& dir, const HierModel& m,
                            const std::vector<LabeledUtterance>& corpus, const std::vector<double>& trace,
                            nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::json cfg = extra;
  cfg["model"] = "hierarchical";
  cfg["embedding"] = config_json(m.config);
  cfg["domains"] = m.domains;
  cfg["vocab"] = m.vocab.names;
  detail::save_common(dir, cfg, m.params, corpus, trace);
}

inline void save_baseline_model(const std::filesystem::path& dir, const BaselineModel& m,
                                const NegSampleConfig& neg, const std::vector<LabeledUtterance>& corpus,
                                const std::vector<double>& trace,
                                nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::json cfg = extra;
  cfg["model"] = "baseline";
  cfg["variant"] = static_cast<int>(m.variant);
  cfg["target"] = to_string(m.target);
  cfg["q"] = neg.q;
  cfg["k_s"] = m.config.k_s;
  cfg["hidden"] = m.config.hidden;
  cfg["classifier_hidden"] = m.config.mlp_width();
  cfg["pooling"] = to_string(m.config.pooling);
  cfg["vocab"] = m.vocab.names;
  // Variant 2 output layer is stored classes x hidden; embeddings are its rows.
  if (m.variant == BaselineVariant::Classifier) cfg["label_embedding_layout"] = "cls.V2 rows";
  detail::save_common(dir, cfg, m.params, corpus, trace);
}

struct LoadedModel {
  std::variant<HierModel, BaselineModel> model;
  std::vector<LabeledUtterance> corpus;
  Hierarchy hierarchy;
  nlohmann::json config;
};

inline LoadedModel load_model(const std::filesystem::path& dir) {
  LoadedModel out;
  out.config = detail::read_json(dir / "config.json");
  out.corpus = read_corpus_file((dir / "corpus.tsv").string());
  out.hierarchy = build_hierarchy(out.corpus);
  auto params = load_checkpoint((dir / "parameters.txt").string());
  const auto& c = out.config;
  try {
    if (c.at("model") == "hierarchical") {
      HierModel m;
      const auto& e = c.at("embedding");
      m.config.k_s = e.at("k_s");
      m.config.k_i = e.at("k_i");
      m.config.k_d = e.at("k_d");
      m.config.hidden = e.at("hidden");
      m.config.samples = e.at("samples");
      m.config.classifier_hidden = e.at("classifier_hidden");
      m.config.aggregator = parse_aggregator(e.at("aggregator"));
      m.config.activation = parse_activation(e.at("activation"));
      m.config.pooling = parse_pooling(e.at("pooling"));
      m.domains = c.at("domains").get<std::vector<std::string>>();
      m.vocab = Vocab::from_names(c.at("vocab").get<std::vector<std::string>>());
      m.params = std::move(params);
      out.model = std::move(m);
    } else {
      BaselineModel m;
      m.variant = static_cast<BaselineVariant>(c.at("variant").get<int>());
      m.target = parse_target(c.at("target"));
      m.config.k_s = c.at("k_s");
      m.config.hidden = c.at("hidden");
      m.config.classifier_hidden = c.at("classifier_hidden");
      m.config.pooling = parse_pooling(c.at("pooling"));
      m.vocab = Vocab::from_names(c.at("vocab").get<std::vector<std::string>>());
      m.params = std::move(params);
      out.model = std::move(m);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedLine, (dir / "config.json").string() + ": " + e.what());
  }
  return out;
}

}  // namespace hierslu
