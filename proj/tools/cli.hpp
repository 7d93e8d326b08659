#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data
// error, 3 numerical failure (non-finite loss or failed gradient check).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hierslu/hierslu.hpp"

namespace hierslu::cli {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

inline int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::InvalidArgument: return kUsage;
    case ErrorCode::NonFiniteLoss: return kNumerical;
    default: return kData;
  }
}

inline nlohmann::json report_json(const SeparationReport& r) {
  return {{"intra_domain_intent_cosine", r.intra_cosine},
          {"inter_domain_intent_cosine", r.inter_cosine},
          {"margin", r.margin},
          {"domain_accuracy", r.accuracy},
          {"joint_loss", r.joint_loss}};
}

inline WordVectorTable maybe_word_vectors(const std::string& path, std::size_t dim) {
  return path.empty() ? WordVectorTable{} : load_word_vectors(path, dim);
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Hierarchical domain / intent / slot embedding trainer"};
  app.require_subcommand(1);

  // train
  struct {
    std::string corpus, word_vectors, out;
    std::string aggregator = "avg", activation = "tanh", pooling = "final";
    EmbeddingConfig cfg;
    std::size_t iters = 300;
    double lr = 1e-3;
    std::uint64_t seed = 1;
    std::optional<double> stop_below;
  } tr;
  auto* train_cmd = app.add_subcommand("train", "Train the hierarchical model");
  train_cmd->add_option("--corpus", tr.corpus, "Annotated corpus file")->required();
  train_cmd->add_option("--word-vectors", tr.word_vectors, "Pre-trained word vectors (dim k_s)");
  train_cmd->add_option("--aggregator", tr.aggregator, "avg | maxpool")->capture_default_str();
  train_cmd->add_option("--activation", tr.activation, "tanh | sigmoid")->capture_default_str();
  train_cmd->add_option("--pooling", tr.pooling, "BiLSTM pooling: final | mean")->capture_default_str();
  train_cmd->add_option("--k-s", tr.cfg.k_s)->capture_default_str();
  train_cmd->add_option("--k-i", tr.cfg.k_i)->capture_default_str();
  train_cmd->add_option("--k-d", tr.cfg.k_d)->capture_default_str();
  train_cmd->add_option("--hidden", tr.cfg.hidden)->capture_default_str();
  train_cmd->add_option("--classifier-hidden", tr.cfg.classifier_hidden, "0 = k_d")->capture_default_str();
  train_cmd->add_option("--samples", tr.cfg.samples, "Utterances sampled per intent")->capture_default_str();
  train_cmd->add_option("--iters", tr.iters)->capture_default_str();
  train_cmd->add_option("--lr", tr.lr)->capture_default_str();
  train_cmd->add_option("--seed", tr.seed)->capture_default_str();
  train_cmd->add_option("--stop-below", tr.stop_below, "Stop once the joint loss drops below this");
  train_cmd->add_option("--out", tr.out, "Model directory")->required();

  // baseline
  struct {
    std::string corpus, word_vectors, out, target = "domain", pooling = "final";
    int variant = 1;
    BaselineConfig cfg;
    NegSampleConfig neg;
    std::size_t iters = 2000;
    double lr = 1e-3;
    std::uint64_t seed = 1;
  } bl;
  auto* baseline_cmd = app.add_subcommand("baseline", "Train a comparison embedding learner");
  baseline_cmd->add_option("--variant", bl.variant, "1 | 2 | 3")->check(CLI::IsMember({1, 2, 3}))->capture_default_str();
  baseline_cmd->add_option("--target", bl.target, "domain | intent")->capture_default_str();
  baseline_cmd->add_option("--q", bl.neg.q, "Negative samples")->capture_default_str();
  baseline_cmd->add_option("--corpus", bl.corpus)->required();
  baseline_cmd->add_option("--word-vectors", bl.word_vectors);
  baseline_cmd->add_option("--pooling", bl.pooling)->capture_default_str();
  baseline_cmd->add_option("--k-s", bl.cfg.k_s)->capture_default_str();
  baseline_cmd->add_option("--hidden", bl.cfg.hidden)->capture_default_str();
  baseline_cmd->add_option("--iters", bl.iters)->capture_default_str();
  baseline_cmd->add_option("--lr", bl.lr)->capture_default_str();
  baseline_cmd->add_option("--seed", bl.seed)->capture_default_str();
  baseline_cmd->add_option("--out", bl.out)->required();

  // export
  std::string ex_model, ex_out;
  std::optional<std::size_t> ex_samples;
  std::uint64_t ex_seed = 1;
  auto* export_cmd = app.add_subcommand("export", "Write an embedding snapshot");
  export_cmd->add_option("--model", ex_model)->required();
  export_cmd->add_option("--out", ex_out)->required();
  export_cmd->add_option("--samples", ex_samples, "Sampled utterances per intent (default: all)");
  export_cmd->add_option("--seed", ex_seed)->capture_default_str();

  // eval
  std::string ev_model, ev_corpus, ev_out;
  auto* eval_cmd = app.add_subcommand("eval", "Print a separation report as JSON");
  eval_cmd->add_option("--model", ev_model)->required();
  eval_cmd->add_option("--corpus", ev_corpus)->required();
  eval_cmd->add_option("--out", ev_out, "Also write the report here");

  // neighbors
  std::string nb_snapshot, nb_query;
  std::size_t nb_k = 10;
  auto* nb_cmd = app.add_subcommand("neighbors", "Nearest entries by cosine");
  nb_cmd->add_option("--snapshot", nb_snapshot)->required();
  nb_cmd->add_option("--query", nb_query, "kind:name")->required();
  nb_cmd->add_option("--k", nb_k)->capture_default_str();

  // synth
  SynthSpec sp;
  std::string sy_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth_cmd->add_option("--domains", sp.n_domains)->capture_default_str();
  synth_cmd->add_option("--intents", sp.intents_per_domain)->capture_default_str();
  synth_cmd->add_option("--slots", sp.slots_per_intent)->capture_default_str();
  synth_cmd->add_option("--utterances", sp.utterances_per_intent)->capture_default_str();
  synth_cmd->add_option("--vocab", sp.carrier_vocab_size)->capture_default_str();
  synth_cmd->add_option("--words-per-slot", sp.words_per_slot)->capture_default_str();
  synth_cmd->add_option("--min-len", sp.min_len)->capture_default_str();
  synth_cmd->add_option("--max-len", sp.max_len)->capture_default_str();
  synth_cmd->add_option("--seed", sp.seed)->capture_default_str();
  synth_cmd->add_option("--out", sy_out)->required();

  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every loss on a tiny model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*train_cmd) {
      tr.cfg.aggregator = parse_aggregator(tr.aggregator);
      tr.cfg.activation = parse_activation(tr.activation);
      tr.cfg.pooling = parse_pooling(tr.pooling);
      const auto corpus = read_corpus_file(tr.corpus);
      const auto h = build_hierarchy(corpus);
      Rng rng(tr.seed);
      auto model = init_hier_model(h, tr.cfg, maybe_word_vectors(tr.word_vectors, tr.cfg.k_s), rng);
      OptimizerState opt(AdamConfig{tr.lr});
      TrainOptions opts;
      opts.iterations = tr.iters;
      opts.stop_below = tr.stop_below;
      const auto trace = train(model, h, opts, opt, rng);
      save_hier_model(tr.out, model, corpus, trace,
                      {{"seed", tr.seed}, {"lr", tr.lr}, {"iterations", trace.size()}});
      out << "trained " << trace.size() << " iterations, final joint loss "
          << format_real(trace.back()) << "\n";
    } else if (*baseline_cmd) {
      bl.cfg.pooling = parse_pooling(bl.pooling);
      const auto corpus = read_corpus_file(bl.corpus);
      const auto h = build_hierarchy(corpus);
      Rng rng(bl.seed);
      auto model = init_baseline(h, static_cast<BaselineVariant>(bl.variant), parse_target(bl.target), bl.cfg,
                                 maybe_word_vectors(bl.word_vectors, bl.cfg.k_s), rng);
      OptimizerState opt(AdamConfig{bl.lr});
      const auto trace = train_baseline(model, h, bl.neg, bl.iters, opt, rng);
      save_baseline_model(bl.out, model, bl.neg, corpus, trace,
                          {{"seed", bl.seed}, {"lr", bl.lr}, {"iterations", trace.size()}});
      out << "trained baseline " << bl.variant << " for " << trace.size() << " iterations\n";
    } else if (*export_cmd) {
      const auto loaded = load_model(ex_model);
      Rng rng(ex_seed);
      const auto snap = std::holds_alternative<HierModel>(loaded.model)
                            ? export_embeddings(std::get<HierModel>(loaded.model), loaded.hierarchy, rng, ex_samples)
                            : export_baseline(std::get<BaselineModel>(loaded.model), loaded.hierarchy);
      save_snapshot(ex_out, snap);
      out << "wrote " << snap.entries.size() << " embeddings to " << ex_out << "\n";
    } else if (*eval_cmd) {
      const auto loaded = load_model(ev_model);
      if (!std::holds_alternative<HierModel>(loaded.model)) {
        throw Error(ErrorCode::InvalidArgument, "eval needs a hierarchical model; use export + neighbors for baselines");
      }
      const auto& model = std::get<HierModel>(loaded.model);
      const auto h = build_hierarchy(read_corpus_file(ev_corpus));
      if (h.domains != model.domains) {
        throw Error(ErrorCode::MissingEmbedding, "evaluation corpus domains differ from the model's");
      }
      Rng rng(0);
      const auto snap = export_embeddings(model, h, rng);
      const auto text = report_json(separation_report(snap, h, model)).dump();
      out << text << "\n";
      if (!ev_out.empty()) {
        std::ofstream f(ev_out);
        if (!f) throw Error(ErrorCode::UnreadableFile, "cannot write " + ev_out);
        f << text << "\n";
      }
    } else if (*nb_cmd) {
      const auto snap = load_snapshot(nb_snapshot);
      for (const auto& n : nearest_neighbors(snap, nb_query, nb_k)) {
        out << n.key << ' ' << format_real(n.cosine) << "\n";
      }
    } else if (*synth_cmd) {
      const auto corpus = synth_generate(sp);
      std::ofstream f(sy_out, std::ios::binary);
      if (!f) throw Error(ErrorCode::UnreadableFile, "cannot write " + sy_out);
      write_corpus(f, corpus);
      out << "wrote " << corpus.size() << " utterances to " << sy_out << "\n";
    } else if (*gc_cmd) {
      bool ok = true;
      for (const auto& [name, r] : run_gradcheck_suite()) {
        out << (r.passed ? "PASS " : "FAIL ") << name << " max_rel_error=" << r.max_rel_error
            << " analytic=" << r.worst_analytic << " numeric=" << r.worst_numeric << " coords=" << r.coordinates << " worst=" << r.worst_param << "[" << r.worst_index << "]\n";
        ok = ok && r.passed;
      }
      return ok ? kOk : kNumerical;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}

}  // namespace hierslu::cli
