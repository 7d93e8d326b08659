#pragma once

// Bidirectional LSTM utterance encoder built from taped primitives.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hierslu/autodiff.hpp"
#include "hierslu/optim.hpp"

namespace hierslu {

enum class SequencePooling { FinalState, MeanState };

// Gate order everywhere: input, forget, output, candidate.
inline constexpr std::array<const char*, 4> kGateNames = {"i", "f", "o", "g"};

struct LstmCellVars {
  std::array<Var, 4> input_weights;
  std::array<Var, 4> recurrent_weights;
  std::array<Var, 4> biases;
};

struct LstmState {
  Var h;
  Var c;
};

struct BiLstmVars {
  LstmCellVars forward;
  LstmCellVars backward;
};

// Parameters `<prefix>W_<gate>` (hidden x input), `<prefix>U_<gate>`
// (hidden x hidden) and `<prefix>b_<gate>` (hidden); forget bias starts at 1.
inline void add_lstm_cell_params(ParameterStore& store, const std::string& prefix,
                                 std::size_t input_dim, std::size_t hidden, Rng& rng) {
  for (const char* g : kGateNames) store.add(prefix + "W_" + g, glorot_init(hidden, input_dim, rng));
  for (const char* g : kGateNames) store.add(prefix + "U_" + g, glorot_init(hidden, hidden, rng));
  for (const char* g : kGateNames) {
    store.add(prefix + "b_" + g, Tensor(hidden, 1, std::string(g) == "f" ? 1.0 : 0.0));
  }
}

inline LstmCellVars bind_lstm_cell(Tape& t, const ParameterStore& store, const std::string& prefix) {
  LstmCellVars v;
  for (std::size_t k = 0; k < 4; ++k) {
    v.input_weights[k] = t.param(store, prefix + "W_" + kGateNames[k]);
    v.recurrent_weights[k] = t.param(store, prefix + "U_" + kGateNames[k]);
    v.biases[k] = t.param(store, prefix + "b_" + kGateNames[k]);
  }
  return v;
}

inline void add_bilstm_params(ParameterStore& store, const std::string& prefix,
                              std::size_t input_dim, std::size_t hidden, Rng& rng) {
  add_lstm_cell_params(store, prefix + ".fwd.", input_dim, hidden, rng);
  add_lstm_cell_params(store, prefix + ".bwd.", input_dim, hidden, rng);
}

inline BiLstmVars bind_bilstm(Tape& t, const ParameterStore& store, const std::string& prefix) {
  return {bind_lstm_cell(t, store, prefix + ".fwd."), bind_lstm_cell(t, store, prefix + ".bwd.")};
}

inline std::size_t lstm_hidden_size(const Tape& t, const LstmCellVars& cell) {
  return t.value(cell.biases[0]).size();
}

// i, f, o = sigmoid(W x + U h + b); g = tanh(W x + U h + b);
// c' = f * c + i * g; h' = o * tanh(c').
inline LstmState lstm_step(Tape& t, const LstmCellVars& cell, Var x, LstmState prev) {
  std::array<Var, 4> pre;
  for (std::size_t k = 0; k < 4; ++k) {
    pre[k] = add(t, add(t, matvec(t, cell.input_weights[k], x),
                        matvec(t, cell.recurrent_weights[k], prev.h)),
                 cell.biases[k]);
  }
  const Var in = sigmoid(t, pre[0]);
  const Var forget = sigmoid(t, pre[1]);
  const Var out = sigmoid(t, pre[2]);
  const Var cand = tanh(t, pre[3]);
  const Var c = add(t, mul(t, forget, prev.c), mul(t, in, cand));
  const Var h = mul(t, out, tanh(t, c));
  return {h, c};
}

inline Var lstm_zero_state(Tape& t, const LstmCellVars& cell) {
  return t.constant(Tensor(lstm_hidden_size(t, cell), 1));
}

// Runs one direction; returns the final hidden state or the mean of all
// hidden states.
inline Var lstm_run(Tape& t, const LstmCellVars& cell, std::span<const Var> xs, bool reversed,
                    SequencePooling pooling) {
  const Var zero = lstm_zero_state(t, cell);
  LstmState s{zero, zero};
  std::vector<Var> hs;
  hs.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s = lstm_step(t, cell, xs[reversed ? xs.size() - 1 - i : i], s);
    hs.push_back(s.h);
  }
  return pooling == SequencePooling::FinalState ? s.h : mean(t, hs);
}

// concat(forward final state over x_1..x_t, backward final state over x_t..x_1).
inline Var bilstm_encode(Tape& t, const BiLstmVars& p, std::span<const Var> xs,
                         SequencePooling pooling = SequencePooling::FinalState) {
  if (xs.empty()) throw Error(ErrorCode::EmptySequence, "bilstm_encode: empty sequence");
  const Var fwd = lstm_run(t, p.forward, xs, false, pooling);
  const Var bwd = lstm_run(t, p.backward, xs, true, pooling);
  return concat(t, fwd, bwd);
}

}  // namespace hierslu
