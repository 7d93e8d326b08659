#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hierslu/encoder.hpp"
#include "hierslu/gradcheck.hpp"

namespace hierslu {
namespace {

std::vector<Tensor> random_inputs(std::size_t n, std::size_t dim, Rng& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<Tensor> xs;
  for (std::size_t i = 0; i < n; ++i) {
    Tensor x(dim, 1);
    for (auto& v : x.data) v = d(rng);
    xs.push_back(x);
  }
  return xs;
}

Tensor encode(const ParameterStore& s, const std::vector<Tensor>& inputs,
              SequencePooling pooling = SequencePooling::FinalState) {
  Tape t;
  std::vector<Var> xs;
  for (const auto& x : inputs) xs.push_back(t.constant(x));
  return t.value(bilstm_encode(t, bind_bilstm(t, s, "enc"), xs, pooling));
}

ParameterStore swapped_directions(const ParameterStore& s) {
  ParameterStore out;
  for (const auto& n : s.names()) {
    std::string m = n;
    if (n.rfind("enc.fwd.", 0) == 0) m = "enc.bwd." + n.substr(8);
    else if (n.rfind("enc.bwd.", 0) == 0) m = "enc.fwd." + n.substr(8);
    out.add(m, s.value(n));
  }
  return out;
}

TEST(Lstm, ParameterNamesAndForgetBias) {
  Rng rng(1);
  ParameterStore s;
  add_bilstm_params(s, "enc", 3, 2, rng);
  EXPECT_EQ(s.names().size(), 24u);
  EXPECT_EQ(s.value("enc.fwd.W_i").rows, 2u);
  EXPECT_EQ(s.value("enc.fwd.W_i").cols, 3u);
  EXPECT_EQ(s.value("enc.bwd.U_o").cols, 2u);
  EXPECT_EQ(s.value("enc.fwd.b_f").data, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(s.value("enc.fwd.b_g").data, (std::vector<double>{0.0, 0.0}));
}

TEST(Lstm, ZeroWeightsGiveZeroOutput) {
  Rng rng(1);
  ParameterStore s;
  add_bilstm_params(s, "enc", 3, 4, rng);
  for (const auto& n : s.names()) s.value(n).fill(0.0);
  const auto out = encode(s, random_inputs(5, 3, rng));
  EXPECT_EQ(out.data, std::vector<double>(8, 0.0));
}

TEST(Lstm, SaturatedForgetGateKeepsCell) {
  Rng rng(2);
  ParameterStore s;
  add_lstm_cell_params(s, "c.", 3, 4, rng);
  s.value("c.b_f").fill(100.0);
  s.value("c.b_i").fill(-100.0);
  Tape t;
  const auto cell = bind_lstm_cell(t, s, "c.");
  const auto h0 = t.constant(random_inputs(1, 4, rng)[0]);
  const auto c0 = t.constant(random_inputs(1, 4, rng)[0]);
  const auto next = lstm_step(t, cell, t.constant(random_inputs(1, 3, rng)[0]), {h0, c0});
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(t.value(next.c)[k], t.value(c0)[k], 1e-9);
}

TEST(Lstm, GateRanges) {
  Rng rng(5);
  ParameterStore s;
  add_lstm_cell_params(s, "c.", 3, 6, rng);
  Tape t;
  const auto cell = bind_lstm_cell(t, s, "c.");
  LstmState st{lstm_zero_state(t, cell), lstm_zero_state(t, cell)};
  for (const auto& x : random_inputs(10, 3, rng)) {
    st = lstm_step(t, cell, t.constant(x), st);
    for (double v : t.value(st.h).data) EXPECT_LT(std::abs(v), 1.0);
  }
}

TEST(BiLstm, OutputLengthIsTwiceHidden) {
  Rng rng(3);
  ParameterStore s;
  add_bilstm_params(s, "enc", 3, 7, rng);
  for (std::size_t n : {1u, 2u, 6u}) {
    EXPECT_EQ(encode(s, random_inputs(n, 3, rng)).size(), 14u);
    EXPECT_EQ(encode(s, random_inputs(n, 3, rng), SequencePooling::MeanState).size(), 14u);
  }
}

TEST(BiLstm, EmptySequenceThrows) {
  Rng rng(3);
  ParameterStore s;
  add_bilstm_params(s, "enc", 3, 2, rng);
  try {
    encode(s, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySequence);
  }
}

TEST(BiLstm, ReversalWithSwappedDirectionsSwapsHalves) {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    ParameterStore s;
    add_bilstm_params(s, "enc", 4, 3, rng);
    auto xs = random_inputs(1 + trial % 5, 4, rng);
    const auto a = encode(s, xs);
    std::reverse(xs.begin(), xs.end());
    const auto b = encode(swapped_directions(s), xs);
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_EQ(a[k], b[k + 3]);
      EXPECT_EQ(a[k + 3], b[k]);
    }
  }
}

TEST(BiLstm, PalindromeWithSharedDirectionsHasEqualHalves) {
  Rng rng(10);
  ParameterStore s;
  add_bilstm_params(s, "enc", 4, 3, rng);
  for (const auto& n : s.names()) {
    if (n.rfind("enc.bwd.", 0) == 0) s.value(n) = s.value("enc.fwd." + n.substr(8));
  }
  auto xs = random_inputs(3, 4, rng);
  xs.push_back(xs[1]);
  xs.push_back(xs[0]);
  const auto out = encode(s, xs);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(out[k], out[k + 3]);
}

TEST(GradCheck, LstmCell) {
  Rng rng(12);
  ParameterStore s;
  add_lstm_cell_params(s, "c.", 3, 4, rng);
  s.add("x", random_inputs(1, 3, rng)[0]);
  s.add("h", random_inputs(1, 4, rng)[0]);
  s.add("c", random_inputs(1, 4, rng)[0]);
  const auto probe = random_inputs(2, 4, rng);
  const auto r = check_gradients([&](Tape& t, const ParameterStore& st) {
    const auto cell = bind_lstm_cell(t, st, "c.");
    const auto next = lstm_step(t, cell, t.param(st, "x"), {t.param(st, "h"), t.param(st, "c")});
    return add(t, dot(t, next.h, t.constant(probe[0])), dot(t, next.c, t.constant(probe[1])));
  }, s, 1e-5, 1e-6);
  EXPECT_TRUE(r.passed) << r.max_rel_error << " at " << r.worst_param << "[" << r.worst_index << "]";
}

class EncoderGradCheck : public ::testing::TestWithParam<std::tuple<std::size_t, std::size_t, SequencePooling>> {};

TEST_P(EncoderGradCheck, MatchesFiniteDifferences) {
  const auto [len, hidden, pooling] = GetParam();
  Rng rng(100 + len * 10 + hidden);
  ParameterStore s;
  add_bilstm_params(s, "enc", 3, hidden, rng);
  for (std::size_t i = 0; i < len; ++i) s.add("x" + std::to_string(i), random_inputs(1, 3, rng)[0]);
  const auto probe = random_inputs(1, 2 * hidden, rng)[0];
  const auto r = check_gradients([&](Tape& t, const ParameterStore& st) {
    std::vector<Var> xs;
    for (std::size_t i = 0; i < len; ++i) xs.push_back(t.param(st, "x" + std::to_string(i)));
    return dot(t, bilstm_encode(t, bind_bilstm(t, st, "enc"), xs, pooling), t.constant(probe));
  }, s, 1e-5, 1e-5);
  EXPECT_TRUE(r.passed) << r.max_rel_error << " at " << r.worst_param << "[" << r.worst_index << "]";
}

INSTANTIATE_TEST_SUITE_P(Shapes, EncoderGradCheck,
                         ::testing::Combine(::testing::Values(1u, 2u, 4u), ::testing::Values(1u, 3u, 5u),
                                            ::testing::Values(SequencePooling::FinalState,
                                                              SequencePooling::MeanState)));

}  // namespace
}  // namespace hierslu
