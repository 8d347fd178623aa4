#include "coordparse/nn.hpp"

#include "doctest.h"
#include "fd_util.hpp"

using namespace coordparse;
using namespace coordparse::nn;

namespace {

std::vector<Vec<double>> random_inputs(Rng& rng, int steps, int dim) {
  std::vector<Vec<double>> xs(steps, Vec<double>(dim));
  for (auto& x : xs)
    for (auto& v : x) v = rng.uniform(-1, 1);
  return xs;
}

}  // namespace

TEST_CASE("bilstm output shape and determinism") {
  Rng rng(3);
  BiLstm<double> layer("b", 5, 4);
  layer.init(rng);
  auto xs = random_inputs(rng, 7, 5);
  auto tr1 = bilstm_forward(layer, xs);
  auto tr2 = bilstm_forward(layer, xs);
  for (int t = 0; t < 7; ++t) {
    CHECK(bilstm_output(tr1, t).size() == 8);
    CHECK(bilstm_output(tr1, t) == bilstm_output(tr2, t));
  }
}

TEST_CASE("reversing the input and swapping directions reverses the output") {
  Rng rng(5);
  BiLstm<double> a("a", 3, 4);
  a.init(rng);
  BiLstm<double> b("b", 3, 4);
  b.fwd = a.bwd;
  b.bwd = a.fwd;
  b.hidden = a.hidden;

  auto xs = random_inputs(rng, 6, 3);
  auto rev = xs;
  std::reverse(rev.begin(), rev.end());
  auto tr_a = bilstm_forward(a, xs);
  auto tr_b = bilstm_forward(b, rev);
  for (int t = 0; t < 6; ++t) {
    auto oa = bilstm_output(tr_a, t);
    auto ob = bilstm_output(tr_b, 5 - t);
    // b's forward half is a's backward half and vice versa
    for (int k = 0; k < 4; ++k) {
      CHECK(oa[k] == doctest::Approx(ob[4 + k]).epsilon(1e-12));
      CHECK(oa[4 + k] == doctest::Approx(ob[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("bilstm gradients match finite differences") {
  Rng rng(9);
  BiLstm<double> layer("b", 4, 3);
  layer.init(rng);
  auto xs = random_inputs(rng, 5, 4);

  // L = 0.5 * sum of squared outputs
  auto loss = [&] {
    auto tr = bilstm_forward(layer, xs);
    double l = 0;
    for (int t = 0; t < 5; ++t)
      for (double v : bilstm_output(tr, t)) l += 0.5 * v * v;
    return l;
  };

  auto tr = bilstm_forward(layer, xs);
  std::vector<Vec<double>> d_fwd = tr.fwd.h, d_bwd = tr.bwd.h;
  std::vector<Vec<double>> d_in(5, Vec<double>(4, 0.0));
  bilstm_backward(layer, xs, tr, d_fwd, d_bwd, d_in);

  std::vector<Param<double>*> params{&layer.fwd.w, &layer.fwd.u, &layer.fwd.b,
                                     &layer.bwd.w, &layer.bwd.u, &layer.bwd.b};
  fd::Mismatch worst;
  const double rel = fd::check_gradients<double>(params, loss, 1e-5, &worst);
  INFO(worst.param, "[", worst.index, "] analytic=", worst.analytic, " numeric=", worst.numeric);
  CHECK(rel < 1e-4);

  // input gradients too
  for (int t = 0; t < 5; ++t) {
    for (int k = 0; k < 4; ++k) {
      const double saved = xs[t][k];
      xs[t][k] = saved + 1e-6;
      const double lp = loss();
      xs[t][k] = saved - 1e-6;
      const double lm = loss();
      xs[t][k] = saved;
      CHECK(d_in[t][k] == doctest::Approx((lp - lm) / 2e-6).epsilon(1e-4));
    }
  }
}

TEST_CASE("softmax cross entropy reference values") {
  std::vector<Vec<double>> em(3, Vec<double>(4, 0.0));
  std::vector<int> gold{0, 2, 3};
  std::vector<Vec<double>> dem;
  const double loss = softmax_ce_loss(em, gold, dem);
  CHECK(loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  // near-infinite margin on the gold tag drives the loss to 0
  std::vector<Vec<double>> peaked(2, Vec<double>(4, 0.0));
  peaked[0][1] = 200.0;
  peaked[1][0] = 200.0;
  CHECK(softmax_ce_loss(peaked, {1, 0}, dem) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("softmax cross entropy gradient matches finite differences") {
  Rng rng(17);
  const int t_len = 3, e = 4;
  std::vector<Vec<double>> em(t_len, Vec<double>(e));
  for (auto& row : em)
    for (auto& v : row) v = rng.uniform(-2, 2);
  std::vector<int> gold{1, 3, 0};
  std::vector<Vec<double>> dem;
  softmax_ce_loss(em, gold, dem);
  for (int t = 0; t < t_len; ++t) {
    for (int k = 0; k < e; ++k) {
      const double saved = em[t][k];
      std::vector<Vec<double>> tmp;
      em[t][k] = saved + 1e-6;
      const double lp = softmax_ce_loss(em, gold, tmp);
      em[t][k] = saved - 1e-6;
      const double lm = softmax_ce_loss(em, gold, tmp);
      em[t][k] = saved;
      CHECK(dem[t][k] == doctest::Approx((lp - lm) / 2e-6).epsilon(1e-5));
    }
  }
}

TEST_CASE("adam zero gradient leaves parameters unchanged") {
  Param<double> p("p", 2, 2);
  p.value(0, 0) = 1.5;
  p.value(1, 1) = -0.5;
  std::vector<Param<double>*> params{&p};
  AdamState<double> st;
  st.attach(params);
  const auto before = p.value.d;
  for (int i = 0; i < 5; ++i) adam_step(params, st);
  CHECK(p.value.d == before);
}

TEST_CASE("adam unit-step property under constant gradient") {
  Param<double> p("p", 1, 1);
  std::vector<Param<double>*> params{&p};
  AdamState<double> st;
  st.lr = 0.002;
  st.attach(params);

  // first step from m=v=0: update ~ -lr * sign(g)
  p.grad.d[0] = 3.7;
  adam_step(params, st);
  CHECK(p.value.d[0] == doctest::Approx(-st.lr).epsilon(1e-6));

  // steady state: per-step magnitude approaches lr
  double prev = p.value.d[0];
  for (int i = 0; i < 2000; ++i) {
    p.grad.d[0] = 3.7;
    adam_step(params, st);
  }
  p.grad.d[0] = 3.7;
  prev = p.value.d[0];
  adam_step(params, st);
  CHECK(std::abs(p.value.d[0] - prev) == doctest::Approx(st.lr).epsilon(1e-3));
}

TEST_CASE("adam rejects non-finite gradients with the step index") {
  Param<double> p("p", 1, 1);
  std::vector<Param<double>*> params{&p};
  AdamState<double> st;
  st.attach(params);
  p.grad.d[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(adam_step(params, st), doctest::Contains("step 1"), std::runtime_error);
}

TEST_CASE("dropout identity cases") {
  Rng rng(1);
  auto masks = make_dropout_masks<double>(4, 6, 0.0, DropoutMode::kEmbedding, true, rng);
  for (const auto& m : masks)
    for (double v : m) CHECK(v == 1.0);
  masks = make_dropout_masks<double>(4, 6, 0.9, DropoutMode::kEmbedding, false, rng);
  for (const auto& m : masks)
    for (double v : m) CHECK(v == 1.0);
  CHECK_THROWS_AS(make_dropout_masks<double>(1, 2, 1.0, DropoutMode::kEmbedding, true, rng),
                  std::invalid_argument);
}

TEST_CASE("variational dropout shares one mask across time steps") {
  Rng rng(33);
  auto masks = make_dropout_masks<double>(9, 32, 0.5, DropoutMode::kVariational, true, rng);
  for (int t = 1; t < 9; ++t) CHECK(masks[t] == masks[0]);
  // embedding mode draws fresh masks; with 32 coords at rate 0.5 two equal
  // consecutive masks are vanishingly unlikely
  auto fresh = make_dropout_masks<double>(2, 32, 0.5, DropoutMode::kEmbedding, true, rng);
  CHECK(fresh[0] != fresh[1]);
}

TEST_CASE("dropout scales kept coordinates by 1/(1-rate)") {
  Rng rng(7);
  auto masks = make_dropout_masks<double>(1, 1000, 0.25, DropoutMode::kEmbedding, true, rng);
  int kept = 0;
  for (double v : masks[0]) {
    CHECK((v == 0.0 || v == doctest::Approx(1.0 / 0.75)));
    if (v != 0.0) ++kept;
  }
  CHECK(kept > 650);
  CHECK(kept < 850);
}
