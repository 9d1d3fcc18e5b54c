#include <doctest.h>

#include <cmath>
#include <random>

#include "hatebench/checkpoint.hpp"
#include "hatebench/error.hpp"
#include "hatebench/numerics.hpp"
#include "support.hpp"

using namespace hatebench;
using namespace hatebench::numerics;

namespace {

void randomize(Tensor& t, Rng& rng, double scale = 0.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& v : t.values()) v = u(rng);
}

void randomize(LstmDirection& d, Rng& rng) {
  LstmDirection::visit(d, "", [&](const std::string&, Tensor& t) { randomize(t, rng); });
}

Mat random_mat(Eigen::Index r, Eigen::Index c, Rng& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

Vec random_vec(Eigen::Index n, Rng& rng) { return random_mat(1, n, rng); }

LayerParams tiny_model(Rng& rng, std::size_t V = 20, std::size_t d = 5, std::size_t F = 4,
                       std::size_t H = 3) {
  auto p = LayerParams::zeros({V, d, 3, F, H});
  p.for_each([&](const std::string&, Tensor& t) { randomize(t, rng); });
  for (std::size_t j = 0; j < d; ++j) p.embedding[j] = 0.0;  // pad row
  return p;
}

}  // namespace

TEST_CASE("embedding lookup, pad row and gradient") {
  Rng rng(1);
  Tensor table({5, 3});
  randomize(table, rng);
  const std::vector<std::int32_t> ids = {2, 4, 0, 2};
  const auto out = embedding_forward(ids, table);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(out.mat()(0, j) == table.mat()(2, j));
    CHECK(out.mat()(1, j) == table.mat()(4, j));
    CHECK(out.mat()(2, j) == 0.0);
  }
  const std::vector<std::int32_t> pads = {0, 0};
  const auto zeros = embedding_forward(pads, table);
  for (double v : zeros.values()) CHECK(v == 0.0);
  Tensor d_pad({5, 3});
  embedding_backward(pads, zeros, d_pad);
  for (double v : d_pad.values()) CHECK(v == 0.0);
  CHECK_THROWS(embedding_forward(std::vector<std::int32_t>{7}, table));

  Tensor weights({4, 3});
  randomize(weights, rng);
  auto loss = [&] { return embedding_forward(ids, table).mat().cwiseProduct(weights.mat()).sum(); };
  Tensor grad({5, 3});
  embedding_backward(ids, weights, grad);
  const std::vector<ParamSlot> slots = {{"table", table.values(), grad.values()}};
  CHECK(grad_check(loss, slots).overall_max < 1e-6);
}

TEST_CASE("convolution shape, bias and gradient") {
  Rng rng(2);
  Tensor w({3, 5, 4}), b({4});
  randomize(b, rng);
  const Mat x50 = random_mat(50, 5, rng);
  const auto zero_w = conv1d_forward(x50, w, b, Activation::Relu);
  CHECK(zero_w.out.rows() == 50);
  for (Eigen::Index t = 0; t < 50; ++t)
    for (Eigen::Index f = 0; f < 4; ++f) CHECK(zero_w.out(t, f) == std::max(0.0, b[static_cast<std::size_t>(f)]));

  randomize(w, rng);
  Tensor x({7, 5});
  x.mat() = random_mat(7, 5, rng);
  const Mat upstream = random_mat(7, 4, rng);
  auto loss = [&] { return conv1d_forward(x.mat(), w, b).out.cwiseProduct(upstream).sum(); };
  Tensor dw({3, 5, 4}), db({4}), dx({7, 5});
  const auto cache = conv1d_forward(x.mat(), w, b);
  dx.mat() = conv1d_backward(cache, upstream, w, dw, db);
  const std::vector<ParamSlot> slots = {
      {"w", w.values(), dw.values()}, {"b", b.values(), db.values()}, {"x", x.values(), dx.values()}};
  CHECK(grad_check(loss, slots).overall_max < 1e-4);
}

TEST_CASE("lstm cell basics") {
  LstmDirection zero = LayerParams::zeros({2, 4, 3, 4, 3}).forward;
  const auto s = lstm_cell(Vec::Zero(4), Vec::Zero(3), Vec::Zero(3), zero);
  for (Eigen::Index j = 0; j < 3; ++j) {
    CHECK(s.i[j] == 0.5);
    CHECK(s.f[j] == 0.5);
    CHECK(s.o[j] == 0.5);
    CHECK(s.g[j] == 0.0);
    CHECK(s.h[j] == 0.0);
  }
  Rng rng(3);
  LstmDirection p = zero;
  randomize(p, rng);
  for (auto& t : {&p.W_i, &p.W_g}) for (auto& v : t->values()) v *= 20;
  const auto big = lstm_cell(random_vec(4, rng) * 10, random_vec(3, rng), random_vec(3, rng) * 5, p);
  for (Eigen::Index j = 0; j < 3; ++j) CHECK(std::abs(big.h[j]) < 1.0);
}

TEST_CASE("gradient through three chained lstm cells") {
  Rng rng(4);
  LstmDirection p = LayerParams::zeros({2, 4, 3, 4, 3}).forward;
  randomize(p, rng);
  Tensor xs({3, 4});
  xs.mat() = random_mat(3, 4, rng);
  const Mat r = random_mat(3, 3, rng);
  const Vec s = random_vec(3, rng);

  auto run = [&] {
    std::vector<LstmStep> steps;
    Vec h = Vec::Zero(3), c = Vec::Zero(3);
    for (Eigen::Index t = 0; t < 3; ++t) {
      steps.push_back(lstm_cell(xs.mat().row(t), h, c, p));
      h = steps.back().h;
      c = steps.back().c;
    }
    return steps;
  };
  auto loss = [&] {
    const auto steps = run();
    double l = steps.back().c.dot(s);
    for (std::size_t t = 0; t < 3; ++t) l += steps[t].h.dot(r.row(static_cast<Eigen::Index>(t)));
    return l;
  };

  LstmDirection grads = LayerParams::zeros({2, 4, 3, 4, 3}).forward;
  Tensor dxs({3, 4});
  const auto steps = run();
  Vec dh = Vec::Zero(3), dc = s;
  for (int t = 2; t >= 0; --t) {
    const Vec upstream = r.row(t) + dh;
    const auto g = lstm_cell_backward(steps[static_cast<std::size_t>(t)], upstream, dc, p, grads);
    dxs.mat().row(t) = g.dx;
    dh = g.dh_prev;
    dc = g.dc_prev;
  }
  std::vector<ParamSlot> slots;
  std::vector<std::span<const double>> g;
  LstmDirection::visit(grads, "", [&](const std::string&, const Tensor& t) { g.push_back(t.values()); });
  std::size_t k = 0;
  LstmDirection::visit(p, "", [&](const std::string& name, Tensor& t) { slots.push_back({name, t.values(), g[k++]}); });
  slots.push_back({"x", xs.values(), dxs.values()});
  const auto report = grad_check(loss, slots);
  CHECK(report.overall_max < 1e-4);
}

TEST_CASE("bidirectional layer") {
  Rng rng(5);
  LstmDirection f = LayerParams::zeros({2, 4, 3, 4, 50}).forward;
  randomize(f, rng);
  const auto wide = bilstm_forward(random_mat(6, 4, rng), f, f);
  CHECK(wide.out.cols() == 100);

  // Tied directions on a palindrome mirror each other in time.
  LstmDirection p = LayerParams::zeros({2, 4, 3, 4, 3}).forward;
  randomize(p, rng);
  Mat x(3, 4);
  x.row(0) = random_vec(4, rng);
  x.row(1) = random_vec(4, rng);
  x.row(2) = x.row(0);
  const auto c = bilstm_forward(x, p, p);
  for (Eigen::Index t = 0; t < 3; ++t)
    CHECK((c.out.row(t).head(3) - c.out.row(2 - t).tail(3)).cwiseAbs().maxCoeff() == 0.0);

  const auto one = bilstm_forward(random_mat(1, 4, rng), p, p);
  CHECK((one.out.row(0).head(3) - one.out.row(0).tail(3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pooling and output head") {
  Rng rng(6);
  Tensor w({6}), b({1});
  const std::vector<std::uint8_t> mask = {1, 1, 0};
  Mat h = random_mat(3, 6, rng);
  CHECK(pooled_output(h, mask, w, b).prob == 0.5);

  const std::vector<std::uint8_t> single = {0, 1, 0};
  for (auto pool : {Pooling::Max, Pooling::LastState}) {
    const auto c = pooled_output(h, single, w, b, pool);
    CHECK((c.pooled - h.row(1)).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(pooled_output(h, std::vector<std::uint8_t>{0, 0, 0}, w, b), DataError);

  randomize(w, rng);
  randomize(b, rng);
  for (auto pool : {Pooling::Max, Pooling::LastState}) {
    Tensor hs({3, 6});
    hs.mat() = h;
    const double y = 1.0;
    auto loss = [&] {
      const double p = pooled_output(hs.mat(), mask, w, b, pool).prob;
      return bce_loss(std::vector{p}, std::vector{y}).loss;
    };
    const auto c = pooled_output(hs.mat(), mask, w, b, pool);
    Tensor dw({6}), db({1}), dh({3, 6});
    dh.mat() = pooled_backward(c, 3, c.prob - y, w, dw, db, pool);
    const std::vector<ParamSlot> slots = {
        {"w", w.values(), dw.values()}, {"b", b.values(), db.values()}, {"h", hs.values(), dh.values()}};
    CHECK(grad_check(loss, slots).overall_max < 1e-4);
  }
}

TEST_CASE("binary cross-entropy") {
  CHECK(std::abs(bce_loss(std::vector{0.5}, std::vector{1.0}).loss - std::log(2.0)) < 1e-12);
  CHECK(bce_loss(std::vector{1.0}, std::vector{1.0}).loss < 1e-6);
  CHECK(bce_loss(std::vector{0.0}, std::vector{0.0}).loss < 1e-6);
  CHECK(bce_loss(std::vector{0.8}, std::vector{0.0}).grad[0] > 0);
  CHECK(bce_loss(std::vector{0.2}, std::vector{1.0}).grad[0] < 0);
}

TEST_CASE("adam") {
  std::vector<double> x = {1.0, -2.0, 3.0};
  std::vector<double> zero(3, 0.0);
  auto state = AdamState::for_sizes({3});
  std::vector<std::span<double>> ps = {x};
  std::vector<std::span<const double>> gs = {zero};
  adam_step(ps, gs, state);
  CHECK(x == std::vector{1.0, -2.0, 3.0});

  std::vector<double> g = {0.3, -5.0, 1e-3};
  gs = {g};
  auto fresh = AdamState::for_sizes({3});
  std::vector<double> y = {1.0, -2.0, 3.0};
  ps = {y};
  adam_step(ps, gs, fresh);
  CHECK(std::abs(y[0] - (1.0 - 1e-3)) < 1e-8);
  CHECK(std::abs(y[1] - (-2.0 + 1e-3)) < 1e-8);
  CHECK(std::abs(y[2] - (3.0 - 1e-3)) < 1e-7);

  auto s1 = AdamState::for_sizes({3}), s2 = AdamState::for_sizes({3});
  std::vector<double> a = {1, 2, 3}, b = {1, 2, 3};
  std::vector<std::span<double>> pa = {a}, pb = {b};
  adam_step(pa, gs, s1);
  adam_step(pb, gs, s2);
  CHECK(a == b);
  CHECK(s1.m == s2.m);
  CHECK(s1.v == s2.v);
}

TEST_CASE("grad_check detects linear and corrupted gradients") {
  std::vector<double> w = {0.3, -1.2, 2.0}, x = {1.5, 0.25, -3.0};
  auto loss = [&] { return w[0] * x[0] + w[1] * x[1] + w[2] * x[2]; };
  std::vector<ParamSlot> slots = {{"w", w, x}};
  CHECK(grad_check(loss, slots).overall_max < 1e-8);
  std::vector<double> doubled = {3.0, 0.5, -6.0};
  slots = {{"w", w, doubled}};
  CHECK(grad_check(loss, slots).overall_max >= 0.3);
}

TEST_CASE("full tiny model gradient") {
  Rng rng(7);
  for (auto pooling : {Pooling::Max, Pooling::LastState}) {
    auto p = tiny_model(rng);
    const std::vector<std::vector<std::int32_t>> batch = {{3, 5, 1, 19, 7, 2, 9}, {4, 4, 12, 6, 1, 8, 15}};
    const std::vector<double> y = {1.0, 0.0};
    auto loss = [&] {
      std::vector<double> probs;
      for (const auto& ids : batch) probs.push_back(forward_sequence(p, ids, pooling));
      return bce_loss(probs, y).loss;
    };
    auto grads = LayerParams::zeros(p.dims());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      SequenceCache cache;
      const double prob = forward_sequence(p, batch[i], pooling, nullptr, &cache);
      backward_sequence(p, cache, (prob - y[i]) / static_cast<double>(batch.size()), pooling, grads);
    }
    const auto slots = param_slots(p, grads);
    const auto report = grad_check(loss, slots, 1e-5, 200, 1);
    for (const auto& [name, err] : report.per_param) CHECK_MESSAGE(err < 1e-4, name);
    CHECK(report.overall_max < 1e-4);
  }
}

TEST_CASE("dropout masks enter the gradient consistently") {
  Rng rng(8);
  auto p = tiny_model(rng);
  const std::vector<std::int32_t> ids = {3, 5, 1, 19, 7};
  const auto masks = sample_dropout(ids.size(), 4, 6, 0.3, rng);
  auto loss = [&] { return bce_loss(std::vector{forward_sequence(p, ids, Pooling::Max, &masks)}, std::vector{1.0}).loss; };
  auto grads = LayerParams::zeros(p.dims());
  SequenceCache cache;
  const double prob = forward_sequence(p, ids, Pooling::Max, &masks, &cache);
  backward_sequence(p, cache, prob - 1.0, Pooling::Max, grads);
  CHECK(grad_check(loss, param_slots(p, grads), 1e-5, 200, 2).overall_max < 1e-4);
}

TEST_CASE("checkpoint round trip and shape validation") {
  Rng rng(9);
  auto p = tiny_model(rng);
  hbtest::TempDir dir;
  write_checkpoint(make_checkpoint(p, {{"note", "x"}}), dir.file("m.ckpt"));
  const auto ck = read_checkpoint(dir.file("m.ckpt"));
  CHECK(ck.header.at("note") == "x");
  auto q = LayerParams::zeros(p.dims());
  load_parameters(ck, q);
  CHECK(q == p);

  auto wrong = LayerParams::zeros({30, 5, 3, 4, 3});
  try {
    load_parameters(ck, wrong);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("embedding") != std::string::npos);
  }
  dir.write("junk.ckpt", "not a checkpoint");
  CHECK_THROWS_AS(read_checkpoint(dir.file("junk.ckpt")), DataError);
}
