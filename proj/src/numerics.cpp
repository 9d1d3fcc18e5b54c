#include "hatebench/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hatebench/error.hpp"

namespace hatebench::numerics {

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

// ---- Parameters -------------------------------------------------------------

namespace {

LstmDirection lstm_zeros(std::size_t in, std::size_t h) {
  LstmDirection d;
  for (Tensor* t : {&d.W_i, &d.W_f, &d.W_o, &d.W_g}) *t = Tensor({in, h});
  for (Tensor* t : {&d.U_i, &d.U_f, &d.U_o, &d.U_g}) *t = Tensor({h, h});
  for (Tensor* t : {&d.b_i, &d.b_f, &d.b_o, &d.b_g}) *t = Tensor({h});
  return d;
}

void require_shape(bool ok, const std::string& what) {
  if (!ok) throw DataError("shape mismatch: " + what);
}

}  // namespace

LayerParams LayerParams::zeros(const ModelDims& d) {
  if (d.kernel % 2 == 0) throw ConfigError("kernel size must be odd for same-length convolution");
  LayerParams p;
  p.embedding = Tensor({d.vocab, d.embed});
  p.conv_w = Tensor({d.kernel, d.embed, d.filters});
  p.conv_b = Tensor({d.filters});
  p.forward = lstm_zeros(d.filters, d.hidden);
  p.backward = lstm_zeros(d.filters, d.hidden);
  p.out_w = Tensor({2 * d.hidden});
  p.out_b = Tensor({1});
  return p;
}

ModelDims LayerParams::dims() const {
  return {embedding.dim(0), embedding.dim(1), conv_w.dim(0), conv_w.dim(2), forward.b_i.dim(0)};
}

std::size_t LayerParams::parameter_count() const {
  std::size_t n = 0;
  for_each([&](const std::string&, const Tensor& t) { n += t.size(); });
  return n;
}

void LayerParams::set_zero() {
  for_each([](const std::string&, Tensor& t) { t.fill(0.0); });
}

bool LayerParams::all_finite() const {
  bool ok = true;
  for_each([&](const std::string&, const Tensor& t) { ok = ok && t.all_finite(); });
  return ok;
}

void glorot_uniform(Tensor& t, double fan_in, double fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (auto& v : t.values()) v = dist(rng);
}

void orthogonal(Tensor& t, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(t.dim(0));
  if (t.rank() != 2 || t.dim(0) != t.dim(1)) throw ConfigError("orthogonal: square matrix required");
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = dist(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Sign fix makes the draw uniform over the orthogonal group.
  for (Eigen::Index j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  t.mat() = q;
}

// ---- Layers -----------------------------------------------------------------

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor embedding_forward(std::span<const std::int32_t> ids, const Tensor& table) {
  const std::size_t d = table.dim(1);
  Tensor out({ids.size(), d});
  for (std::size_t t = 0; t < ids.size(); ++t) {
    const auto id = ids[t];
    if (id < 0 || static_cast<std::size_t>(id) >= table.dim(0))
      throw DataError("embedding: token id " + std::to_string(id) + " out of range for vocabulary " +
                      std::to_string(table.dim(0)));
    if (id == 0) continue;
    std::copy_n(table.data() + static_cast<std::size_t>(id) * d, d, out.data() + t * d);
  }
  return out;
}

void embedding_backward(std::span<const std::int32_t> ids, const Tensor& d_out, Tensor& d_table) {
  const std::size_t d = d_table.dim(1);
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] == 0) continue;
    double* row = d_table.data() + static_cast<std::size_t>(ids[t]) * d;
    const double* src = d_out.data() + t * d;
    for (std::size_t j = 0; j < d; ++j) row[j] += src[j];
  }
}

ConvCache conv1d_forward(const Mat& x, const Tensor& w, const Tensor& b, Activation act) {
  const auto k = static_cast<Eigen::Index>(w.dim(0));
  const auto d = static_cast<Eigen::Index>(w.dim(1));
  const auto f = static_cast<Eigen::Index>(w.dim(2));
  require_shape(x.cols() == d, "conv1d input width " + std::to_string(x.cols()) +
                                   " vs kernel depth " + std::to_string(d));
  require_shape(static_cast<Eigen::Index>(b.size()) == f, "conv1d bias");
  const Eigen::Index T = x.rows();
  const Eigen::Index half = k / 2;
  ConvCache c;
  c.windows = Mat::Zero(T, k * d);
  for (Eigen::Index t = 0; t < T; ++t)
    for (Eigen::Index j = 0; j < k; ++j) {
      const Eigen::Index src = t + j - half;
      if (src >= 0 && src < T) c.windows.row(t).segment(j * d, d) = x.row(src);
    }
  c.pre = c.windows * w.mat(static_cast<std::size_t>(k * d), static_cast<std::size_t>(f));
  c.pre.rowwise() += b.vec();
  c.out = act == Activation::Relu ? Mat(c.pre.cwiseMax(0.0)) : c.pre;
  return c;
}

Mat conv1d_backward(const ConvCache& c, const Mat& d_out, const Tensor& w, Tensor& d_w,
                    Tensor& d_b, Activation act) {
  const auto k = static_cast<Eigen::Index>(w.dim(0));
  const auto d = static_cast<Eigen::Index>(w.dim(1));
  const auto f = static_cast<Eigen::Index>(w.dim(2));
  const Eigen::Index T = c.pre.rows();
  const Eigen::Index half = k / 2;
  Mat d_pre = d_out;
  if (act == Activation::Relu) d_pre = d_pre.cwiseProduct((c.pre.array() > 0.0).cast<double>().matrix());
  d_w.mat(static_cast<std::size_t>(k * d), static_cast<std::size_t>(f)).noalias() +=
      c.windows.transpose() * d_pre;
  d_b.vec() += d_pre.colwise().sum();
  const Mat d_windows = d_pre * w.mat(static_cast<std::size_t>(k * d), static_cast<std::size_t>(f)).transpose();
  Mat dx = Mat::Zero(T, d);
  for (Eigen::Index t = 0; t < T; ++t)
    for (Eigen::Index j = 0; j < k; ++j) {
      const Eigen::Index src = t + j - half;
      if (src >= 0 && src < T) dx.row(src) += d_windows.row(t).segment(j * d, d);
    }
  return dx;
}

namespace {

Vec logistic(const Vec& z) {
  Vec out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = sigmoid(z[i]);
  return out;
}

}  // namespace

LstmStep lstm_cell(const Vec& x, const Vec& h_prev, const Vec& c_prev, const LstmDirection& p) {
  const auto F = static_cast<Eigen::Index>(p.W_i.dim(0));
  const auto H = static_cast<Eigen::Index>(p.W_i.dim(1));
  require_shape(x.size() == F, "lstm input width " + std::to_string(x.size()) + " vs " + std::to_string(F));
  require_shape(h_prev.size() == H && c_prev.size() == H, "lstm state width");
  LstmStep s;
  s.x = x;
  s.h_prev = h_prev;
  s.c_prev = c_prev;
  s.i = logistic(x * p.W_i.mat() + h_prev * p.U_i.mat() + p.b_i.vec());
  s.f = logistic(x * p.W_f.mat() + h_prev * p.U_f.mat() + p.b_f.vec());
  s.o = logistic(x * p.W_o.mat() + h_prev * p.U_o.mat() + p.b_o.vec());
  s.g = (x * p.W_g.mat() + h_prev * p.U_g.mat() + p.b_g.vec()).array().tanh().matrix();
  s.c = s.f.cwiseProduct(c_prev) + s.i.cwiseProduct(s.g);
  s.tanh_c = s.c.array().tanh().matrix();
  s.h = s.o.cwiseProduct(s.tanh_c);
  return s;
}

LstmStepGrads lstm_cell_backward(const LstmStep& s, const Vec& dh, const Vec& dc_next,
                                 const LstmDirection& p, LstmDirection& g) {
  const Vec d_o = dh.cwiseProduct(s.tanh_c);
  const Vec dc = dh.cwiseProduct(s.o).cwiseProduct((1.0 - s.tanh_c.array().square()).matrix()) + dc_next;
  const Vec d_i = dc.cwiseProduct(s.g);
  const Vec d_g = dc.cwiseProduct(s.i);
  const Vec d_f = dc.cwiseProduct(s.c_prev);

  const Vec a_i = d_i.array() * s.i.array() * (1.0 - s.i.array());
  const Vec a_f = d_f.array() * s.f.array() * (1.0 - s.f.array());
  const Vec a_o = d_o.array() * s.o.array() * (1.0 - s.o.array());
  const Vec a_g = d_g.array() * (1.0 - s.g.array().square());

  g.W_i.mat().noalias() += s.x.transpose() * a_i;
  g.W_f.mat().noalias() += s.x.transpose() * a_f;
  g.W_o.mat().noalias() += s.x.transpose() * a_o;
  g.W_g.mat().noalias() += s.x.transpose() * a_g;
  g.U_i.mat().noalias() += s.h_prev.transpose() * a_i;
  g.U_f.mat().noalias() += s.h_prev.transpose() * a_f;
  g.U_o.mat().noalias() += s.h_prev.transpose() * a_o;
  g.U_g.mat().noalias() += s.h_prev.transpose() * a_g;
  g.b_i.vec() += a_i;
  g.b_f.vec() += a_f;
  g.b_o.vec() += a_o;
  g.b_g.vec() += a_g;

  LstmStepGrads out;
  out.dx = a_i * p.W_i.mat().transpose() + a_f * p.W_f.mat().transpose() +
           a_o * p.W_o.mat().transpose() + a_g * p.W_g.mat().transpose();
  out.dh_prev = a_i * p.U_i.mat().transpose() + a_f * p.U_f.mat().transpose() +
                a_o * p.U_o.mat().transpose() + a_g * p.U_g.mat().transpose();
  out.dc_prev = dc.cwiseProduct(s.f);
  return out;
}

BiLstmCache bilstm_forward(const Mat& x, const LstmDirection& fwd, const LstmDirection& bwd) {
  const Eigen::Index T = x.rows();
  if (T < 1) throw DataError("bilstm: empty sequence");
  const auto H = static_cast<Eigen::Index>(fwd.b_i.size());
  BiLstmCache c;
  c.forward.resize(static_cast<std::size_t>(T));
  c.backward.resize(static_cast<std::size_t>(T));
  c.out = Mat(T, 2 * H);
  Vec h = Vec::Zero(H), cell = Vec::Zero(H);
  for (Eigen::Index t = 0; t < T; ++t) {
    auto& s = c.forward[static_cast<std::size_t>(t)];
    s = lstm_cell(x.row(t), h, cell, fwd);
    h = s.h;
    cell = s.c;
    c.out.row(t).head(H) = h;
  }
  h.setZero();
  cell.setZero();
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    auto& s = c.backward[static_cast<std::size_t>(t)];
    s = lstm_cell(x.row(t), h, cell, bwd);
    h = s.h;
    cell = s.c;
    c.out.row(t).tail(H) = h;
  }
  return c;
}

Mat bilstm_backward(const BiLstmCache& c, const Mat& d_out, const LstmDirection& fwd,
                    const LstmDirection& bwd, LstmDirection& d_fwd, LstmDirection& d_bwd) {
  const auto T = static_cast<Eigen::Index>(c.forward.size());
  const auto H = static_cast<Eigen::Index>(fwd.b_i.size());
  const auto F = static_cast<Eigen::Index>(fwd.W_i.dim(0));
  Mat dx = Mat::Zero(T, F);
  Vec dh = Vec::Zero(H), dc = Vec::Zero(H);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const Vec upstream = d_out.row(t).head(H) + dh;
    auto g = lstm_cell_backward(c.forward[static_cast<std::size_t>(t)], upstream, dc, fwd, d_fwd);
    dx.row(t) += g.dx;
    dh = g.dh_prev;
    dc = g.dc_prev;
  }
  dh.setZero();
  dc.setZero();
  for (Eigen::Index t = 0; t < T; ++t) {
    const Vec upstream = d_out.row(t).tail(H) + dh;
    auto g = lstm_cell_backward(c.backward[static_cast<std::size_t>(t)], upstream, dc, bwd, d_bwd);
    dx.row(t) += g.dx;
    dh = g.dh_prev;
    dc = g.dc_prev;
  }
  return dx;
}

PoolCache pooled_output(const Mat& hseq, std::span<const std::uint8_t> mask, const Tensor& w,
                        const Tensor& b, Pooling pooling, const Vec* dropout) {
  require_shape(static_cast<std::size_t>(hseq.rows()) == mask.size(), "pooling mask length");
  require_shape(static_cast<Eigen::Index>(w.size()) == hseq.cols(), "output weight length");
  PoolCache c;
  bool any = false;
  for (std::size_t t = 0; t < mask.size(); ++t) {
    if (!mask[t]) continue;
    if (!any) c.first = t;
    c.last = t;
    any = true;
  }
  if (!any) throw DataError("pooled_output: sequence has no unmasked position");
  const Eigen::Index width = hseq.cols();
  if (pooling == Pooling::Max) {
    c.pooled = Vec::Constant(width, -std::numeric_limits<double>::infinity());
    c.argmax.assign(static_cast<std::size_t>(width), c.first);
    for (std::size_t t = 0; t < mask.size(); ++t) {
      if (!mask[t]) continue;
      for (Eigen::Index j = 0; j < width; ++j) {
        const double v = hseq(static_cast<Eigen::Index>(t), j);
        if (v > c.pooled[j]) {
          c.pooled[j] = v;
          c.argmax[static_cast<std::size_t>(j)] = t;
        }
      }
    }
  } else {
    const Eigen::Index H = width / 2;
    c.pooled = Vec(width);
    c.pooled.head(H) = hseq.row(static_cast<Eigen::Index>(c.last)).head(H);
    c.pooled.tail(H) = hseq.row(static_cast<Eigen::Index>(c.first)).tail(H);
  }
  c.dropped = dropout ? Vec(c.pooled.cwiseProduct(*dropout)) : c.pooled;
  c.logit = c.dropped.dot(w.vec()) + b[0];
  c.prob = sigmoid(c.logit);
  return c;
}

Mat pooled_backward(const PoolCache& c, std::size_t rows, double d_logit, const Tensor& w,
                    Tensor& d_w, Tensor& d_b, Pooling pooling, const Vec* dropout) {
  d_w.vec() += d_logit * c.dropped;
  d_b[0] += d_logit;
  Vec d_pooled = d_logit * w.vec();
  if (dropout) d_pooled = d_pooled.cwiseProduct(*dropout);
  const Eigen::Index width = d_pooled.size();
  Mat d_h = Mat::Zero(static_cast<Eigen::Index>(rows), width);
  if (pooling == Pooling::Max) {
    for (Eigen::Index j = 0; j < width; ++j)
      d_h(static_cast<Eigen::Index>(c.argmax[static_cast<std::size_t>(j)]), j) += d_pooled[j];
  } else {
    const Eigen::Index H = width / 2;
    d_h.row(static_cast<Eigen::Index>(c.last)).head(H) += d_pooled.head(H);
    d_h.row(static_cast<Eigen::Index>(c.first)).tail(H) += d_pooled.tail(H);
  }
  return d_h;
}

// ---- Loss -------------------------------------------------------------------

BceResult bce_loss(std::span<const double> yhat, std::span<const double> y) {
  if (yhat.empty()) throw DataError("bce_loss: empty batch");
  if (yhat.size() != y.size()) throw DataError("bce_loss: length mismatch");
  BceResult r;
  r.grad.resize(yhat.size());
  const double n = static_cast<double>(yhat.size());
  for (std::size_t i = 0; i < yhat.size(); ++i) {
    const double p = std::clamp(yhat[i], kBceClamp, 1.0 - kBceClamp);
    r.loss -= y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
    r.grad[i] = (p - y[i]) / (p * (1.0 - p)) / n;
  }
  r.loss /= n;
  return r;
}

// ---- Whole-sequence model ---------------------------------------------------

DropoutMasks sample_dropout(std::size_t length, std::size_t filters, std::size_t hidden2,
                            double rate, Rng& rng) {
  DropoutMasks m;
  const double keep = 1.0 / (1.0 - rate);
  std::bernoulli_distribution drop(rate);
  m.conv = Mat(static_cast<Eigen::Index>(length), static_cast<Eigen::Index>(filters));
  for (Eigen::Index i = 0; i < m.conv.size(); ++i) m.conv.data()[i] = drop(rng) ? 0.0 : keep;
  m.pooled = Vec(static_cast<Eigen::Index>(hidden2));
  for (Eigen::Index i = 0; i < m.pooled.size(); ++i) m.pooled[i] = drop(rng) ? 0.0 : keep;
  return m;
}

double forward_sequence(const LayerParams& p, std::span<const std::int32_t> ids, Pooling pooling,
                        const DropoutMasks* masks, SequenceCache* cache) {
  if (ids.empty()) throw DataError("forward_sequence: empty sequence");
  SequenceCache local;
  SequenceCache& c = cache ? *cache : local;
  c.ids.assign(ids.begin(), ids.end());
  const Tensor emb = embedding_forward(ids, p.embedding);
  c.embedded = emb.mat();
  c.conv = conv1d_forward(c.embedded, p.conv_w, p.conv_b, Activation::Relu);
  if (masks) {
    c.masks = *masks;
    c.conv_dropped = c.conv.out.cwiseProduct(masks->conv);
  } else {
    c.masks.reset();
    c.conv_dropped = c.conv.out;
  }
  c.lstm = bilstm_forward(c.conv_dropped, p.forward, p.backward);
  const std::vector<std::uint8_t> mask(ids.size(), 1);
  c.pool = pooled_output(c.lstm.out, mask, p.out_w, p.out_b, pooling,
                         masks ? &masks->pooled : nullptr);
  return c.pool.prob;
}

void backward_sequence(const LayerParams& p, const SequenceCache& c, double d_logit,
                       Pooling pooling, LayerParams& g) {
  const Vec* pooled_mask = c.masks ? &c.masks->pooled : nullptr;
  const Mat d_h = pooled_backward(c.pool, c.ids.size(), d_logit, p.out_w, g.out_w, g.out_b,
                                  pooling, pooled_mask);
  Mat d_conv = bilstm_backward(c.lstm, d_h, p.forward, p.backward, g.forward, g.backward);
  if (c.masks) d_conv = d_conv.cwiseProduct(c.masks->conv);
  const Mat d_emb = conv1d_backward(c.conv, d_conv, p.conv_w, g.conv_w, g.conv_b, Activation::Relu);
  Tensor d_emb_t({c.ids.size(), p.embedding.dim(1)});
  d_emb_t.mat() = d_emb;
  embedding_backward(c.ids, d_emb_t, g.embedding);
}

// ---- Optimiser --------------------------------------------------------------

AdamState AdamState::for_sizes(const std::vector<std::size_t>& sizes, AdamConfig config) {
  AdamState s;
  s.config = config;
  for (auto n : sizes) {
    s.m.emplace_back(n, 0.0);
    s.v.emplace_back(n, 0.0);
  }
  return s;
}

AdamState AdamState::for_params(const LayerParams& params, AdamConfig config) {
  std::vector<std::size_t> sizes;
  params.for_each([&](const std::string&, const Tensor& t) { sizes.push_back(t.size()); });
  return for_sizes(sizes, config);
}

void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw DataError("adam_step: parameter/gradient/state block count mismatch");
  ++state.step;
  const auto& cfg = state.config;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto& m = state.m[b];
    auto& v = state.v[b];
    if (params[b].size() != grads[b].size() || params[b].size() != m.size())
      throw DataError("adam_step: shape mismatch in block " + std::to_string(b));
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double g = grads[b][i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      params[b][i] -= cfg.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.epsilon);
    }
  }
}

void adam_step(LayerParams& params, const LayerParams& grads, AdamState& state) {
  std::vector<std::span<double>> p;
  std::vector<std::span<const double>> g;
  params.for_each([&](const std::string&, Tensor& t) { p.push_back(t.values()); });
  grads.for_each([&](const std::string&, const Tensor& t) { g.push_back(t.values()); });
  adam_step(p, g, state);
}

// ---- Gradient verification --------------------------------------------------

GradCheckReport grad_check(const std::function<double()>& loss, std::span<const ParamSlot> params,
                           double eps, std::size_t coords_per_param, std::uint64_t seed) {
  GradCheckReport report;
  Rng rng(seed);
  for (const auto& slot : params) {
    if (slot.value.size() != slot.grad.size())
      throw DataError("grad_check: value/gradient size mismatch for " + slot.name);
    std::vector<std::size_t> coords(slot.value.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (coords.size() > coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(coords_per_param);
      std::sort(coords.begin(), coords.end());
    }
    double worst = 0.0;
    for (auto i : coords) {
      const double saved = slot.value[i];
      slot.value[i] = saved + eps;
      const double up = loss();
      slot.value[i] = saved - eps;
      const double down = loss();
      slot.value[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down))
        throw TrainingError("grad_check: non-finite loss while perturbing " + slot.name);
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = slot.grad[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
    report.per_param.emplace_back(slot.name, worst);
    report.overall_max = std::max(report.overall_max, worst);
  }
  return report;
}

std::vector<ParamSlot> param_slots(LayerParams& params, const LayerParams& grads) {
  std::vector<ParamSlot> slots;
  std::vector<std::span<const double>> g;
  grads.for_each([&](const std::string&, const Tensor& t) { g.push_back(t.values()); });
  std::size_t k = 0;
  params.for_each([&](const std::string& name, Tensor& t) {
    slots.push_back({name, t.values(), g[k++]});
  });
  return slots;
}

}  // namespace hatebench::numerics
