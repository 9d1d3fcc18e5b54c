#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hatebench/rng.hpp"
#include "hatebench/tensor.hpp"

namespace hatebench::numerics {

// ---- Parameters -------------------------------------------------------------

/// Weights of one LSTM direction. Inputs multiply from the left (x * W).
struct LstmDirection {
  Tensor W_i, W_f, W_o, W_g;  // F x H
  Tensor U_i, U_f, U_o, U_g;  // H x H
  Tensor b_i, b_f, b_o, b_g;  // H

  bool operator==(const LstmDirection&) const = default;

  template <typename Self, typename Fn>
  static void visit(Self& self, const std::string& prefix, Fn&& fn) {
    fn(prefix + "W_i", self.W_i); fn(prefix + "W_f", self.W_f);
    fn(prefix + "W_o", self.W_o); fn(prefix + "W_g", self.W_g);
    fn(prefix + "U_i", self.U_i); fn(prefix + "U_f", self.U_f);
    fn(prefix + "U_o", self.U_o); fn(prefix + "U_g", self.U_g);
    fn(prefix + "b_i", self.b_i); fn(prefix + "b_f", self.b_f);
    fn(prefix + "b_o", self.b_o); fn(prefix + "b_g", self.b_g);
  }
};

struct ModelDims {
  std::size_t vocab = 2;
  std::size_t embed = 100;
  std::size_t kernel = 3;
  std::size_t filters = 64;
  std::size_t hidden = 50;
};

/// Every trainable array of the CNN-BiLSTM. The same struct doubles as the
/// gradient accumulator.
struct LayerParams {
  Tensor embedding;  // V x d_e, row 0 is the frozen pad row
  Tensor conv_w;     // k x d_e x F
  Tensor conv_b;     // F
  LstmDirection forward, backward;
  Tensor out_w;  // 2H
  Tensor out_b;  // 1

  static LayerParams zeros(const ModelDims& dims);
  ModelDims dims() const;

  /// fn(name, tensor) over every array in a fixed order.
  template <typename Fn>
  void for_each(Fn&& fn) { visit_all(*this, fn); }
  template <typename Fn>
  void for_each(Fn&& fn) const { visit_all(*this, fn); }

  std::size_t parameter_count() const;
  void set_zero();
  bool all_finite() const;
  bool operator==(const LayerParams&) const = default;

 private:
  template <typename Self, typename Fn>
  static void visit_all(Self& self, Fn& fn) {
    fn(std::string("embedding"), self.embedding);
    fn(std::string("conv_w"), self.conv_w);
    fn(std::string("conv_b"), self.conv_b);
    LstmDirection::visit(self.forward, "fwd.", fn);
    LstmDirection::visit(self.backward, "bwd.", fn);
    fn(std::string("out_w"), self.out_w);
    fn(std::string("out_b"), self.out_b);
  }
};

/// Glorot/Xavier uniform in +-sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor& t, double fan_in, double fan_out, Rng& rng);
/// Square orthogonal matrix from the QR factorisation of a Gaussian draw.
void orthogonal(Tensor& t, Rng& rng);

// ---- Layers -----------------------------------------------------------------

/// Rows of the table for each id; id 0 (pad) always yields zeros.
Tensor embedding_forward(std::span<const std::int32_t> ids, const Tensor& table);
/// Adds upstream rows into the table gradient, skipping the pad row.
void embedding_backward(std::span<const std::int32_t> ids, const Tensor& d_out, Tensor& d_table);

enum class Activation { Relu, Linear };

struct ConvCache {
  Mat windows;  // T x (k * d_e), zero padded
  Mat pre;      // T x F
  Mat out;      // T x F
};

/// Same-length 1-D convolution: floor(k/2) zero rows of padding on each side
/// (k must be odd), then activation.
ConvCache conv1d_forward(const Mat& x, const Tensor& w, const Tensor& b,
                         Activation act = Activation::Relu);
/// Returns dX and accumulates into dW / db. The rectifier's derivative at 0
/// is taken as 0.
Mat conv1d_backward(const ConvCache& cache, const Mat& d_out, const Tensor& w, Tensor& d_w,
                    Tensor& d_b, Activation act = Activation::Relu);

/// Everything one LSTM step needs for its backward pass.
struct LstmStep {
  Vec x, h_prev, c_prev;
  Vec i, f, o, g;  // gate activations
  Vec c, tanh_c, h;
};

LstmStep lstm_cell(const Vec& x, const Vec& h_prev, const Vec& c_prev, const LstmDirection& p);

struct LstmStepGrads {
  Vec dx, dh_prev, dc_prev;
};

/// Backpropagates dh (into h) and dc (into the cell state from the next
/// step), accumulating parameter gradients into `grads`.
LstmStepGrads lstm_cell_backward(const LstmStep& step, const Vec& dh, const Vec& dc,
                                 const LstmDirection& p, LstmDirection& grads);

struct BiLstmCache {
  std::vector<LstmStep> forward;   // forward[t] processed input row t
  std::vector<LstmStep> backward;  // backward[t] processed input row t
  Mat out;                         // T x 2H, row t = [h_fwd_t ; h_bwd_t]
};

BiLstmCache bilstm_forward(const Mat& x, const LstmDirection& fwd, const LstmDirection& bwd);
Mat bilstm_backward(const BiLstmCache& cache, const Mat& d_out, const LstmDirection& fwd,
                    const LstmDirection& bwd, LstmDirection& d_fwd, LstmDirection& d_bwd);

enum class Pooling { Max, LastState };

struct PoolCache {
  Vec pooled;                       // h*
  Vec dropped;                      // h* after dropout (equals pooled at inference)
  std::vector<std::size_t> argmax;  // max pooling: source row per column
  std::size_t first = 0, last = 0;  // first/last unmasked rows
  double logit = 0, prob = 0.5;
};

/// h* from the unmasked rows (max pooling, or the forward state at the last
/// row joined with the backward state at the first row), optional dropout,
/// then sigmoid(w . h* + b). Throws when the mask selects no row.
PoolCache pooled_output(const Mat& hseq, std::span<const std::uint8_t> mask, const Tensor& w,
                        const Tensor& b, Pooling pooling = Pooling::Max,
                        const Vec* dropout = nullptr);

/// Given dLoss/dlogit, accumulates dw and db and returns dLoss/dHseq.
Mat pooled_backward(const PoolCache& cache, std::size_t rows, double d_logit, const Tensor& w,
                    Tensor& d_w, Tensor& d_b, Pooling pooling = Pooling::Max,
                    const Vec* dropout = nullptr);

double sigmoid(double x);

// ---- Loss -------------------------------------------------------------------

struct BceResult {
  double loss = 0;
  std::vector<double> grad;  // dLoss/dyhat per element
};

inline constexpr double kBceClamp = 1e-7;

/// Mean binary cross-entropy; predictions are clamped to
/// [1e-7, 1 - 1e-7] before the logarithms.
BceResult bce_loss(std::span<const double> yhat, std::span<const double> y);

// ---- Whole-sequence model ---------------------------------------------------

struct DropoutMasks {
  Mat conv;    // T x F, entries 0 or 1/(1-p)
  Vec pooled;  // 2H
};

struct SequenceCache {
  std::vector<std::int32_t> ids;
  Mat embedded;
  ConvCache conv;
  Mat conv_dropped;
  BiLstmCache lstm;
  PoolCache pool;
  std::optional<DropoutMasks> masks;
};

/// Runs the CNN-BiLSTM over the unpadded ids (at least one). Returns the
/// probability; `cache` is filled when given.
double forward_sequence(const LayerParams& p, std::span<const std::int32_t> ids,
                        Pooling pooling = Pooling::Max, const DropoutMasks* masks = nullptr,
                        SequenceCache* cache = nullptr);

/// Accumulates dLoss/dparams given dLoss/dlogit for one sequence.
void backward_sequence(const LayerParams& p, const SequenceCache& cache, double d_logit,
                       Pooling pooling, LayerParams& grads);

DropoutMasks sample_dropout(std::size_t length, std::size_t filters, std::size_t hidden2,
                            double rate, Rng& rng);

// ---- Optimiser --------------------------------------------------------------

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<std::vector<double>> m, v;
  std::uint64_t step = 0;

  static AdamState for_sizes(const std::vector<std::size_t>& sizes, AdamConfig config = {});
  static AdamState for_params(const LayerParams& params, AdamConfig config = {});
};

/// Bias-corrected Adam update of each parameter block.
void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state);
void adam_step(LayerParams& params, const LayerParams& grads, AdamState& state);

// ---- Gradient verification --------------------------------------------------

struct ParamSlot {
  std::string name;
  std::span<double> value;
  std::span<const double> grad;
};

struct GradCheckReport {
  std::vector<std::pair<std::string, double>> per_param;  // max relative error
  double overall_max = 0;
};

/// Central differences on up to `coords_per_param` sampled coordinates per
/// block (all of them when the block is smaller). Relative error is
/// |a - n| / max(|a|, |n|, 1e-12).
GradCheckReport grad_check(const std::function<double()>& loss, std::span<const ParamSlot> params,
                           double eps = 1e-5, std::size_t coords_per_param = 200,
                           std::uint64_t seed = 0);

std::vector<ParamSlot> param_slots(LayerParams& params, const LayerParams& grads);

}  // namespace hatebench::numerics
