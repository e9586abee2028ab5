#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "swarm/nn/tensor.hpp"
#include "swarm/rng.hpp"

namespace swarm::nn {

/// Fills every parameter with U(-bound, bound) in canonical order, where the
/// bound is sqrt(1 / fan_in) of the owning layer.
void initialize_uniform(ParameterSet& params, RngStream& rng);

/// Numerically stable (max-subtracted) softmax and log-softmax.
Vec softmax(const Vec& logits);
Vec log_softmax(const Vec& logits);

/// y = W x + b with W of shape (out, in).
struct Dense {
  std::size_t weight = 0;
  std::size_t bias = 0;
  std::size_t in = 0;
  std::size_t out = 0;

  struct Record {
    Vec input;
    bool recorded = false;
  };

  static Dense create(ParameterSet& params, const std::string& name, std::size_t in,
                      std::size_t out);

  Vec forward(const ParameterSet& params, const Vec& x, Record* record = nullptr) const;
  /// Accumulates dW, db into `grads`; returns dL/dx. Throws StateError if
  /// `record` was never filled by forward().
  Vec backward(const ParameterSet& params, ParameterSet& grads, const Record& record,
               const Vec& dy) const;
};

/// Two dense layers with a ReLU between them.
struct FeedForward2 {
  Dense first;
  Dense second;

  struct Record {
    Dense::Record first;
    Dense::Record second;
    Vec pre_activation;
    bool recorded = false;
  };

  static FeedForward2 create(ParameterSet& params, const std::string& name, std::size_t in,
                             std::size_t hidden, std::size_t out);

  Vec forward(const ParameterSet& params, const Vec& x, Record* record = nullptr) const;
  Vec backward(const ParameterSet& params, ParameterSet& grads, const Record& record,
               const Vec& dy) const;
};

struct LstmState {
  Vec hidden;
  Vec cell;
};

/// Standard LSTM cell. Gate pre-activations z = W [x; h] + b are laid out as
/// [input, forget, candidate, output] blocks of `width` rows each.
struct LstmCell {
  Dense gates;
  std::size_t input = 0;
  std::size_t width = 0;

  struct Record {
    Dense::Record gates;
    Vec i, f, g, o;
    Vec cell_prev;
    Vec tanh_cell;
    bool recorded = false;
  };

  struct Grads {
    Vec input;
    LstmState state;  // w.r.t. the previous (hidden, cell)
  };

  static LstmCell create(ParameterSet& params, const std::string& name, std::size_t input,
                         std::size_t width);

  LstmState forward(const ParameterSet& params, const Vec& x, const LstmState& prev,
                    Record* record = nullptr) const;
  /// `d_next` holds dL/dh' and dL/dc' for the produced state.
  Grads backward(const ParameterSet& params, ParameterSet& grads, const Record& record,
                 const LstmState& d_next) const;
};

/// Multi-head scaled dot-product self-attention over the rows of X:
///   head_h = softmax(X Wq_h (X Wk_h)^T / sqrt(d_k)) X Wv_h
///   Y = [head_1 ... head_H] Wo
/// with Wq_h, Wk_h, Wv_h of shape (width, d_k) and Wo of shape (H d_k, width).
struct MultiHeadAttention {
  std::vector<std::size_t> query;
  std::vector<std::size_t> key;
  std::vector<std::size_t> value;
  std::size_t output = 0;
  std::size_t heads = 0;
  std::size_t width = 0;
  std::size_t key_width = 0;

  struct Record {
    Mat input;
    std::vector<Mat> q, k, v, attention;
    Mat concat;
    bool recorded = false;
  };

  static MultiHeadAttention create(ParameterSet& params, const std::string& name,
                                   std::size_t heads, std::size_t width, std::size_t key_width);

  Mat forward(const ParameterSet& params, const Mat& x, Record* record = nullptr) const;
  Mat backward(const ParameterSet& params, ParameterSet& grads, const Record& record,
               const Mat& dy) const;
};

}  // namespace swarm::nn
