#include "swarm/nn/layers.hpp"

#include <cmath>

#include "swarm/errors.hpp"

namespace swarm::nn {
namespace {

void require_recorded(bool recorded, const char* block) {
  if (!recorded) throw StateError(std::string(block) + ": backward() without a recorded forward()");
}

void require_size(Eigen::Index got, std::size_t want, const char* what) {
  if (static_cast<std::size_t>(got) != want) {
    throw ShapeError(std::string(what) + ": expected width " + std::to_string(want) + ", got " +
                     std::to_string(got));
  }
}

Vec sigmoid(const Vec& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

}  // namespace

void initialize_uniform(ParameterSet& params, RngStream& rng) {
  for (std::size_t p = 0; p < params.count(); ++p) {
    const double bound = params.init_bound(p);
    for (auto& v : params.tensor(p).data) v = rng.uniform(-bound, bound);
  }
}

Vec softmax(const Vec& logits) {
  const double shift = logits.maxCoeff();
  Vec e = (logits.array() - shift).exp().matrix();
  return e / e.sum();
}

Vec log_softmax(const Vec& logits) {
  const double shift = logits.maxCoeff();
  const double lse = std::log((logits.array() - shift).exp().sum()) + shift;
  return (logits.array() - lse).matrix();
}

// ---- Dense ---------------------------------------------------------------

Dense Dense::create(ParameterSet& params, const std::string& name, std::size_t in,
                    std::size_t out) {
  const double bound = std::sqrt(1.0 / static_cast<double>(in));
  Dense d;
  d.in = in;
  d.out = out;
  d.weight = params.add(name + ".weight", {out, in}, bound);
  d.bias = params.add(name + ".bias", {out}, bound);
  return d;
}

Vec Dense::forward(const ParameterSet& params, const Vec& x, Record* record) const {
  require_size(x.size(), in, "dense input");
  if (record) {
    record->input = x;
    record->recorded = true;
  }
  return params.matrix(weight) * x + params.vector(bias);
}

Vec Dense::backward(const ParameterSet& params, ParameterSet& grads, const Record& record,
                    const Vec& dy) const {
  require_recorded(record.recorded, "dense");
  require_size(dy.size(), out, "dense upstream gradient");
  grads.matrix(weight).noalias() += dy * record.input.transpose();
  grads.vector(bias) += dy;
  return params.matrix(weight).transpose() * dy;
}

// ---- FeedForward2 --------------------------------------------------------

FeedForward2 FeedForward2::create(ParameterSet& params, const std::string& name, std::size_t in,
                                  std::size_t hidden, std::size_t out) {
  FeedForward2 f;
  f.first = Dense::create(params, name + ".0", in, hidden);
  f.second = Dense::create(params, name + ".1", hidden, out);
  return f;
}

Vec FeedForward2::forward(const ParameterSet& params, const Vec& x, Record* record) const {
  Vec pre = first.forward(params, x, record ? &record->first : nullptr);
  Vec hidden = pre.cwiseMax(0.0);
  Vec y = second.forward(params, hidden, record ? &record->second : nullptr);
  if (record) {
    record->pre_activation = std::move(pre);
    record->recorded = true;
  }
  return y;
}

Vec FeedForward2::backward(const ParameterSet& params, ParameterSet& grads,
                           const Record& record, const Vec& dy) const {
  require_recorded(record.recorded, "feed-forward");
  Vec dh = second.backward(params, grads, record.second, dy);
  dh = (record.pre_activation.array() > 0.0).select(dh, 0.0);
  return first.backward(params, grads, record.first, dh);
}

// ---- LstmCell ------------------------------------------------------------

LstmCell LstmCell::create(ParameterSet& params, const std::string& name, std::size_t input,
                          std::size_t width) {
  LstmCell c;
  c.input = input;
  c.width = width;
  c.gates = Dense::create(params, name, input + width, 4 * width);
  return c;
}

LstmState LstmCell::forward(const ParameterSet& params, const Vec& x, const LstmState& prev,
                            Record* record) const {
  require_size(x.size(), input, "lstm input");
  require_size(prev.hidden.size(), width, "lstm hidden state");
  require_size(prev.cell.size(), width, "lstm cell state");
  const auto w = static_cast<Eigen::Index>(width);
  Vec joint(x.size() + w);
  joint << x, prev.hidden;
  const Vec z = gates.forward(params, joint, record ? &record->gates : nullptr);

  Vec i = sigmoid(z.segment(0, w));
  Vec f = sigmoid(z.segment(w, w));
  Vec g = z.segment(2 * w, w).array().tanh().matrix();
  Vec o = sigmoid(z.segment(3 * w, w));

  LstmState next;
  next.cell = f.cwiseProduct(prev.cell) + i.cwiseProduct(g);
  Vec tanh_cell = next.cell.array().tanh().matrix();
  next.hidden = o.cwiseProduct(tanh_cell);

  if (record) {
    record->i = std::move(i);
    record->f = std::move(f);
    record->g = std::move(g);
    record->o = std::move(o);
    record->cell_prev = prev.cell;
    record->tanh_cell = std::move(tanh_cell);
    record->recorded = true;
  }
  return next;
}

LstmCell::Grads LstmCell::backward(const ParameterSet& params, ParameterSet& grads,
                                   const Record& record, const LstmState& d_next) const {
  require_recorded(record.recorded, "lstm");
  const auto w = static_cast<Eigen::Index>(width);
  const auto& dh = d_next.hidden;
  const Vec one = Vec::Ones(w);

  const Vec dc = d_next.cell +
                 dh.cwiseProduct(record.o).cwiseProduct(one - record.tanh_cell.cwiseAbs2());
  const Vec d_o = dh.cwiseProduct(record.tanh_cell);
  const Vec d_i = dc.cwiseProduct(record.g);
  const Vec d_g = dc.cwiseProduct(record.i);
  const Vec d_f = dc.cwiseProduct(record.cell_prev);

  Vec dz(4 * w);
  dz.segment(0, w) = d_i.cwiseProduct(record.i).cwiseProduct(one - record.i);
  dz.segment(w, w) = d_f.cwiseProduct(record.f).cwiseProduct(one - record.f);
  dz.segment(2 * w, w) = d_g.cwiseProduct(one - record.g.cwiseAbs2());
  dz.segment(3 * w, w) = d_o.cwiseProduct(record.o).cwiseProduct(one - record.o);

  const Vec d_joint = gates.backward(params, grads, record.gates, dz);
  Grads out;
  out.input = d_joint.head(static_cast<Eigen::Index>(input));
  out.state.hidden = d_joint.tail(w);
  out.state.cell = dc.cwiseProduct(record.f);
  return out;
}

// ---- MultiHeadAttention --------------------------------------------------

MultiHeadAttention MultiHeadAttention::create(ParameterSet& params, const std::string& name,
                                              std::size_t heads, std::size_t width,
                                              std::size_t key_width) {
  MultiHeadAttention a;
  a.heads = heads;
  a.width = width;
  a.key_width = key_width;
  const double in_bound = std::sqrt(1.0 / static_cast<double>(width));
  for (std::size_t h = 0; h < heads; ++h) {
    const std::string idx = std::to_string(h);
    a.query.push_back(params.add(name + ".query." + idx, {width, key_width}, in_bound));
    a.key.push_back(params.add(name + ".key." + idx, {width, key_width}, in_bound));
    a.value.push_back(params.add(name + ".value." + idx, {width, key_width}, in_bound));
  }
  a.output = params.add(name + ".output", {heads * key_width, width},
                        std::sqrt(1.0 / static_cast<double>(heads * key_width)));
  return a;
}

Mat MultiHeadAttention::forward(const ParameterSet& params, const Mat& x, Record* record) const {
  require_size(x.cols(), width, "attention input");
  const auto n = x.rows();
  const auto d = static_cast<Eigen::Index>(key_width);
  const double scale = 1.0 / std::sqrt(static_cast<double>(key_width));

  Mat concat(n, static_cast<Eigen::Index>(heads) * d);
  if (record) {
    record->q.assign(heads, Mat());
    record->k.assign(heads, Mat());
    record->v.assign(heads, Mat());
    record->attention.assign(heads, Mat());
  }
  for (std::size_t h = 0; h < heads; ++h) {
    Mat q = x * params.matrix(query[h]);
    Mat k = x * params.matrix(key[h]);
    Mat v = x * params.matrix(value[h]);
    Mat scores = (q * k.transpose()) * scale;
    Mat attn(n, n);
    for (Eigen::Index r = 0; r < n; ++r) attn.row(r) = softmax(scores.row(r).transpose()).transpose();
    concat.block(0, static_cast<Eigen::Index>(h) * d, n, d) = attn * v;
    if (record) {
      record->q[h] = std::move(q);
      record->k[h] = std::move(k);
      record->v[h] = std::move(v);
      record->attention[h] = std::move(attn);
    }
  }
  Mat y = concat * params.matrix(output);
  if (record) {
    record->input = x;
    record->concat = std::move(concat);
    record->recorded = true;
  }
  return y;
}

Mat MultiHeadAttention::backward(const ParameterSet& params, ParameterSet& grads,
                                 const Record& record, const Mat& dy) const {
  require_recorded(record.recorded, "attention");
  const auto n = record.input.rows();
  if (dy.rows() != n) throw ShapeError("attention upstream gradient: row count mismatch");
  require_size(dy.cols(), width, "attention upstream gradient");
  const auto d = static_cast<Eigen::Index>(key_width);
  const double scale = 1.0 / std::sqrt(static_cast<double>(key_width));
  const Mat& x = record.input;

  grads.matrix(output).noalias() += record.concat.transpose() * dy;
  const Mat d_concat = dy * params.matrix(output).transpose();

  Mat dx = Mat::Zero(n, x.cols());
  for (std::size_t h = 0; h < heads; ++h) {
    const Mat& a = record.attention[h];
    const Mat d_head = d_concat.block(0, static_cast<Eigen::Index>(h) * d, n, d);
    const Mat d_attn = d_head * record.v[h].transpose();
    const Mat d_v = a.transpose() * d_head;

    Mat d_scores(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const double dot = d_attn.row(r).dot(a.row(r));
      d_scores.row(r) = a.row(r).array() * (d_attn.row(r).array() - dot);
    }
    d_scores *= scale;
    const Mat d_q = d_scores * record.k[h];
    const Mat d_k = d_scores.transpose() * record.q[h];

    grads.matrix(query[h]).noalias() += x.transpose() * d_q;
    grads.matrix(key[h]).noalias() += x.transpose() * d_k;
    grads.matrix(value[h]).noalias() += x.transpose() * d_v;
    dx.noalias() += d_q * params.matrix(query[h]).transpose();
    dx.noalias() += d_k * params.matrix(key[h]).transpose();
    dx.noalias() += d_v * params.matrix(value[h]).transpose();
  }
  return dx;
}

}  // namespace swarm::nn
