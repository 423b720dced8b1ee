#include "alrn/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include <fmt/format.h>

#include "alrn/error.hpp"

namespace alrn {

const Tensor& Var::value() const {
  if (tape_ == nullptr) throw ValidationError("Var: uninitialised handle");
  return tape_->value(index_);
}

void Tape::check_owned(Var v, const char* what) const {
  if (v.tape() != this || v.index() >= nodes_.size()) {
    throw ValidationError(fmt::format("{}: value was not recorded on this tape", what));
  }
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, false, false, {}, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::watch(std::string name, Tensor value) {
  for (const Node& n : nodes_) {
    if (!n.name.empty() && n.name == name) {
      throw ValidationError(fmt::format("parameter '{}' watched twice", name));
    }
  }
  nodes_.push_back(Node{std::move(value), {}, true, false, {}, std::move(name)});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> parents, BackwardFn backward) {
  bool needs = false;
  for (Var p : parents) {
    check_owned(p, "record");
    needs = needs || nodes_[p.index()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), {}, needs, false, needs ? std::move(backward) : BackwardFn{}, {}});
  return Var(this, nodes_.size() - 1);
}

bool Tape::requires_grad(Var v) const {
  check_owned(v, "requires_grad");
  return nodes_[v.index()].requires_grad;
}

Tensor* Tape::grad(Var v) {
  Node& n = nodes_[v.index()];
  if (!n.requires_grad) return nullptr;
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape(), 0.0);
    n.has_grad = true;
  }
  return &n.grad;
}

Gradients Tape::backward(Var loss) {
  check_owned(loss, "backward");
  if (loss.value().size() != 1) {
    throw ShapeError(fmt::format("backward: loss must have one element, got {}", shape_string(loss.shape())));
  }
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  if (Tensor* g = grad(loss)) (*g)[0] = 1.0;
  for (std::size_t i = loss.index() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.has_grad && n.backward) {
      Tensor out_grad = std::move(n.grad);
      n.grad = Tensor();
      n.has_grad = false;
      n.backward(*this, out_grad);
    }
  }
  Gradients grads;
  for (Node& n : nodes_) {
    if (n.name.empty()) continue;
    grads.emplace(n.name, n.has_grad ? n.grad : Tensor(n.value.shape(), 0.0));
  }
  return grads;
}

namespace {

void same_tape(Var a, Var b, const char* op) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw ValidationError(fmt::format("{}: operands live on different tapes", op));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(fmt::format("{}: shapes {} and {} differ", op, shape_string(a.shape()), shape_string(b.shape())));
  }
}

void accumulate(Tensor* dst, const Tensor& src) {
  if (dst == nullptr) return;
  for (std::size_t i = 0; i < src.size(); ++i) (*dst)[i] += src[i];
}

}  // namespace

Var matmul(Var a, Var b) {
  same_tape(a, b, "matmul");
  Tape& t = *a.tape();
  Tensor out = alrn::matmul(a.value(), b.value());
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  return t.record(std::move(out), {a, b}, [a, b, m, k, n](Tape& tape, const Tensor& g) {
    if (Tensor* ga = tape.grad(a)) {
      kernels::gemm(false, true, m, k, n, g.data(), b.value().data(), ga->data(), true);
    }
    if (Tensor* gb = tape.grad(b)) {
      kernels::gemm(true, false, k, n, m, a.value().data(), g.data(), gb->data(), true);
    }
  });
}

Var add(Var a, Var b) {
  same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& tape, const Tensor& g) {
    accumulate(tape.grad(a), g);
    accumulate(tape.grad(b), g);
  });
}

Var add_bias(Var x, Var b) {
  same_tape(x, b, "add_bias");
  const std::size_t n = x.value().cols();
  if (b.value().size() != n) {
    throw ShapeError(fmt::format("add_bias: input {} with bias {}", shape_string(x.shape()), shape_string(b.shape())));
  }
  Tensor out = x.value();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t j = 0; j < n; ++j) row[j] += b.value()[j];
  }
  return x.tape()->record(std::move(out), {x, b}, [x, b, n](Tape& tape, const Tensor& g) {
    accumulate(tape.grad(x), g);
    if (Tensor* gb = tape.grad(b)) {
      for (std::size_t r = 0; r < g.rows(); ++r) {
        auto row = g.row(r);
        for (std::size_t j = 0; j < n; ++j) (*gb)[j] += row[j];
      }
    }
  });
}

Var mul(Var a, Var b) {
  same_tape(a, b, "mul");
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& tape, const Tensor& g) {
    if (Tensor* ga = tape.grad(a)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * b.value()[i];
    }
    if (Tensor* gb = tape.grad(b)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * a.value()[i];
    }
  });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  return x.tape()->record(Tensor::scalar(s), {x}, [x](Tape& tape, const Tensor& g) {
    if (Tensor* gx = tape.grad(x)) {
      for (double& v : gx->values()) v += g[0];
    }
  });
}

Var gelu(Var x) {
  return x.tape()->record(alrn::gelu(x.value()), {x}, [x](Tape& tape, const Tensor& g) {
    if (Tensor* gx = tape.grad(x)) {
      const Tensor& in = x.value();
      for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * gelu_derivative(in[i]);
    }
  });
}

Var softmax(Var x) {
  Tape& t = *x.tape();
  const std::size_t out_index = t.size();  // record() appends exactly one node
  return t.record(alrn::softmax(x.value()), {x}, [x, out_index](Tape& tape, const Tensor& g) {
    Tensor* gx = tape.grad(x);
    if (gx == nullptr) return;
    const Tensor& y = tape.value(out_index);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      auto yr = y.row(r);
      auto gr = g.row(r);
      auto out = gx->row(r);
      double dot = 0.0;
      for (std::size_t j = 0; j < yr.size(); ++j) dot += yr[j] * gr[j];
      for (std::size_t j = 0; j < yr.size(); ++j) out[j] += yr[j] * (gr[j] - dot);
    }
  });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  same_tape(x, gamma, "layer_norm");
  same_tape(x, beta, "layer_norm");
  Tensor out = alrn::layer_norm(x.value(), gamma.value(), beta.value(), eps);
  const Tensor& in = x.value();
  const std::size_t rows = in.rows(), d = in.cols();
  // Cache the normalised input and inverse deviation per row.
  auto xhat = std::make_shared<Tensor>(in.shape());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    auto row = in.row(r);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= static_cast<double>(d);
    (*inv_std)[r] = 1.0 / std::sqrt(var + eps);
    auto xr = xhat->row(r);
    for (std::size_t j = 0; j < d; ++j) xr[j] = (row[j] - mean) * (*inv_std)[r];
  }
  return x.tape()->record(std::move(out), {x, gamma, beta},
                          [x, gamma, beta, xhat, inv_std, rows, d](Tape& tape, const Tensor& g) {
    if (Tensor* gg = tape.grad(gamma)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < d; ++j) (*gg)[j] += g.at(r, j) * xhat->at(r, j);
      }
    }
    if (Tensor* gb = tape.grad(beta)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < d; ++j) (*gb)[j] += g.at(r, j);
      }
    }
    if (Tensor* gx = tape.grad(x)) {
      const Tensor& gm = gamma.value();
      const double inv_d = 1.0 / static_cast<double>(d);
      for (std::size_t r = 0; r < rows; ++r) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double dy = g.at(r, j) * gm[j];
          sum_dy += dy;
          sum_dy_xhat += dy * xhat->at(r, j);
        }
        for (std::size_t j = 0; j < d; ++j) {
          const double dy = g.at(r, j) * gm[j];
          gx->at(r, j) += (*inv_std)[r] * (dy - inv_d * sum_dy - xhat->at(r, j) * inv_d * sum_dy_xhat);
        }
      }
    }
  });
}

Var cross_entropy(Var logits, std::span<const int> labels) {
  const double loss = alrn::cross_entropy(logits.value(), labels);
  std::vector<int> lab(labels.begin(), labels.end());
  return logits.tape()->record(Tensor::scalar(loss), {logits}, [logits, lab](Tape& tape, const Tensor& g) {
    Tensor* gl = tape.grad(logits);
    if (gl == nullptr) return;
    Tensor p = alrn::softmax(logits.value());
    const double scale = g[0] / static_cast<double>(lab.size());
    for (std::size_t r = 0; r < p.rows(); ++r) {
      for (std::size_t j = 0; j < p.cols(); ++j) {
        const double onehot = static_cast<int>(j) == lab[r] ? 1.0 : 0.0;
        gl->at(r, j) += scale * (p.at(r, j) - onehot);
      }
    }
  });
}

Var embedding(Var table, std::span<const int> ids) {
  const Tensor& tab = table.value();
  if (tab.rank() != 2) throw ShapeError("embedding: table must be a matrix");
  const std::size_t vocab = tab.shape()[0], d = tab.shape()[1];
  Tensor out({ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw ValidationError(fmt::format("embedding: id {} outside table of {} rows", ids[i], vocab));
    }
    auto src = tab.row(static_cast<std::size_t>(ids[i]));
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  std::vector<int> idv(ids.begin(), ids.end());
  return table.tape()->record(std::move(out), {table}, [table, idv, d](Tape& tape, const Tensor& g) {
    Tensor* gt = tape.grad(table);
    if (gt == nullptr) return;
    for (std::size_t i = 0; i < idv.size(); ++i) {
      auto dst = gt->row(static_cast<std::size_t>(idv[i]));
      auto src = g.row(i);
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
  });
}

Var gather_rows(Var x, std::span<const std::size_t> rows) {
  const Tensor& in = x.value();
  const std::size_t d = in.cols();
  Tensor out({rows.size(), d});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= in.rows()) throw ValidationError("gather_rows: row index out of range");
    auto src = in.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return x.tape()->record(std::move(out), {x}, [x, idx, d](Tape& tape, const Tensor& g) {
    Tensor* gx = tape.grad(x);
    if (gx == nullptr) return;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto dst = gx->row(idx[i]);
      auto src = g.row(i);
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
  });
}

Var dropout(Var x, double rate, Rng& rng) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw ValidationError("dropout: rate must be below 1");
  const double keep_scale = 1.0 / (1.0 - rate);
  auto scale = std::make_shared<std::vector<double>>(x.value().size());
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    (*scale)[i] = rng.bernoulli(rate) ? 0.0 : keep_scale;
    out[i] *= (*scale)[i];
  }
  return x.tape()->record(std::move(out), {x}, [x, scale](Tape& tape, const Tensor& g) {
    Tensor* gx = tape.grad(x);
    if (gx == nullptr) return;
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * (*scale)[i];
  });
}

Var attention(Var q, Var k, Var v, const AttentionLayout& layout) {
  same_tape(q, k, "attention");
  same_tape(q, v, "attention");
  const std::size_t B = layout.batch, T = layout.seq_len, H = layout.heads;
  const Tensor& Q = q.value();
  const Tensor& K = k.value();
  const Tensor& V = v.value();
  if (Q.rank() != 2 || Q.shape() != K.shape() || Q.shape() != V.shape() || Q.shape()[0] != B * T) {
    throw ShapeError(fmt::format("attention: q {} k {} v {} for batch {} x seq {}", shape_string(Q.shape()),
                                 shape_string(K.shape()), shape_string(V.shape()), B, T));
  }
  const std::size_t D = Q.shape()[1];
  if (H == 0 || D % H != 0) throw ShapeError("attention: d_model not divisible by heads");
  if (layout.key_mask.size() != B * T) throw ShapeError("attention: key mask length mismatch");
  const std::size_t dh = D / H;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // Attention weights per (batch, head, query) over the unmasked keys of the
  // same sequence; stored densely as [B*H*T x T] with zeros at padded keys.
  auto probs = std::make_shared<std::vector<double>>(B * H * T * T, 0.0);
  std::vector<std::size_t> keys;
  std::vector<double> scores;
  Tensor out({B * T, D});
  for (std::size_t b = 0; b < B; ++b) {
    keys.clear();
    for (std::size_t j = 0; j < T; ++j) {
      if (layout.key_mask[b * T + j] != 0) keys.push_back(j);
    }
    if (keys.empty()) throw ValidationError("attention: sequence with no unmasked keys");
    scores.resize(keys.size());
    for (std::size_t h = 0; h < H; ++h) {
      const std::size_t off = h * dh;
      for (std::size_t i = 0; i < T; ++i) {
        const double* qi = Q.data() + (b * T + i) * D + off;
        for (std::size_t kk = 0; kk < keys.size(); ++kk) {
          const double* kj = K.data() + (b * T + keys[kk]) * D + off;
          double s = 0.0;
          for (std::size_t c = 0; c < dh; ++c) s += qi[c] * kj[c];
          scores[kk] = s * scale;
        }
        kernels::softmax_row(scores, scores);
        double* prow = probs->data() + ((b * H + h) * T + i) * T;
        double* oi = out.data() + (b * T + i) * D + off;
        for (std::size_t kk = 0; kk < keys.size(); ++kk) {
          prow[keys[kk]] = scores[kk];
          const double* vj = V.data() + (b * T + keys[kk]) * D + off;
          for (std::size_t c = 0; c < dh; ++c) oi[c] += scores[kk] * vj[c];
        }
      }
    }
  }

  std::vector<int> mask(layout.key_mask.begin(), layout.key_mask.end());
  return q.tape()->record(std::move(out), {q, k, v},
                          [q, k, v, probs, mask, B, T, H, D, dh, scale](Tape& tape, const Tensor& g) {
    Tensor* gq = tape.grad(q);
    Tensor* gk = tape.grad(k);
    Tensor* gv = tape.grad(v);
    const Tensor& Q = q.value();
    const Tensor& K = k.value();
    const Tensor& V = v.value();
    std::vector<double> dp(T);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t h = 0; h < H; ++h) {
        const std::size_t off = h * dh;
        for (std::size_t i = 0; i < T; ++i) {
          const double* prow = probs->data() + ((b * H + h) * T + i) * T;
          const double* gi = g.data() + (b * T + i) * D + off;
          // dP_ij = dO_i . V_j ; dS = P * (dP - sum_j P_ij dP_ij)
          double dot = 0.0;
          for (std::size_t j = 0; j < T; ++j) {
            if (mask[b * T + j] == 0) {
              dp[j] = 0.0;
              continue;
            }
            const double* vj = V.data() + (b * T + j) * D + off;
            double s = 0.0;
            for (std::size_t c = 0; c < dh; ++c) s += gi[c] * vj[c];
            dp[j] = s;
            dot += prow[j] * s;
          }
          for (std::size_t j = 0; j < T; ++j) {
            if (mask[b * T + j] == 0) continue;
            const double pij = prow[j];
            if (gv != nullptr) {
              double* gvj = gv->data() + (b * T + j) * D + off;
              for (std::size_t c = 0; c < dh; ++c) gvj[c] += pij * gi[c];
            }
            const double ds = pij * (dp[j] - dot) * scale;
            if (gq != nullptr) {
              double* gqi = gq->data() + (b * T + i) * D + off;
              const double* kj = K.data() + (b * T + j) * D + off;
              for (std::size_t c = 0; c < dh; ++c) gqi[c] += ds * kj[c];
            }
            if (gk != nullptr) {
              double* gkj = gk->data() + (b * T + j) * D + off;
              const double* qi = Q.data() + (b * T + i) * D + off;
              for (std::size_t c = 0; c < dh; ++c) gkj[c] += ds * qi[c];
            }
          }
        }
      }
    }
  });
}

}  // namespace alrn
