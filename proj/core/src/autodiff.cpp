#include "actfx/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "actfx/error.hpp"
#include "json.hpp"

namespace actfx {

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a,
                              const Tensor& b) {
  throw Error("bad-shape", std::string(op) + ": incompatible shapes " +
                               std::to_string(a.rows) + "x" +
                               std::to_string(a.cols) + " and " +
                               std::to_string(b.rows) + "x" +
                               std::to_string(b.cols));
}

// C += A * B
void mm_nn_acc(const Tensor& A, const Tensor& B, Tensor& C) {
  const int n = A.rows, k = A.cols, m = B.cols;
  for (int i = 0; i < n; ++i) {
    const double* arow = A.v.data() + static_cast<std::size_t>(i) * k;
    double* crow = C.v.data() + static_cast<std::size_t>(i) * m;
    for (int p = 0; p < k; ++p) {
      const double a = arow[p];
      if (a == 0.0) continue;
      const double* brow = B.v.data() + static_cast<std::size_t>(p) * m;
      for (int j = 0; j < m; ++j) crow[j] += a * brow[j];
    }
  }
}

// C += A * B^T
void mm_nt_acc(const Tensor& A, const Tensor& B, Tensor& C) {
  const int n = A.rows, k = A.cols, m = B.rows;
  for (int i = 0; i < n; ++i) {
    const double* arow = A.v.data() + static_cast<std::size_t>(i) * k;
    double* crow = C.v.data() + static_cast<std::size_t>(i) * m;
    for (int j = 0; j < m; ++j) {
      const double* brow = B.v.data() + static_cast<std::size_t>(j) * k;
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

// C += A^T * B
void mm_tn_acc(const Tensor& A, const Tensor& B, Tensor& C) {
  const int k = A.rows, n = A.cols, m = B.cols;
  for (int p = 0; p < k; ++p) {
    const double* arow = A.v.data() + static_cast<std::size_t>(p) * n;
    const double* brow = B.v.data() + static_cast<std::size_t>(p) * m;
    for (int i = 0; i < n; ++i) {
      const double a = arow[i];
      if (a == 0.0) continue;
      double* crow = C.v.data() + static_cast<std::size_t>(i) * m;
      for (int j = 0; j < m; ++j) crow[j] += a * brow[j];
    }
  }
}

double stable_logsumexp(const double* x, int n) {
  double mx = x[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, x[i]);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(x[i] - mx);
  return mx + std::log(s);
}

}  // namespace

// --- Params ---------------------------------------------------------------

Tensor& Params::add(const std::string& name, Tensor t, bool trainable) {
  if (entries_.count(name)) {
    throw Error("bad-param", "duplicate parameter name " + name);
  }
  auto& e = entries_[name];
  e.value = std::move(t);
  e.trainable = trainable;
  return e.value;
}

Tensor& Params::at(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw Error("bad-param", "unknown parameter " + name);
  }
  return it->second.value;
}

const Tensor& Params::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw Error("bad-param", "unknown parameter " + name);
  }
  return it->second.value;
}

bool Params::has(const std::string& name) const {
  return entries_.count(name) != 0;
}

bool Params::trainable(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw Error("bad-param", "unknown parameter " + name);
  }
  return it->second.trainable;
}

void Params::set_trainable(const std::string& name, bool flag) {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw Error("bad-param", "unknown parameter " + name);
  }
  it->second.trainable = flag;
}

void Params::freeze_all() {
  for (auto& [name, e] : entries_) e.trainable = false;
}

std::vector<std::string> Params::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, e] : entries_) out.push_back(name);
  return out;
}

void Params::save(const std::string& path) const {
  nlohmann::json manifest;
  manifest["tensors"] = nlohmann::json::array();
  for (const auto& [name, e] : entries_) {
    manifest["tensors"].push_back({{"name", name},
                                   {"rows", e.value.rows},
                                   {"cols", e.value.cols},
                                   {"trainable", e.trainable}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io-error", "cannot write " + path);
  out << "ARLW1\n" << manifest.dump() << "\n";
  for (const auto& [name, e] : entries_) {
    out.write(reinterpret_cast<const char*>(e.value.v.data()),
              static_cast<std::streamsize>(e.value.v.size() * sizeof(double)));
  }
  if (!out) throw Error("io-error", "short write to " + path);
}

Params Params::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io-error", "cannot read " + path);
  std::string magic, manifest_line;
  std::getline(in, magic);
  if (magic != "ARLW1") {
    throw Error("bad-format", path + " is not an ARLW1 params file");
  }
  std::getline(in, manifest_line);
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(manifest_line);
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad-format", e.what());
  }
  Params p;
  for (const auto& t : manifest.at("tensors")) {
    Tensor tensor(t.at("rows").get<int>(), t.at("cols").get<int>());
    in.read(reinterpret_cast<char*>(tensor.v.data()),
            static_cast<std::streamsize>(tensor.v.size() * sizeof(double)));
    if (!in) throw Error("bad-format", "truncated blob in " + path);
    p.add(t.at("name").get<std::string>(), std::move(tensor),
          t.at("trainable").get<bool>());
  }
  return p;
}

// --- Tape -------------------------------------------------------------------

ValueId Tape::push(Rec r) {
  recs_.push_back(std::move(r));
  return static_cast<ValueId>(recs_.size() - 1);
}

const Tensor& Tape::value(ValueId id) const {
  return recs_[static_cast<std::size_t>(id)].val;
}

ValueId Tape::input(Tensor t) {
  Rec r;
  r.tag = OpTag::Input;
  r.val = std::move(t);
  return push(std::move(r));
}

ValueId Tape::param(Params& params, const std::string& name) {
  Rec r;
  r.tag = OpTag::Param;
  r.val = params.at(name);
  r.param_name = name;
  return push(std::move(r));
}

ValueId Tape::matmul(ValueId a, ValueId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.cols != B.rows) shape_error("matmul", A, B);
  Rec r;
  r.tag = OpTag::Matmul;
  r.a = a;
  r.b = b;
  r.val = Tensor(A.rows, B.cols);
  mm_nn_acc(A, B, r.val);
  return push(std::move(r));
}

ValueId Tape::add(ValueId a, ValueId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (!A.same_shape(B)) shape_error("add", A, B);
  Rec r;
  r.tag = OpTag::Add;
  r.a = a;
  r.b = b;
  r.val = A;
  for (int i = 0; i < B.count(); ++i) r.val.v[i] += B.v[i];
  return push(std::move(r));
}

ValueId Tape::add_bias(ValueId x, ValueId bias) {
  const Tensor& X = value(x);
  const Tensor& B = value(bias);
  if (B.rows != 1 || B.cols != X.cols) shape_error("add_bias", X, B);
  Rec r;
  r.tag = OpTag::AddBias;
  r.a = x;
  r.b = bias;
  r.val = X;
  for (int i = 0; i < X.rows; ++i) {
    for (int j = 0; j < X.cols; ++j) r.val.at(i, j) += B.v[j];
  }
  return push(std::move(r));
}

ValueId Tape::mul(ValueId a, ValueId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (!A.same_shape(B)) shape_error("mul", A, B);
  Rec r;
  r.tag = OpTag::Mul;
  r.a = a;
  r.b = b;
  r.val = A;
  for (int i = 0; i < B.count(); ++i) r.val.v[i] *= B.v[i];
  return push(std::move(r));
}

ValueId Tape::concat_cols(ValueId a, ValueId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.rows != B.rows) shape_error("concat", A, B);
  Rec r;
  r.tag = OpTag::ConcatCols;
  r.a = a;
  r.b = b;
  r.val = Tensor(A.rows, A.cols + B.cols);
  for (int i = 0; i < A.rows; ++i) {
    std::copy_n(&A.v[static_cast<std::size_t>(i) * A.cols], A.cols,
                &r.val.v[static_cast<std::size_t>(i) * r.val.cols]);
    std::copy_n(&B.v[static_cast<std::size_t>(i) * B.cols], B.cols,
                &r.val.v[static_cast<std::size_t>(i) * r.val.cols + A.cols]);
  }
  return push(std::move(r));
}

ValueId Tape::slice_cols(ValueId x, int col_begin, int col_end) {
  const Tensor& X = value(x);
  if (col_begin < 0 || col_end > X.cols || col_begin >= col_end) {
    throw Error("bad-shape", "slice: bad column range [" +
                                 std::to_string(col_begin) + "," +
                                 std::to_string(col_end) + ") for width " +
                                 std::to_string(X.cols));
  }
  Rec r;
  r.tag = OpTag::SliceCols;
  r.a = x;
  r.i0 = col_begin;
  r.i1 = col_end;
  r.val = Tensor(X.rows, col_end - col_begin);
  for (int i = 0; i < X.rows; ++i) {
    std::copy_n(&X.v[static_cast<std::size_t>(i) * X.cols + col_begin],
                col_end - col_begin,
                &r.val.v[static_cast<std::size_t>(i) * r.val.cols]);
  }
  return push(std::move(r));
}

ValueId Tape::tanh_of(ValueId x) {
  Rec r;
  r.tag = OpTag::Tanh;
  r.a = x;
  r.val = value(x);
  for (auto& e : r.val.v) e = std::tanh(e);
  return push(std::move(r));
}

ValueId Tape::sigmoid_of(ValueId x) {
  Rec r;
  r.tag = OpTag::Sigmoid;
  r.a = x;
  r.val = value(x);
  for (auto& e : r.val.v) e = 1.0 / (1.0 + std::exp(-e));
  return push(std::move(r));
}

ValueId Tape::relu_of(ValueId x) {
  Rec r;
  r.tag = OpTag::Relu;
  r.a = x;
  r.val = value(x);
  for (auto& e : r.val.v) e = std::max(0.0, e);
  return push(std::move(r));
}

ValueId Tape::scale(ValueId x, double factor) {
  Rec r;
  r.tag = OpTag::Scale;
  r.a = x;
  r.factor = factor;
  r.val = value(x);
  for (auto& e : r.val.v) e *= factor;
  return push(std::move(r));
}

ValueId Tape::embed_rows(ValueId table, const std::vector<int>& tokens) {
  const Tensor& T = value(table);
  Rec r;
  r.tag = OpTag::EmbedRows;
  r.a = table;
  r.tokens = tokens;
  r.val = Tensor(static_cast<int>(tokens.size()), T.cols);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int row = tokens[i];
    if (row < 0 || row >= T.rows) {
      throw Error("bad-shape", "embed_rows: token id out of range");
    }
    std::copy_n(&T.v[static_cast<std::size_t>(row) * T.cols], T.cols,
                &r.val.v[i * static_cast<std::size_t>(T.cols)]);
  }
  return push(std::move(r));
}

ValueId Tape::row_scale(ValueId x, const std::vector<double>& weights) {
  const Tensor& X = value(x);
  if (static_cast<int>(weights.size()) != X.rows) {
    throw Error("bad-shape", "row_scale: weight count != rows");
  }
  Rec r;
  r.tag = OpTag::RowScale;
  r.a = x;
  r.weights = weights;
  r.val = X;
  for (int i = 0; i < X.rows; ++i) {
    for (int j = 0; j < X.cols; ++j) r.val.at(i, j) *= weights[i];
  }
  return push(std::move(r));
}

ValueId Tape::softmax_cross_entropy(ValueId logits, const Tensor& one_hot,
                                    const std::vector<double>& row_mask) {
  const Tensor& X = value(logits);
  if (!X.same_shape(one_hot)) shape_error("softmax_cross_entropy", X, one_hot);
  if (!row_mask.empty() && static_cast<int>(row_mask.size()) != X.rows) {
    throw Error("bad-shape", "softmax_cross_entropy: bad mask length");
  }
  Rec r;
  r.tag = OpTag::SoftmaxCE;
  r.a = logits;
  r.aux = one_hot;
  r.weights = row_mask;
  double loss = 0.0;
  for (int i = 0; i < X.rows; ++i) {
    const double w = row_mask.empty() ? 1.0 : row_mask[i];
    if (w == 0.0) continue;
    const double* row = &X.v[static_cast<std::size_t>(i) * X.cols];
    const double lse = stable_logsumexp(row, X.cols);
    double dot = 0.0;
    for (int j = 0; j < X.cols; ++j) dot += row[j] * one_hot.at(i, j);
    loss += w * (lse - dot);
  }
  r.val = Tensor(1, 1);
  r.val.v[0] = loss;
  return push(std::move(r));
}

ValueId Tape::sigmoid_cross_entropy(ValueId logits, const Tensor& targets) {
  const Tensor& X = value(logits);
  if (!X.same_shape(targets)) shape_error("sigmoid_cross_entropy", X, targets);
  Rec r;
  r.tag = OpTag::SigmoidCE;
  r.a = logits;
  r.aux = targets;
  double loss = 0.0;
  for (int i = 0; i < X.count(); ++i) {
    const double x = X.v[i];
    const double t = targets.v[i];
    loss += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
  }
  r.val = Tensor(1, 1);
  r.val.v[0] = loss;
  return push(std::move(r));
}

ValueId Tape::squared_error(ValueId pred, const Tensor& target,
                            const std::vector<double>& row_mask) {
  const Tensor& X = value(pred);
  if (!X.same_shape(target)) shape_error("squared_error", X, target);
  if (!row_mask.empty() && static_cast<int>(row_mask.size()) != X.rows) {
    throw Error("bad-shape", "squared_error: bad mask length");
  }
  Rec r;
  r.tag = OpTag::Sse;
  r.a = pred;
  r.aux = target;
  r.weights = row_mask;
  double loss = 0.0;
  for (int i = 0; i < X.rows; ++i) {
    const double w = row_mask.empty() ? 1.0 : row_mask[i];
    if (w == 0.0) continue;
    for (int j = 0; j < X.cols; ++j) {
      const double d = X.at(i, j) - target.at(i, j);
      loss += w * d * d;
    }
  }
  r.val = Tensor(1, 1);
  r.val.v[0] = loss;
  return push(std::move(r));
}

void Tape::backward(ValueId loss) {
  Rec& top = rec(loss);
  if (top.val.count() != 1) {
    throw Error("bad-shape", "backward: loss must be a scalar");
  }
  grads_.clear();
  for (auto& r : recs_) {
    r.grad = Tensor(r.val.rows, r.val.cols);
  }
  top.grad.v[0] = 1.0;

  for (int id = static_cast<int>(recs_.size()) - 1; id >= 0; --id) {
    Rec& r = recs_[static_cast<std::size_t>(id)];
    switch (r.tag) {
      case OpTag::Input:
        break;
      case OpTag::Param: {
        auto [it, inserted] =
            grads_.try_emplace(r.param_name, Tensor(r.val.rows, r.val.cols));
        Tensor& g = it->second;
        for (int i = 0; i < r.grad.count(); ++i) g.v[i] += r.grad.v[i];
        break;
      }
      case OpTag::Matmul: {
        mm_nt_acc(r.grad, rec(r.b).val, rec(r.a).grad);
        mm_tn_acc(rec(r.a).val, r.grad, rec(r.b).grad);
        break;
      }
      case OpTag::Add: {
        Tensor& ga = rec(r.a).grad;
        Tensor& gb = rec(r.b).grad;
        for (int i = 0; i < r.grad.count(); ++i) {
          ga.v[i] += r.grad.v[i];
          gb.v[i] += r.grad.v[i];
        }
        break;
      }
      case OpTag::AddBias: {
        Tensor& gx = rec(r.a).grad;
        Tensor& gbias = rec(r.b).grad;
        for (int i = 0; i < r.grad.count(); ++i) gx.v[i] += r.grad.v[i];
        for (int i = 0; i < r.grad.rows; ++i) {
          for (int j = 0; j < r.grad.cols; ++j) {
            gbias.v[j] += r.grad.at(i, j);
          }
        }
        break;
      }
      case OpTag::Mul: {
        Tensor& ga = rec(r.a).grad;
        Tensor& gb = rec(r.b).grad;
        const Tensor& va = rec(r.a).val;
        const Tensor& vb = rec(r.b).val;
        for (int i = 0; i < r.grad.count(); ++i) {
          ga.v[i] += r.grad.v[i] * vb.v[i];
          gb.v[i] += r.grad.v[i] * va.v[i];
        }
        break;
      }
      case OpTag::ConcatCols: {
        Rec& ra = rec(r.a);
        Rec& rb = rec(r.b);
        for (int i = 0; i < r.grad.rows; ++i) {
          for (int j = 0; j < ra.val.cols; ++j) {
            ra.grad.at(i, j) += r.grad.at(i, j);
          }
          for (int j = 0; j < rb.val.cols; ++j) {
            rb.grad.at(i, j) += r.grad.at(i, ra.val.cols + j);
          }
        }
        break;
      }
      case OpTag::SliceCols: {
        Rec& rx = rec(r.a);
        for (int i = 0; i < r.grad.rows; ++i) {
          for (int j = 0; j < r.grad.cols; ++j) {
            rx.grad.at(i, r.i0 + j) += r.grad.at(i, j);
          }
        }
        break;
      }
      case OpTag::Tanh: {
        Tensor& gx = rec(r.a).grad;
        for (int i = 0; i < r.grad.count(); ++i) {
          gx.v[i] += r.grad.v[i] * (1.0 - r.val.v[i] * r.val.v[i]);
        }
        break;
      }
      case OpTag::Sigmoid: {
        Tensor& gx = rec(r.a).grad;
        for (int i = 0; i < r.grad.count(); ++i) {
          gx.v[i] += r.grad.v[i] * r.val.v[i] * (1.0 - r.val.v[i]);
        }
        break;
      }
      case OpTag::Relu: {
        Tensor& gx = rec(r.a).grad;
        const Tensor& vx = rec(r.a).val;
        for (int i = 0; i < r.grad.count(); ++i) {
          if (vx.v[i] > 0.0) gx.v[i] += r.grad.v[i];
        }
        break;
      }
      case OpTag::Scale: {
        Tensor& gx = rec(r.a).grad;
        for (int i = 0; i < r.grad.count(); ++i) {
          gx.v[i] += r.grad.v[i] * r.factor;
        }
        break;
      }
      case OpTag::EmbedRows: {
        Rec& rt = rec(r.a);
        const int cols = rt.val.cols;
        for (std::size_t i = 0; i < r.tokens.size(); ++i) {
          double* dst =
              &rt.grad.v[static_cast<std::size_t>(r.tokens[i]) * cols];
          const double* src = &r.grad.v[i * static_cast<std::size_t>(cols)];
          for (int j = 0; j < cols; ++j) dst[j] += src[j];
        }
        break;
      }
      case OpTag::RowScale: {
        Tensor& gx = rec(r.a).grad;
        for (int i = 0; i < r.grad.rows; ++i) {
          for (int j = 0; j < r.grad.cols; ++j) {
            gx.at(i, j) += r.grad.at(i, j) * r.weights[i];
          }
        }
        break;
      }
      case OpTag::SoftmaxCE: {
        Rec& rx = rec(r.a);
        const double gs = r.grad.v[0];
        for (int i = 0; i < rx.val.rows; ++i) {
          const double w = r.weights.empty() ? 1.0 : r.weights[i];
          if (w == 0.0) continue;
          const double* row =
              &rx.val.v[static_cast<std::size_t>(i) * rx.val.cols];
          const double lse = stable_logsumexp(row, rx.val.cols);
          for (int j = 0; j < rx.val.cols; ++j) {
            const double p = std::exp(row[j] - lse);
            rx.grad.at(i, j) += gs * w * (p - r.aux.at(i, j));
          }
        }
        break;
      }
      case OpTag::SigmoidCE: {
        Rec& rx = rec(r.a);
        const double gs = r.grad.v[0];
        for (int i = 0; i < rx.val.count(); ++i) {
          const double p = 1.0 / (1.0 + std::exp(-rx.val.v[i]));
          rx.grad.v[i] += gs * (p - r.aux.v[i]);
        }
        break;
      }
      case OpTag::Sse: {
        Rec& rx = rec(r.a);
        const double gs = r.grad.v[0];
        for (int i = 0; i < rx.val.rows; ++i) {
          const double w = r.weights.empty() ? 1.0 : r.weights[i];
          if (w == 0.0) continue;
          for (int j = 0; j < rx.val.cols; ++j) {
            rx.grad.at(i, j) +=
                gs * w * 2.0 * (rx.val.at(i, j) - r.aux.at(i, j));
          }
        }
        break;
      }
    }
  }
}

// --- Optimizer ----------------------------------------------------------------

void Optimizer::step(Params& params, const std::map<std::string, Tensor>& grads) {
  ++t_;
  for (const auto& [name, g] : grads) {
    if (!params.has(name) || !params.trainable(name)) continue;
    Tensor& p = params.at(name);
    if (!p.same_shape(g)) shape_error("optimizer-step", p, g);
    if (cfg_.kind == OptimizerConfig::Kind::Sgd) {
      for (int i = 0; i < p.count(); ++i) {
        p.v[i] -= cfg_.learning_rate * g.v[i];
      }
      continue;
    }
    auto [mi, m_new] = m_.try_emplace(name, Tensor(p.rows, p.cols));
    auto [vi, v_new] = v_.try_emplace(name, Tensor(p.rows, p.cols));
    Tensor& m = mi->second;
    Tensor& v = vi->second;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (int i = 0; i < p.count(); ++i) {
      m.v[i] = cfg_.beta1 * m.v[i] + (1.0 - cfg_.beta1) * g.v[i];
      v.v[i] = cfg_.beta2 * v.v[i] + (1.0 - cfg_.beta2) * g.v[i] * g.v[i];
      const double mhat = m.v[i] / bc1;
      const double vhat = v.v[i] / bc2;
      p.v[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
  }
}

// --- grad_check -----------------------------------------------------------------

GradCheckResult grad_check(
    const std::function<double(Params&, std::map<std::string, Tensor>*)>& f,
    Params& params, double eps, int max_coords_per_tensor, std::uint64_t seed) {
  std::map<std::string, Tensor> analytic;
  f(params, &analytic);

  // splitmix64 for coordinate sampling
  auto next_u64 = [state = seed]() mutable {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };

  GradCheckResult result;
  for (const auto& name : params.names()) {
    if (!params.trainable(name)) continue;
    auto it = analytic.find(name);
    if (it == analytic.end()) continue;  // parameter unused by f
    Tensor& p = params.at(name);
    std::vector<int> coords;
    if (p.count() <= max_coords_per_tensor) {
      coords.resize(static_cast<std::size_t>(p.count()));
      for (int i = 0; i < p.count(); ++i) coords[static_cast<std::size_t>(i)] = i;
    } else {
      for (int i = 0; i < max_coords_per_tensor; ++i) {
        coords.push_back(
            static_cast<int>(next_u64() % static_cast<std::uint64_t>(p.count())));
      }
      std::sort(coords.begin(), coords.end());
      coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    }
    for (int c : coords) {
      const double saved = p.v[c];
      p.v[c] = saved + eps;
      const double up = f(params, nullptr);
      p.v[c] = saved - eps;
      const double down = f(params, nullptr);
      p.v[c] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double exact = it->second.v[c];
      const double denom =
          std::max({1e-8, std::abs(numeric), std::abs(exact)});
      const double rel = std::abs(numeric - exact) / denom;
      ++result.coords_checked;
      if (rel > result.max_rel_err) {
        result.max_rel_err = rel;
        result.worst_param = name + "[" + std::to_string(c) + "]";
      }
    }
  }
  return result;
}

}  // namespace actfx
