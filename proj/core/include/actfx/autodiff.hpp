#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace actfx {

/// Dense row-major 64-bit real matrix; vectors are 1 x n.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c) {}

  double& at(int i, int j) { return v[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const {
    return v[static_cast<std::size_t>(i) * cols + j];
  }
  int count() const { return rows * cols; }
  bool same_shape(const Tensor& o) const {
    return rows == o.rows && cols == o.cols;
  }

  bool operator==(const Tensor&) const = default;
};

/// Named parameter tensors with per-tensor trainable flags. Iteration order
/// is name order, which keeps optimizer updates and serialization stable.
class Params {
public:
  Tensor& add(const std::string& name, Tensor t, bool trainable = true);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool has(const std::string& name) const;
  bool trainable(const std::string& name) const;
  void set_trainable(const std::string& name, bool flag);
  void freeze_all();

  std::vector<std::string> names() const;
  std::size_t size() const { return entries_.size(); }

  /// Versioned binary format: "ARLW1\n", one-line JSON manifest, then the
  /// little-endian float64 blob in manifest order.
  void save(const std::string& path) const;
  static Params load(const std::string& path);

  bool operator==(const Params&) const = default;

private:
  struct Entry {
    Tensor value;
    bool trainable = true;
    bool operator==(const Entry&) const = default;
  };
  std::map<std::string, Entry> entries_;
};

using ValueId = int;

/// Append-only reverse-mode tape. Forward values are computed eagerly;
/// backward() walks the records once in reverse.
class Tape {
public:
  // Leaves.
  ValueId input(Tensor t);  // constant, receives no gradient
  ValueId param(Params& params, const std::string& name);

  // Primitives. Shape mismatches throw Error("bad-shape") naming the op.
  ValueId matmul(ValueId a, ValueId b);
  ValueId add(ValueId a, ValueId b);
  ValueId add_bias(ValueId x, ValueId bias);  // bias 1 x n broadcast over rows
  ValueId mul(ValueId a, ValueId b);          // elementwise
  ValueId concat_cols(ValueId a, ValueId b);
  ValueId slice_cols(ValueId x, int col_begin, int col_end);
  ValueId tanh_of(ValueId x);
  ValueId sigmoid_of(ValueId x);
  ValueId relu_of(ValueId x);
  ValueId scale(ValueId x, double factor);
  /// Rows of `table` gathered by token id; gradients scatter-add back.
  ValueId embed_rows(ValueId table, const std::vector<int>& tokens);
  /// y[i,:] = x[i,:] * weights[i]; weights is a constant per-row factor.
  ValueId row_scale(ValueId x, const std::vector<double>& weights);

  // Scalar losses (1 x 1 results), summed over rows.
  ValueId softmax_cross_entropy(ValueId logits, const Tensor& one_hot,
                                const std::vector<double>& row_mask = {});
  ValueId sigmoid_cross_entropy(ValueId logits, const Tensor& targets);
  ValueId squared_error(ValueId pred, const Tensor& target,
                        const std::vector<double>& row_mask = {});

  const Tensor& value(ValueId id) const;
  std::size_t size() const { return recs_.size(); }

  /// Seeds d(loss)=1 and accumulates parameter gradients; loss must be 1x1.
  void backward(ValueId loss);

  /// Gradients by parameter name, available after backward().
  const std::map<std::string, Tensor>& param_grads() const { return grads_; }

private:
  enum class OpTag {
    Input, Param, Matmul, Add, AddBias, Mul, ConcatCols, SliceCols, Tanh,
    Sigmoid, Relu, Scale, EmbedRows, RowScale, SoftmaxCE, SigmoidCE, Sse,
  };

  struct Rec {
    OpTag tag;
    Tensor val;
    Tensor grad;
    int a = -1;
    int b = -1;
    int i0 = 0;  // slice begin
    int i1 = 0;  // slice end
    double factor = 1.0;
    Tensor aux;                   // targets
    std::vector<double> weights;  // row masks / row factors
    std::vector<int> tokens;
    std::string param_name;
  };

  ValueId push(Rec rec);
  Rec& rec(ValueId id) { return recs_[static_cast<std::size_t>(id)]; }

  std::vector<Rec> recs_;
  std::map<std::string, Tensor> grads_;
};

struct OptimizerConfig {
  enum class Kind { Sgd, Adam };
  Kind kind = Kind::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Plain gradient descent or bias-corrected adaptive moments. Frozen
/// tensors are never touched.
class Optimizer {
public:
  explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) {}

  void step(Params& params, const std::map<std::string, Tensor>& grads);

private:
  OptimizerConfig cfg_;
  long long t_ = 0;
  std::map<std::string, Tensor> m_;
  std::map<std::string, Tensor> v_;
};

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  int coords_checked = 0;
};

/// Central-difference check of a scalar-valued program. `f` must return the
/// loss and, when `grads` is non-null, fill it with analytic gradients.
/// All coordinates of small trainable tensors are checked; larger tensors
/// are sampled (seeded) down to `max_coords_per_tensor`, at least 200 total.
GradCheckResult grad_check(
    const std::function<double(Params&, std::map<std::string, Tensor>*)>& f,
    Params& params, double eps, int max_coords_per_tensor = 200,
    std::uint64_t seed = 1);

}  // namespace actfx
