#include "actfx/layers.hpp"

#include <cmath>

namespace actfx {

Tensor glorot_uniform(int rows, int cols, Rng& rng) {
  Tensor t(rows, cols);
  const double a = std::sqrt(6.0 / (rows + cols));
  for (auto& v : t.v) v = rng.uniform_real(-a, a);
  return t;
}

Tensor embedding_uniform(int rows, int cols, Rng& rng) {
  Tensor t(rows, cols);
  for (auto& v : t.v) v = rng.uniform_real(-0.1, 0.1);
  return t;
}

void add_dense(Params& params, const std::string& prefix, int in_dim,
               int out_dim, Rng& rng) {
  params.add(prefix + ".w", glorot_uniform(in_dim, out_dim, rng));
  params.add(prefix + ".b", glorot_uniform(1, out_dim, rng));
}

ValueId dense(Tape& tape, Params& params, const std::string& prefix,
              ValueId x) {
  const ValueId w = tape.param(params, prefix + ".w");
  const ValueId b = tape.param(params, prefix + ".b");
  return tape.add_bias(tape.matmul(x, w), b);
}

void add_lstm(Params& params, const std::string& prefix, int input_dim,
              int hidden_dim, Rng& rng) {
  params.add(prefix + ".wx", glorot_uniform(input_dim, 4 * hidden_dim, rng));
  params.add(prefix + ".wh", glorot_uniform(hidden_dim, 4 * hidden_dim, rng));
  params.add(prefix + ".b", glorot_uniform(1, 4 * hidden_dim, rng));
}

LstmState lstm_initial_state(Tape& tape, int batch, int hidden_dim) {
  return {tape.input(Tensor(batch, hidden_dim)),
          tape.input(Tensor(batch, hidden_dim))};
}

LstmState lstm_step(Tape& tape, Params& params, const std::string& prefix,
                    int hidden_dim, ValueId x, LstmState prev,
                    const std::vector<double>& keep) {
  const ValueId wx = tape.param(params, prefix + ".wx");
  const ValueId wh = tape.param(params, prefix + ".wh");
  const ValueId b = tape.param(params, prefix + ".b");

  const ValueId z = tape.add_bias(
      tape.add(tape.matmul(x, wx), tape.matmul(prev.h, wh)), b);
  const ValueId gi = tape.sigmoid_of(tape.slice_cols(z, 0, hidden_dim));
  const ValueId gf =
      tape.sigmoid_of(tape.slice_cols(z, hidden_dim, 2 * hidden_dim));
  const ValueId gc =
      tape.tanh_of(tape.slice_cols(z, 2 * hidden_dim, 3 * hidden_dim));
  const ValueId go =
      tape.sigmoid_of(tape.slice_cols(z, 3 * hidden_dim, 4 * hidden_dim));

  const ValueId c_new =
      tape.add(tape.mul(gf, prev.c), tape.mul(gi, gc));
  const ValueId h_new = tape.mul(go, tape.tanh_of(c_new));

  bool all_keep = true;
  for (double k : keep) {
    if (k != 1.0) {
      all_keep = false;
      break;
    }
  }
  if (all_keep) return {h_new, c_new};

  std::vector<double> drop(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) drop[i] = 1.0 - keep[i];
  const ValueId c_next = tape.add(tape.row_scale(c_new, keep),
                                  tape.row_scale(prev.c, drop));
  const ValueId h_next = tape.add(tape.row_scale(h_new, keep),
                                  tape.row_scale(prev.h, drop));
  return {h_next, c_next};
}

}  // namespace actfx
