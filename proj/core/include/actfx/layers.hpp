#pragma once

#include <string>
#include <vector>

#include "actfx/autodiff.hpp"
#include "actfx/rng.hpp"

namespace actfx {

/// Seeded uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(int rows, int cols, Rng& rng);
/// Seeded uniform(-0.1, 0.1) for embedding tables.
Tensor embedding_uniform(int rows, int cols, Rng& rng);

/// Registers weight + bias under prefix (".w", ".b").
void add_dense(Params& params, const std::string& prefix, int in_dim,
               int out_dim, Rng& rng);

/// x * W + b, with leaf ids resolved by prefix.
ValueId dense(Tape& tape, Params& params, const std::string& prefix,
              ValueId x);

/// Standard 4-gate LSTM cell parameters: input weights (E x 4H), recurrent
/// weights (H x 4H) and bias (1 x 4H), gate order [input, forget, cell,
/// output].
void add_lstm(Params& params, const std::string& prefix, int input_dim,
              int hidden_dim, Rng& rng);

struct LstmState {
  ValueId h;
  ValueId c;
};

/// One LSTM step from primitives. `keep` masks padded rows: rows with
/// keep[i] == 0 carry the previous state through unchanged.
LstmState lstm_step(Tape& tape, Params& params, const std::string& prefix,
                    int hidden_dim, ValueId x, LstmState prev,
                    const std::vector<double>& keep);

LstmState lstm_initial_state(Tape& tape, int batch, int hidden_dim);

}  // namespace actfx
