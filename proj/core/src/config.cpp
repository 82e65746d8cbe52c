#include "actfx/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "actfx/error.hpp"

namespace actfx {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      // generator
      "seed", "train_count", "val_count", "test_ordinary_count",
      "test_2hop_ta_count", "test_2hop_qh_count", "balance", "blind_tests",
      // training
      "stage1_epochs", "stage2_epochs", "batch_size", "learning_rate",
      "optimizer", "vector_length", "embedding_size", "stage1_pairs",
      "lambda_coord", "patience", "identity_fraction", "aux_code_weight",
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

long long to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error("bad-config", key + " expects an integer, got " + value);
  }
}

double to_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error("bad-config", key + " expects a number, got " + value);
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw Error("bad-config", key + " expects true or false, got " + value);
}

template <typename T>
void read_if(const std::map<std::string, std::string>& kv,
             const std::string& key, T& out) {
  auto it = kv.find(key);
  if (it == kv.end()) return;
  if constexpr (std::is_same_v<T, bool>) {
    out = to_bool(key, it->second);
  } else if constexpr (std::is_same_v<T, double>) {
    out = to_real(key, it->second);
  } else if constexpr (std::is_same_v<T, std::string>) {
    out = it->second;
  } else {
    out = static_cast<T>(to_int(key, it->second));
  }
}

}  // namespace

std::map<std::string, std::string> parse_flat_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("bad-config", "cannot read config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("bad-config", path + ":" + std::to_string(lineno) +
                                    ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw Error("bad-config", path + ":" + std::to_string(lineno) +
                                    ": empty key or value");
    }
    if (!known_keys().count(key)) {
      throw Error("bad-config", "unknown config key " + key);
    }
    if (kv.count(key)) {
      throw Error("bad-config", "duplicate config key " + key);
    }
    kv[key] = value;
  }
  return kv;
}

GenConfig make_gen_config(const std::map<std::string, std::string>& kv) {
  GenConfig cfg;
  read_if(kv, "seed", cfg.seed);
  read_if(kv, "train_count", cfg.train_count);
  read_if(kv, "val_count", cfg.val_count);
  read_if(kv, "test_ordinary_count", cfg.test_ordinary_count);
  read_if(kv, "test_2hop_ta_count", cfg.test_2hop_ta_count);
  read_if(kv, "test_2hop_qh_count", cfg.test_2hop_qh_count);
  read_if(kv, "balance", cfg.balance);
  read_if(kv, "blind_tests", cfg.blind_tests);
  if (cfg.train_count < 0 || cfg.val_count < 0 || cfg.test_ordinary_count < 0 ||
      cfg.test_2hop_ta_count < 0 || cfg.test_2hop_qh_count < 0) {
    throw Error("bad-config", "split sizes cannot be negative");
  }
  return cfg;
}

TrainConfig make_train_config(const std::map<std::string, std::string>& kv) {
  TrainConfig cfg;
  read_if(kv, "seed", cfg.seed);
  read_if(kv, "stage1_epochs", cfg.stage1_epochs);
  read_if(kv, "stage2_epochs", cfg.stage2_epochs);
  read_if(kv, "batch_size", cfg.batch_size);
  read_if(kv, "learning_rate", cfg.learning_rate);
  read_if(kv, "optimizer", cfg.optimizer);
  read_if(kv, "vector_length", cfg.vector_length);
  read_if(kv, "embedding_size", cfg.embedding_size);
  read_if(kv, "stage1_pairs", cfg.stage1_pairs);
  read_if(kv, "lambda_coord", cfg.lambda_coord);
  read_if(kv, "patience", cfg.patience);
  read_if(kv, "identity_fraction", cfg.identity_fraction);
  read_if(kv, "aux_code_weight", cfg.aux_code_weight);
  validate_config(cfg);
  return cfg;
}

}  // namespace actfx
