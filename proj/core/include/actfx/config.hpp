#pragma once

#include <map>
#include <string>

#include "actfx/learner.hpp"
#include "actfx/worldgen.hpp"

namespace actfx {

/// Flat `key = value` config text: one pair per line, '#' comments, no
/// sections. Environment variables are never consulted. Unknown keys throw
/// Error("bad-config").
std::map<std::string, std::string> parse_flat_config(const std::string& path);

GenConfig make_gen_config(const std::map<std::string, std::string>& kv);
TrainConfig make_train_config(const std::map<std::string, std::string>& kv);

}  // namespace actfx
