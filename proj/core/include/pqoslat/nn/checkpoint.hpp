#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pqoslat/nn/tensor.hpp"

namespace pqoslat::nn {

/// Self-describing model checkpoint: layer/config document plus named flat
/// parameter arrays. Values are stored as JSON decimals in shortest
/// round-trip form, so save/load is lossless (documented in the `encoding`
/// field of the file).
struct Checkpoint {
    std::string model_kind;
    nlohmann::json config;
    std::map<std::string, Tensor> params;
};

void save_checkpoint(const std::filesystem::path& path, const std::string& model_kind,
                     const nlohmann::json& config,
                     const std::vector<std::pair<std::string, Tensor>>& named_params);

Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace pqoslat::nn
