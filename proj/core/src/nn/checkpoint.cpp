#include "pqoslat/nn/checkpoint.hpp"

#include <fstream>

#include "pqoslat/errors.hpp"

namespace pqoslat::nn {

void save_checkpoint(const std::filesystem::path& path, const std::string& model_kind,
                     const nlohmann::json& config,
                     const std::vector<std::pair<std::string, Tensor>>& named_params) {
    nlohmann::json doc;
    doc["format"] = "pqoslat-checkpoint-v1";
    doc["encoding"] = "decimal shortest round-trip";
    doc["model_kind"] = model_kind;
    doc["config"] = config;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [name, tensor] : named_params) {
        nlohmann::json entry;
        entry["rows"] = tensor.rows();
        entry["cols"] = tensor.cols();
        entry["values"] = tensor.value();
        params[name] = std::move(entry);
    }
    doc["params"] = std::move(params);
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path.string());
    out << doc.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("checkpoint parse error in " + path.string() + ": " + e.what());
    }
    if (doc.value("format", "") != "pqoslat-checkpoint-v1") {
        throw SchemaError("unknown checkpoint format in " + path.string());
    }
    Checkpoint ckpt;
    ckpt.model_kind = doc.value("model_kind", "");
    ckpt.config = doc.value("config", nlohmann::json::object());
    for (const auto& [name, entry] : doc.at("params").items()) {
        const std::size_t rows = entry.at("rows").get<std::size_t>();
        const std::size_t cols = entry.at("cols").get<std::size_t>();
        std::vector<double> values = entry.at("values").get<std::vector<double>>();
        if (values.size() != rows * cols) {
            throw SchemaError("checkpoint tensor " + name + " has inconsistent shape");
        }
        ckpt.params.emplace(name, Tensor::parameter(std::move(values), rows, cols));
    }
    return ckpt;
}

} // namespace pqoslat::nn
