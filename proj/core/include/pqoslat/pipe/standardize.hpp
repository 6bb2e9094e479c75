#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "pqoslat/kpidata.hpp"

namespace pqoslat::pipe {

/// Column-wise z-scoring fitted on training rows only; applying it never
/// reads the rows it transforms.
class Standardizer {
public:
    Standardizer() = default;

    static Standardizer fit(std::span<const std::vector<double>> rows);

    std::size_t dim() const { return means_.size(); }
    const std::vector<double>& means() const { return means_; }
    const std::vector<double>& stds() const { return stds_; }

    std::vector<double> transform(std::span<const double> row) const;
    double transform_one(double v, std::size_t col) const;
    double inverse_one(double v, std::size_t col) const;

    nlohmann::json to_json() const;
    static Standardizer from_json(const nlohmann::json& j);

private:
    std::vector<double> means_;
    std::vector<double> stds_;
};

/// The 10 model-input features of a record, in kFeatureNames order.
std::vector<double> feature_row(const kpi::KpiRecord& record);

/// Features plus the latency label (autoencoder input space).
std::vector<double> feature_label_row(const kpi::KpiRecord& record);

} // namespace pqoslat::pipe
