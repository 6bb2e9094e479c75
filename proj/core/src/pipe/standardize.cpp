#include "pqoslat/pipe/standardize.hpp"

#include <cmath>

#include "pqoslat/errors.hpp"

namespace pqoslat::pipe {

Standardizer Standardizer::fit(std::span<const std::vector<double>> rows) {
    if (rows.empty()) throw ParameterError("standardizer needs at least one row");
    const std::size_t dim = rows.front().size();
    Standardizer s;
    s.means_.assign(dim, 0.0);
    s.stds_.assign(dim, 0.0);
    for (const auto& row : rows) {
        if (row.size() != dim) throw ParameterError("ragged feature rows");
        for (std::size_t j = 0; j < dim; ++j) s.means_[j] += row[j];
    }
    for (double& m : s.means_) m /= static_cast<double>(rows.size());
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = row[j] - s.means_[j];
            s.stds_[j] += d * d;
        }
    }
    for (double& v : s.stds_) {
        v = std::sqrt(v / static_cast<double>(rows.size()));
        if (v < 1e-9) v = 1.0; // constant column: pass through centered
    }
    return s;
}

std::vector<double> Standardizer::transform(std::span<const double> row) const {
    if (row.size() != means_.size()) throw ParameterError("feature dimension mismatch");
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
        out[j] = (row[j] - means_[j]) / stds_[j];
    }
    return out;
}

double Standardizer::transform_one(double v, std::size_t col) const {
    return (v - means_.at(col)) / stds_.at(col);
}

double Standardizer::inverse_one(double v, std::size_t col) const {
    return v * stds_.at(col) + means_.at(col);
}

nlohmann::json Standardizer::to_json() const {
    return {{"means", means_}, {"stds", stds_}};
}

Standardizer Standardizer::from_json(const nlohmann::json& j) {
    Standardizer s;
    s.means_ = j.at("means").get<std::vector<double>>();
    s.stds_ = j.at("stds").get<std::vector<double>>();
    if (s.means_.size() != s.stds_.size()) throw SchemaError("bad standardizer record");
    return s;
}

std::vector<double> feature_row(const kpi::KpiRecord& r) {
    std::vector<double> out;
    out.reserve(kpi::kFeatureNames.size());
    for (const auto name : kpi::kFeatureNames) {
        out.push_back(kpi::feature_value(r, name));
    }
    return out;
}

std::vector<double> feature_label_row(const kpi::KpiRecord& r) {
    auto out = feature_row(r);
    out.push_back(r.label_latency_ms);
    return out;
}

} // namespace pqoslat::pipe
