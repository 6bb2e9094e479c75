#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pqoslat/cell_graph.hpp"

namespace pqoslat::kpi {

inline constexpr std::int64_t kBinSeconds = 900;   // 15-minute measurement bins
inline constexpr int kBinsPerDay = 96;

/// One 15-minute KPI row for one cell: the Table-1 feature space plus the
/// PDCP-delay label.
struct KpiRecord {
    std::int64_t timestamp = 0;      // s, aligned to the 900 s grid
    std::string cell_id;
    int qci = 7;                     // 1 or 7
    double traffic_volume_dl = 0.0;  // PDCP SDU count in the bin
    double prb_util_dl = 0.0;        // [0, 1]
    double active_ues_dl = 0.0;      // >= 0
    double avg_cqi = 0.0;            // [0, 15]
    double avg_rssi_ul = -100.0;     // dBm, [-130, -60]
    double avg_sinr_ul = 10.0;       // dB, [-10, 40]
    double avg_mcs_dl = 0.0;         // [0, 28]
    double avg_mcs_ul = 0.0;         // [0, 28]
    double tod_sin = 0.0;            // [-1, 1]
    double tod_cos = 0.0;            // [-1, 1]
    double label_latency_ms = 0.0;   // >= 0

    /// Throws ValidationError naming the row and the offending field.
    void validate(std::size_t row) const;
};

/// Model-input feature columns, in CSV order (label and keys excluded).
inline constexpr std::array<std::string_view, 10> kFeatureNames = {
    "traffic_volume_dl", "prb_util_dl", "active_ues_dl", "avg_cqi",
    "avg_rssi_ul",       "avg_sinr_ul", "avg_mcs_dl",    "avg_mcs_ul",
    "tod_sin",           "tod_cos",
};

double feature_value(const KpiRecord& record, std::string_view name);

/// Closed-open anomaly interval; the surge multiplier applies to the latent
/// load of every cell inside it.
struct AnomalyWindow {
    std::int64_t start_s = 0;
    std::int64_t end_s = 0;
    double surge = 2.5;
};

/// Synthetic traffic scenario driving the generator. The diurnal curve is a
/// target effective utilization per 15-minute bin at multiplier one; cell,
/// spatial, and bin-level factors modulate it multiplicatively.
struct ScenarioProfile {
    enum class Kind { dense_urban, vehicular, event };
    enum class LabelBackend { analytic, des };

    Kind kind = Kind::dense_urban;
    std::array<double, kBinsPerDay> diurnal{}; // target utilization per bin

    double service_rate = 1.0;     // mu, 1/ms
    double harq_delay_ms = 0.25;   // C
    int n_max = 8;
    double bler_base = 0.02;
    double bler_slope = 0.15;      // bler = clamp(base + slope*util, 0.005, 0.30)

    double cell_spread = 0.30;     // lognormal sigma of the per-cell base load
    double spatial_sigma = 0.35;   // amplitude of the shared smooth load field
    double spatial_length_km = 4.0;
    double idio_sigma = 0.12;      // per-cell slow wobble amplitude
    double bin_jitter = 0.08;      // lognormal sigma of iid per-bin load noise

    double feature_noise = 1.0;    // global scale on feature measurement noise
    double label_shape = 5.0;      // window-level dispersion: Gamma(shape)/shape

    double util_floor = 0.02;
    double util_cap = 0.97;
    double anomaly_util_cap = 0.99; // cap inside anomaly windows

    int qci = 7;
    std::vector<AnomalyWindow> anomaly_windows;
    LabelBackend label_backend = LabelBackend::analytic;
    std::uint64_t seed = 1;

    static ScenarioProfile preset(Kind kind, std::uint64_t seed = 1);
    void validate() const;
    bool is_anomalous(std::int64_t timestamp) const;
};

/// Generates n_days x 96 bins x |cells| records. Pure function of
/// (profile, cells, seed); parallelizable per (cell, day) by construction
/// (every random component is evaluable at any bin directly).
std::vector<KpiRecord> generate_dataset(const ScenarioProfile& profile, int n_days,
                                        const CellGraph& cells);

/// Pearson r between a named feature and the latency label.
double pearson(std::span<const KpiRecord> records, std::string_view feature);

struct CorrelationRow {
    std::string feature;
    double computed_r = 0.0;
    double paper_r = 0.0;     // reference column for side-by-side display
    bool sign_stable = false; // part of the seven-row sign check
};

/// The nine-feature correlation report with the published reference column.
std::vector<CorrelationRow> correlation_table(std::span<const KpiRecord> records);

/// True when every sign-stable row matches the sign of its reference value.
bool sign_pattern_matches(const std::vector<CorrelationRow>& table);

/// Chronological split after `train_days` whole days; keyed on timestamps,
/// not input order. Throws ParameterError when the span is too short.
std::pair<std::vector<KpiRecord>, std::vector<KpiRecord>>
split_by_days(std::span<const KpiRecord> records, int train_days, int test_days);

/// Seeded record-level shuffle split (regression-style, no temporal meaning).
std::pair<std::vector<KpiRecord>, std::vector<KpiRecord>>
split_records(std::span<const KpiRecord> records, double train_fraction,
              std::uint64_t seed);

std::vector<KpiRecord> load_csv(const std::filesystem::path& path);
void save_csv(std::span<const KpiRecord> records, const std::filesystem::path& path);

} // namespace pqoslat::kpi
