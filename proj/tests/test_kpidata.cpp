#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "pqoslat/cell_graph.hpp"
#include "pqoslat/errors.hpp"
#include "pqoslat/kpidata.hpp"
#include "pqoslat/rng.hpp"
#include "pqoslat/stats.hpp"

using namespace pqoslat;
using namespace pqoslat::kpi;

namespace {

CellGraph default_graph(std::uint64_t seed = 1) {
    return build_graph(random_layout(20, 10.0, seed), GraphRule::nearest(3));
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("graph construction rules") {
    // Three collinear cells 1 km apart with radius 1.5: a path graph.
    std::vector<CellNode> line = {{"a", 0, 0}, {"b", 1, 0}, {"c", 2, 0}};
    const auto path = build_graph(line, GraphRule::radius(1.5));
    CHECK(path.edges().size() == 2);
    CHECK(path.has_edge(0, 1));
    CHECK(path.has_edge(1, 2));
    CHECK(!path.has_edge(0, 2));

    std::vector<CellNode> pair = {{"a", 0, 0}, {"b", 1, 0}};
    CHECK(build_graph(pair, GraphRule::nearest(1)).edges().size() == 1);

    CHECK(build_graph(line, GraphRule::radius(0.0)).edges().empty());
    CHECK_THROWS_AS(build_graph(line, GraphRule::nearest(3)), ParameterError);

    std::vector<CellNode> dup = {{"a", 0, 0}, {"a", 1, 0}};
    CHECK_THROWS_AS(build_graph(dup, GraphRule::nearest(1)), ParameterError);
}

TEST_CASE("graph io round trip") {
    const auto graph = default_graph();
    const auto nodes = temp_file("pqoslat_nodes.csv");
    const auto edges = temp_file("pqoslat_edges.csv");
    save_graph(graph, nodes, edges);
    const auto loaded = load_graph(nodes, edges);
    CHECK(loaded.size() == graph.size());
    CHECK(loaded.edges() == graph.edges());
    for (std::size_t i = 0; i < graph.size(); ++i) {
        CHECK(loaded.cells()[i].id == graph.cells()[i].id);
        CHECK(loaded.cells()[i].x_km == graph.cells()[i].x_km);
    }
}

TEST_CASE("generated records satisfy the range invariants") {
    const auto graph = default_graph();
    const auto profile = ScenarioProfile::preset(ScenarioProfile::Kind::dense_urban, 1);
    const auto records = generate_dataset(profile, 3, graph);
    CHECK(records.size() == 20u * 3u * 96u);
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK_NOTHROW(records[i].validate(i));
    }
}

TEST_CASE("generation is a pure function of profile, cells, seed") {
    const auto graph = default_graph();
    const auto profile = ScenarioProfile::preset(ScenarioProfile::Kind::vehicular, 9);
    const auto a = generate_dataset(profile, 2, graph);
    const auto b = generate_dataset(profile, 2, graph);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].timestamp == b[i].timestamp);
        CHECK(a[i].label_latency_ms == b[i].label_latency_ms);
        CHECK(a[i].prb_util_dl == b[i].prb_util_dl);
    }
}

TEST_CASE("correlation structure mirrors the published table") {
    const auto graph = default_graph(3);
    const auto profile = ScenarioProfile::preset(ScenarioProfile::Kind::dense_urban, 3);
    const auto records = generate_dataset(profile, 30, graph);

    CHECK(pearson(records, "prb_util_dl") > 0.6);
    CHECK(pearson(records, "avg_cqi") < 0.0);

    const auto table = correlation_table(records);
    REQUIRE(table.size() == 9);
    CHECK(sign_pattern_matches(table));
    for (const auto& row : table) {
        CHECK(row.computed_r >= -1.0);
        CHECK(row.computed_r <= 1.0);
    }

    // Resource utilization dominates the traffic features.
    std::map<std::string, double> r;
    for (const auto& row : table) r[row.feature] = std::abs(row.computed_r);
    CHECK(r["prb_util_dl"] > r["traffic_volume_dl"]);
    CHECK(r["prb_util_dl"] > r["active_ues_dl"]);

    // The report is deterministic given the dataset.
    const auto again = correlation_table(records);
    for (std::size_t i = 0; i < table.size(); ++i) {
        CHECK(table[i].computed_r == again[i].computed_r);
    }
}

TEST_CASE("pearson basics and error paths") {
    const auto graph = default_graph();
    auto profile = ScenarioProfile::preset(ScenarioProfile::Kind::dense_urban, 5);
    auto records = generate_dataset(profile, 2, graph);

    // Feature identical to the label.
    auto clone = records;
    for (auto& r : clone) r.traffic_volume_dl = r.label_latency_ms;
    CHECK(pearson(clone, "traffic_volume_dl") == doctest::Approx(1.0));
    for (auto& r : clone) r.traffic_volume_dl = -r.label_latency_ms + 50.0;
    CHECK(pearson(clone, "traffic_volume_dl") == doctest::Approx(-1.0));

    // Independent noise: |r| below the 3/sqrt(n) null bound.
    Rng rng(8);
    for (auto& r : clone) r.traffic_volume_dl = rng.normal();
    CHECK(std::abs(pearson(clone, "traffic_volume_dl")) <
          3.0 / std::sqrt(static_cast<double>(clone.size())));

    for (auto& r : clone) r.traffic_volume_dl = 1.0;
    CHECK_THROWS_AS(pearson(clone, "traffic_volume_dl"), ValidationError);
    CHECK_THROWS_AS(pearson(records, "no_such_feature"), SchemaError);
}

TEST_CASE("diurnal structure: 24h autocorrelation beats 12h") {
    const auto graph = default_graph();
    const auto profile = ScenarioProfile::preset(ScenarioProfile::Kind::dense_urban, 1);
    const auto records = generate_dataset(profile, 10, graph);
    std::map<std::string, std::vector<double>> per_cell;
    for (const auto& r : records) per_cell[r.cell_id].push_back(r.label_latency_ms);
    int wins = 0, cells = 0;
    for (const auto& [id, series] : per_cell) {
        ++cells;
        if (autocorrelation(series, 96) > autocorrelation(series, 48)) ++wins;
    }
    CHECK(wins == cells);
}

TEST_CASE("neighboring cells correlate more than distant ones") {
    const auto graph = default_graph();
    const auto profile = ScenarioProfile::preset(ScenarioProfile::Kind::dense_urban, 1);
    const auto records = generate_dataset(profile, 10, graph);
    std::map<std::string, std::vector<double>> per_cell;
    for (const auto& r : records) per_cell[r.cell_id].push_back(r.label_latency_ms);
    auto corr_pair = [&](int a, int b) {
        return pearson_correlation(per_cell[graph.cells()[a].id],
                                   per_cell[graph.cells()[b].id]);
    };
    double edge_acc = 0.0;
    int edge_n = 0;
    for (const auto& [a, b] : graph.edges()) {
        edge_acc += corr_pair(a, b);
        ++edge_n;
    }
    double far_acc = 0.0;
    int far_n = 0;
    const int n = static_cast<int>(graph.size());
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            const int d = graph.hop_distance(a, b);
            if (d >= 3 || d < 0) {
                far_acc += corr_pair(a, b);
                ++far_n;
            }
        }
    }
    REQUIRE(edge_n > 0);
    REQUIRE(far_n > 0);
    CHECK(edge_acc / edge_n > far_acc / far_n);
}

TEST_CASE("anomaly windows raise the label above matched clock times") {
    const auto graph = default_graph();
    const auto profile = ScenarioProfile::preset(ScenarioProfile::Kind::event, 1);
    REQUIRE(!profile.anomaly_windows.empty());
    const auto records = generate_dataset(profile, 20, graph);

    double anomalous_sum = 0.0, normal_sum = 0.0;
    std::size_t anomalous_n = 0, normal_n = 0;
    for (const auto& r : records) {
        const std::int64_t tod = r.timestamp % 86400;
        const bool evening = tod >= 68400 && tod < 84600;
        if (!evening) continue;
        if (profile.is_anomalous(r.timestamp)) {
            anomalous_sum += r.label_latency_ms;
            ++anomalous_n;
        } else {
            normal_sum += r.label_latency_ms;
            ++normal_n;
        }
    }
    REQUIRE(anomalous_n > 0);
    REQUIRE(normal_n > 0);
    CHECK(anomalous_sum / anomalous_n > normal_sum / normal_n);

    auto bad = profile;
    bad.anomaly_windows[0].end_s = 99 * 86400;
    CHECK_THROWS_AS(generate_dataset(bad, 20, graph), ParameterError);
}

TEST_CASE("split by days is chronological and order-independent") {
    const auto graph = default_graph();
    const auto profile = ScenarioProfile::preset(ScenarioProfile::Kind::dense_urban, 2);
    auto records = generate_dataset(profile, 30, graph);

    const auto [train, test] = split_by_days(records, 20, 10);
    CHECK(train.size() == 20u * 96u * 20u);
    CHECK(test.size() == 20u * 96u * 10u);
    std::int64_t max_train = 0, min_test = 1LL << 60;
    for (const auto& r : train) max_train = std::max(max_train, r.timestamp);
    for (const auto& r : test) min_test = std::min(min_test, r.timestamp);
    CHECK(max_train < min_test);
    CHECK(min_test == 20 * 86400);

    const auto [all, none] = split_by_days(records, 30, 0);
    CHECK(all.size() == records.size());
    CHECK(none.empty());

    // Shuffling the input does not change the split contents.
    auto shuffled = records;
    std::mt19937 urbg(17);
    std::shuffle(shuffled.begin(), shuffled.end(), urbg);
    auto [strain, stest] = split_by_days(shuffled, 20, 10);
    auto key = [](const KpiRecord& r) { return std::make_pair(r.timestamp, r.cell_id); };
    auto sort_by_key = [&](std::vector<KpiRecord>& v) {
        std::sort(v.begin(), v.end(),
                  [&](const auto& a, const auto& b) { return key(a) < key(b); });
    };
    auto train_sorted = train;
    sort_by_key(train_sorted);
    sort_by_key(strain);
    REQUIRE(strain.size() == train_sorted.size());
    for (std::size_t i = 0; i < strain.size(); ++i) {
        CHECK(key(strain[i]) == key(train_sorted[i]));
    }

    CHECK_THROWS_AS(split_by_days(records, 25, 10), ParameterError);
}

TEST_CASE("csv round trip is lossless") {
    const auto graph = default_graph();
    const auto profile = ScenarioProfile::preset(ScenarioProfile::Kind::dense_urban, 4);
    const auto records = generate_dataset(profile, 3, graph);
    const auto path = temp_file("pqoslat_kpi_roundtrip.csv");
    save_csv(records, path);
    const auto loaded = load_csv(path);
    REQUIRE(loaded.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(loaded[i].timestamp == records[i].timestamp);
        CHECK(loaded[i].cell_id == records[i].cell_id);
        CHECK(loaded[i].qci == records[i].qci);
        CHECK(loaded[i].traffic_volume_dl == records[i].traffic_volume_dl);
        CHECK(loaded[i].prb_util_dl == records[i].prb_util_dl);
        CHECK(loaded[i].active_ues_dl == records[i].active_ues_dl);
        CHECK(loaded[i].avg_cqi == records[i].avg_cqi);
        CHECK(loaded[i].avg_rssi_ul == records[i].avg_rssi_ul);
        CHECK(loaded[i].avg_sinr_ul == records[i].avg_sinr_ul);
        CHECK(loaded[i].avg_mcs_dl == records[i].avg_mcs_dl);
        CHECK(loaded[i].avg_mcs_ul == records[i].avg_mcs_ul);
        CHECK(loaded[i].tod_sin == records[i].tod_sin);
        CHECK(loaded[i].tod_cos == records[i].tod_cos);
        CHECK(loaded[i].label_latency_ms == records[i].label_latency_ms);
    }
}

TEST_CASE("csv validation errors name the row and field") {
    const auto path = temp_file("pqoslat_kpi_bad.csv");
    {
        std::ofstream out(path);
        out << "timestamp,cell_id,qci,traffic_volume_dl,prb_util_dl,active_ues_dl,"
               "avg_cqi,avg_rssi_ul,avg_sinr_ul,avg_mcs_dl,avg_mcs_ul,tod_sin,tod_cos,"
               "label_latency_ms\n";
        out << "900,c000,7,100,1.2,3,10,-90,15,20,18,0,1,5\n";
    }
    try {
        load_csv(path);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("prb_util_dl") != std::string::npos);
    }

    {
        std::ofstream out(path);
        out << "timestamp,cell_id\n";
    }
    CHECK_THROWS_AS(load_csv(path), SchemaError);

    {
        std::ofstream out(path);
        out << "timestamp,cell_id,qci,traffic_volume_dl,prb_util_dl,active_ues_dl,"
               "avg_cqi,avg_rssi_ul,avg_sinr_ul,avg_mcs_dl,avg_mcs_ul,tod_sin,tod_cos,"
               "label_latency_ms\n";
    }
    CHECK(load_csv(path).empty());
}

TEST_CASE("des label backend agrees with the analytic mean") {
    std::vector<CellNode> one = {{"c000", 0.0, 0.0}};
    CellGraph graph(std::move(one));
    auto profile = ScenarioProfile::preset(ScenarioProfile::Kind::dense_urban, 6);
    profile.bin_jitter = 0.0;
    profile.feature_noise = 0.0;
    // Validation runs live at moderate load; near saturation the short DES
    // window cannot reach steady state at any useful cost.
    profile.util_cap = 0.70;

    auto analytic = profile;
    analytic.label_shape = 1e9; // effectively noise-free analytic labels
    const auto base = generate_dataset(analytic, 1, graph);

    auto des = profile;
    des.label_backend = ScenarioProfile::LabelBackend::des;
    const auto simulated = generate_dataset(des, 1, graph);

    REQUIRE(base.size() == simulated.size());
    double rel_sum = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
        rel_sum += std::abs(simulated[i].label_latency_ms - base[i].label_latency_ms) /
                   base[i].label_latency_ms;
    }
    CHECK(rel_sum / base.size() < 0.08);
}
