#include "pqoslat/cell_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include "pqoslat/csvfmt.hpp"
#include "pqoslat/errors.hpp"
#include "pqoslat/rng.hpp"

namespace pqoslat::kpi {

CellGraph::CellGraph(std::vector<CellNode> cells)
    : cells_(std::move(cells)), adjacency_(cells_.size()) {
    std::set<std::string_view> seen;
    for (const auto& c : cells_) {
        if (!seen.insert(c.id).second) {
            throw ParameterError("duplicate cell id: " + c.id);
        }
    }
}

void CellGraph::add_edge(int a, int b) {
    const int n = static_cast<int>(cells_.size());
    if (a < 0 || b < 0 || a >= n || b >= n) {
        throw ParameterError("edge endpoint out of range");
    }
    if (a == b) throw ParameterError("self-loops are not allowed");
    if (has_edge(a, b)) return;
    edges_.emplace_back(std::min(a, b), std::max(a, b));
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
    std::sort(adjacency_[a].begin(), adjacency_[a].end());
    std::sort(adjacency_[b].begin(), adjacency_[b].end());
}

bool CellGraph::has_edge(int a, int b) const {
    const auto& nb = adjacency_.at(a);
    return std::binary_search(nb.begin(), nb.end(), b);
}

int CellGraph::index_of(std::string_view id) const {
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        if (cells_[i].id == id) return static_cast<int>(i);
    }
    return -1;
}

int CellGraph::hop_distance(int a, int b) const {
    if (a == b) return 0;
    std::vector<int> dist(cells_.size(), -1);
    std::queue<int> frontier;
    dist[a] = 0;
    frontier.push(a);
    while (!frontier.empty()) {
        const int v = frontier.front();
        frontier.pop();
        for (int u : adjacency_[v]) {
            if (dist[u] >= 0) continue;
            dist[u] = dist[v] + 1;
            if (u == b) return dist[u];
            frontier.push(u);
        }
    }
    return -1;
}

namespace {

double sq_dist(const CellNode& a, const CellNode& b) {
    const double dx = a.x_km - b.x_km;
    const double dy = a.y_km - b.y_km;
    return dx * dx + dy * dy;
}

} // namespace

CellGraph build_graph(std::vector<CellNode> cells, const GraphRule& rule) {
    CellGraph graph(std::move(cells));
    const int n = static_cast<int>(graph.size());
    switch (rule.kind) {
    case GraphRule::Kind::k_nearest: {
        if (rule.k >= n) {
            throw ParameterError("k_nearest needs k < number of cells");
        }
        if (rule.k < 1) throw ParameterError("k_nearest needs k >= 1");
        for (int v = 0; v < n; ++v) {
            std::vector<std::pair<double, int>> order;
            for (int u = 0; u < n; ++u) {
                if (u == v) continue;
                order.emplace_back(sq_dist(graph.cells()[v], graph.cells()[u]), u);
            }
            std::sort(order.begin(), order.end());
            for (int i = 0; i < rule.k; ++i) graph.add_edge(v, order[i].second);
        }
        break;
    }
    case GraphRule::Kind::radius: {
        if (rule.radius_km < 0.0) throw ParameterError("radius must be nonnegative");
        const double r2 = rule.radius_km * rule.radius_km;
        for (int v = 0; v < n; ++v) {
            for (int u = v + 1; u < n; ++u) {
                if (sq_dist(graph.cells()[v], graph.cells()[u]) <= r2) graph.add_edge(v, u);
            }
        }
        break;
    }
    }
    return graph;
}

std::vector<CellNode> random_layout(int n_cells, double side_km, std::uint64_t seed) {
    if (n_cells < 1) throw ParameterError("need at least one cell");
    Rng rng = Rng::substream(seed, 0xce11);
    std::vector<CellNode> cells;
    cells.reserve(n_cells);
    for (int i = 0; i < n_cells; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "c%03d", i);
        cells.push_back(CellNode{buf, rng.uniform(0.0, side_km), rng.uniform(0.0, side_km)});
    }
    return cells;
}

void save_graph(const CellGraph& graph, const std::filesystem::path& nodes_csv,
                const std::filesystem::path& edges_csv) {
    std::ofstream nodes(nodes_csv);
    if (!nodes) throw ValidationError("cannot open " + nodes_csv.string());
    nodes << "cell_id,x_km,y_km\n";
    for (const auto& c : graph.cells()) {
        nodes << c.id << ',' << format_double(c.x_km) << ',' << format_double(c.y_km)
              << '\n';
    }
    std::ofstream edges(edges_csv);
    if (!edges) throw ValidationError("cannot open " + edges_csv.string());
    edges << "cell_a,cell_b\n";
    for (const auto& [a, b] : graph.edges()) {
        edges << graph.cells()[a].id << ',' << graph.cells()[b].id << '\n';
    }
}

CellGraph load_graph(const std::filesystem::path& nodes_csv,
                     const std::filesystem::path& edges_csv) {
    std::ifstream nodes(nodes_csv);
    if (!nodes) throw ValidationError("cannot open " + nodes_csv.string());
    std::string line;
    if (!std::getline(nodes, line) || line != "cell_id,x_km,y_km") {
        throw SchemaError("bad node file header in " + nodes_csv.string());
    }
    std::vector<CellNode> cells;
    std::size_t row = 1;
    while (std::getline(nodes, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ss(line);
        CellNode c;
        std::string x, y;
        if (!std::getline(ss, c.id, ',') || !std::getline(ss, x, ',') ||
            !std::getline(ss, y)) {
            throw ValidationError("node row " + std::to_string(row) + ": malformed");
        }
        try {
            c.x_km = std::stod(x);
            c.y_km = std::stod(y);
        } catch (const std::exception&) {
            throw ValidationError("node row " + std::to_string(row) + ": bad coordinate");
        }
        cells.push_back(std::move(c));
    }
    CellGraph graph(std::move(cells));

    std::ifstream edges(edges_csv);
    if (!edges) throw ValidationError("cannot open " + edges_csv.string());
    if (!std::getline(edges, line) || line != "cell_a,cell_b") {
        throw SchemaError("bad edge file header in " + edges_csv.string());
    }
    row = 1;
    while (std::getline(edges, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b)) {
            throw ValidationError("edge row " + std::to_string(row) + ": malformed");
        }
        const int ia = graph.index_of(a);
        const int ib = graph.index_of(b);
        if (ia < 0 || ib < 0) {
            throw ValidationError("edge row " + std::to_string(row) + ": unknown cell");
        }
        graph.add_edge(ia, ib);
    }
    return graph;
}

} // namespace pqoslat::kpi
