#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pqoslat::kpi {

struct CellNode {
    std::string id;
    double x_km = 0.0;
    double y_km = 0.0;
};

/// Edge construction rule: union-symmetrized k-nearest neighbors or a fixed
/// connection radius.
struct GraphRule {
    enum class Kind { k_nearest, radius };
    Kind kind = Kind::k_nearest;
    int k = 1;
    double radius_km = 1.0;

    static GraphRule nearest(int k) { return {Kind::k_nearest, k, 0.0}; }
    static GraphRule radius(double km) { return {Kind::radius, 0, km}; }
};

/// Undirected inter-cell adjacency. No self-loops; edges stored once with
/// the smaller index first.
class CellGraph {
public:
    CellGraph() = default;
    explicit CellGraph(std::vector<CellNode> cells);

    void add_edge(int a, int b);

    const std::vector<CellNode>& cells() const { return cells_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int v) const { return adjacency_.at(v); }
    bool has_edge(int a, int b) const;

    /// Index of a cell id, or -1 when absent.
    int index_of(std::string_view id) const;
    std::size_t size() const { return cells_.size(); }

    /// Unweighted hop distance between two nodes (-1 if disconnected).
    int hop_distance(int a, int b) const;

private:
    std::vector<CellNode> cells_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> adjacency_;
};

/// Builds the graph per the rule. Throws ParameterError for duplicate ids or
/// k >= number of cells.
CellGraph build_graph(std::vector<CellNode> cells, const GraphRule& rule);

/// Uniform random cell layout over a square of the given side, ids c000...
std::vector<CellNode> random_layout(int n_cells, double side_km, std::uint64_t seed);

/// Node file `cell_id,x_km,y_km` and edge file `cell_a,cell_b`.
void save_graph(const CellGraph& graph, const std::filesystem::path& nodes_csv,
                const std::filesystem::path& edges_csv);
CellGraph load_graph(const std::filesystem::path& nodes_csv,
                     const std::filesystem::path& edges_csv);

} // namespace pqoslat::kpi
