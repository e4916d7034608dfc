#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "logvol/stats_core.hpp"

namespace logvol {

// Triangulated maximal planar graph built by greedy vertex-into-face
// insertion: a tetrahedron seed plus 3 edges per inserted vertex, 3n-6
// edges in total. The construction record (seed + insertions) is the
// clique tree the clustering walks.
struct FilteredGraph {
    struct Edge {
        int i = 0;
        int j = 0;
        double weight = 0.0;
    };
    struct Insertion {
        int vertex = 0;
        std::array<int, 3> face{};  // sorted vertex triple the vertex was placed into
    };

    int n = 0;
    std::vector<Edge> edges;
    std::vector<std::array<int, 3>> triangulation;  // final faces, each sorted
    std::array<int, 4> seed{};
    std::vector<Insertion> insertions;

    std::vector<int> degrees() const;
};

struct SimilarityDistance {
    Eigen::MatrixXd similarity;
    Eigen::MatrixXd distance;  // d_ij = sqrt(2 (1 - G_ij))
};

// Similarity is the residual correlation itself; distance is the standard
// correlation metric sqrt(2(1 - G)).
SimilarityDistance similarity_from_residual(const CorrelationMatrix& G);

// Greedy triangulated filtering: seed with the 4-clique of maximal total
// similarity, then repeatedly insert the (vertex, face) pair of maximal
// similarity gain. All ties break to the lowest vertex index, then to the
// earliest-created face. Requires n >= 5.
FilteredGraph build_planar_graph(const Eigen::MatrixXd& similarity);

// Partition of the n stocks into clusters 1..k, ids ordered by first
// occurrence along the vertex index.
struct Clustering {
    std::vector<int> labels;
    int k = 0;

    std::vector<std::vector<Eigen::Index>> members() const;
    void validate() const;
};

// Bubble-tree clustering over the planar graph: the chordal construction's
// 4-cliques are the bubbles; separator-to-apex strengths orient the bubble
// tree; converging bubbles (no outgoing direction) collect basins; vertices
// attach to their strongest bubble. Adjacent basins whose boundary
// similarity is statistically indistinguishable from their interiors are
// merged, so homogeneous regions are not split on noise. Deterministic for
// fixed input.
Clustering dbht_cluster(const FilteredGraph& graph, const Eigen::MatrixXd& distance);

}  // namespace logvol
