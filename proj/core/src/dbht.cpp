#include "logvol/dbht.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

namespace logvol {

namespace {

std::array<int, 3> sorted_face(int a, int b, int c) {
    std::array<int, 3> f{a, b, c};
    std::sort(f.begin(), f.end());
    return f;
}

void check_similarity(const Eigen::MatrixXd& s) {
    if (s.rows() != s.cols()) {
        throw std::invalid_argument("similarity matrix not square");
    }
    if (!s.isApprox(s.transpose(), 1e-10)) {
        throw std::invalid_argument("similarity matrix not symmetric");
    }
}

}  // namespace

std::vector<int> FilteredGraph::degrees() const {
    std::vector<int> deg(static_cast<std::size_t>(n), 0);
    for (const auto& e : edges) {
        ++deg[static_cast<std::size_t>(e.i)];
        ++deg[static_cast<std::size_t>(e.j)];
    }
    return deg;
}

SimilarityDistance similarity_from_residual(const CorrelationMatrix& G) {
    // Row standardization is only guaranteed to 1e-8, so entries may poke
    // past |1| by that much; the distance clamps at zero accordingly.
    G.validate(1e-6);
    SimilarityDistance out;
    out.similarity = G.values;
    out.distance = (2.0 * (1.0 - G.values.array())).cwiseMax(0.0).sqrt();
    return out;
}

FilteredGraph build_planar_graph(const Eigen::MatrixXd& similarity) {
    check_similarity(similarity);
    const int n = static_cast<int>(similarity.rows());
    if (n < 5) {
        throw std::invalid_argument("build_planar_graph: need n >= 5");
    }
    const auto& s = similarity;

    // Seed: the 4-clique with maximal total similarity (lexicographically
    // first on ties).
    std::array<int, 4> seed{0, 1, 2, 3};
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            const double sab = s(a, b);
            for (int c = b + 1; c < n; ++c) {
                const double sabc = sab + s(a, c) + s(b, c);
                for (int d = c + 1; d < n; ++d) {
                    const double total = sabc + s(a, d) + s(b, d) + s(c, d);
                    if (total > best) {
                        best = total;
                        seed = {a, b, c, d};
                    }
                }
            }
        }
    }

    FilteredGraph g;
    g.n = n;
    g.seed = seed;
    std::vector<bool> inserted(static_cast<std::size_t>(n), false);
    for (int v : seed) inserted[static_cast<std::size_t>(v)] = true;
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            g.edges.push_back({seed[static_cast<std::size_t>(i)],
                               seed[static_cast<std::size_t>(j)],
                               s(seed[static_cast<std::size_t>(i)], seed[static_cast<std::size_t>(j)])});
        }
    }

    std::vector<std::array<int, 3>> faces;  // active faces in creation order
    faces.push_back(sorted_face(seed[0], seed[1], seed[2]));
    faces.push_back(sorted_face(seed[0], seed[1], seed[3]));
    faces.push_back(sorted_face(seed[0], seed[2], seed[3]));
    faces.push_back(sorted_face(seed[1], seed[2], seed[3]));

    std::vector<int> remaining;
    for (int v = 0; v < n; ++v) {
        if (!inserted[static_cast<std::size_t>(v)]) remaining.push_back(v);
    }

    while (!remaining.empty()) {
        int best_v = -1;
        std::size_t best_f = 0;
        double best_gain = -std::numeric_limits<double>::infinity();
        for (int v : remaining) {
            for (std::size_t f = 0; f < faces.size(); ++f) {
                const auto& face = faces[f];
                const double gain = s(v, face[0]) + s(v, face[1]) + s(v, face[2]);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_v = v;
                    best_f = f;
                }
            }
        }

        const auto face = faces[best_f];
        g.insertions.push_back({best_v, face});
        for (int u : face) {
            g.edges.push_back({std::min(best_v, u), std::max(best_v, u), s(best_v, u)});
        }
        // Replace the filled face by the three new ones, keeping creation order.
        faces.erase(faces.begin() + static_cast<std::ptrdiff_t>(best_f));
        faces.push_back(sorted_face(face[0], face[1], best_v));
        faces.push_back(sorted_face(face[0], face[2], best_v));
        faces.push_back(sorted_face(face[1], face[2], best_v));

        inserted[static_cast<std::size_t>(best_v)] = true;
        remaining.erase(std::find(remaining.begin(), remaining.end(), best_v));
    }

    g.triangulation = faces;
    return g;
}

std::vector<std::vector<Eigen::Index>> Clustering::members() const {
    std::vector<std::vector<Eigen::Index>> out(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int id = labels[i];
        if (id < 1 || id > k) {
            throw std::logic_error("Clustering: label out of range");
        }
        out[static_cast<std::size_t>(id - 1)].push_back(static_cast<Eigen::Index>(i));
    }
    return out;
}

void Clustering::validate() const {
    if (k < 1) {
        throw std::logic_error("Clustering: k must be >= 1");
    }
    const auto groups = members();
    for (const auto& m : groups) {
        if (m.empty()) {
            throw std::logic_error("Clustering: empty cluster id");
        }
    }
}

namespace {

struct Bubble {
    std::array<int, 4> vertices{};  // sorted
};

struct TreeEdge {
    int parent = 0;  // earlier-created bubble
    int child = 0;
    std::array<int, 3> separator{};
    double strength_parent = 0.0;  // separator-to-apex similarity sum, parent side
    double strength_child = 0.0;
    int toward = 0;  // bubble the direction points at
};

int apex_of(const Bubble& b, const std::array<int, 3>& sep) {
    for (int v : b.vertices) {
        if (v != sep[0] && v != sep[1] && v != sep[2]) return v;
    }
    throw std::logic_error("dbht: separator not contained in bubble");
}

struct PairStats {
    double mean = 0.0;
    double sd = 0.0;
    long count = 0;
};

PairStats between_stats(const Eigen::MatrixXd& s, const std::vector<int>& a,
                        const std::vector<int>& b) {
    PairStats st;
    double sum = 0.0, sum2 = 0.0;
    for (int p : a) {
        for (int q : b) {
            const double v = s(p, q);
            sum += v;
            sum2 += v * v;
            ++st.count;
        }
    }
    if (st.count > 0) {
        st.mean = sum / double(st.count);
        const double var = std::max(0.0, sum2 / double(st.count) - st.mean * st.mean);
        st.sd = std::sqrt(var);
    }
    return st;
}

PairStats within_stats(const Eigen::MatrixXd& s, const std::vector<int>& a) {
    PairStats st;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const double v = s(a[i], a[j]);
            sum += v;
            sum2 += v * v;
            ++st.count;
        }
    }
    if (st.count > 0) {
        st.mean = sum / double(st.count);
        const double var = std::max(0.0, sum2 / double(st.count) - st.mean * st.mean);
        st.sd = std::sqrt(var);
    }
    return st;
}

}  // namespace

Clustering dbht_cluster(const FilteredGraph& graph, const Eigen::MatrixXd& distance) {
    const int n = graph.n;
    if (n < 5) {
        throw std::invalid_argument("dbht_cluster: need n >= 5");
    }
    if (distance.rows() != n || distance.cols() != n) {
        throw std::invalid_argument("dbht_cluster: distance shape mismatch");
    }
    // Recover similarity from the correlation metric.
    const Eigen::MatrixXd s = 1.0 - 0.5 * distance.array().square();

    // Bubbles: the seed tetrahedron plus one 4-clique per insertion. Replay
    // the construction to attach each separator face to its owning bubble.
    std::vector<Bubble> bubbles;
    {
        Bubble b0;
        b0.vertices = {graph.seed[0], graph.seed[1], graph.seed[2], graph.seed[3]};
        std::sort(b0.vertices.begin(), b0.vertices.end());
        bubbles.push_back(b0);
    }
    std::map<std::array<int, 3>, int> face_owner;
    face_owner[sorted_face(graph.seed[0], graph.seed[1], graph.seed[2])] = 0;
    face_owner[sorted_face(graph.seed[0], graph.seed[1], graph.seed[3])] = 0;
    face_owner[sorted_face(graph.seed[0], graph.seed[2], graph.seed[3])] = 0;
    face_owner[sorted_face(graph.seed[1], graph.seed[2], graph.seed[3])] = 0;

    std::vector<TreeEdge> tree;
    for (const auto& ins : graph.insertions) {
        const auto it = face_owner.find(ins.face);
        if (it == face_owner.end()) {
            throw std::logic_error("dbht_cluster: insertion face is not an active face");
        }
        const int parent = it->second;
        Bubble nb;
        nb.vertices = {ins.face[0], ins.face[1], ins.face[2], ins.vertex};
        std::sort(nb.vertices.begin(), nb.vertices.end());
        const int child = static_cast<int>(bubbles.size());
        bubbles.push_back(nb);

        TreeEdge e;
        e.parent = parent;
        e.child = child;
        e.separator = ins.face;
        tree.push_back(e);

        face_owner.erase(it);
        face_owner[sorted_face(ins.face[0], ins.face[1], ins.vertex)] = child;
        face_owner[sorted_face(ins.face[0], ins.face[2], ins.vertex)] = child;
        face_owner[sorted_face(ins.face[1], ins.face[2], ins.vertex)] = child;
    }

    // Orient each tree edge toward the side binding the separator more
    // strongly; exact ties point at the earlier-created bubble.
    const int n_bubbles = static_cast<int>(bubbles.size());
    std::vector<int> out_degree(static_cast<std::size_t>(n_bubbles), 0);
    for (auto& e : tree) {
        const int apex_p = apex_of(bubbles[static_cast<std::size_t>(e.parent)], e.separator);
        const int apex_c = apex_of(bubbles[static_cast<std::size_t>(e.child)], e.separator);
        e.strength_parent = 0.0;
        e.strength_child = 0.0;
        for (int u : e.separator) {
            e.strength_parent += s(u, apex_p);
            e.strength_child += s(u, apex_c);
        }
        if (e.strength_child > e.strength_parent) {
            e.toward = e.child;
        } else {
            e.toward = e.parent;
        }
        const int from = (e.toward == e.parent) ? e.child : e.parent;
        ++out_degree[static_cast<std::size_t>(from)];
    }

    // Best outgoing step per bubble: the direction with the largest pull.
    std::vector<int> next_bubble(static_cast<std::size_t>(n_bubbles), -1);
    std::vector<double> best_pull(static_cast<std::size_t>(n_bubbles),
                                  -std::numeric_limits<double>::infinity());
    for (const auto& e : tree) {
        const int from = (e.toward == e.parent) ? e.child : e.parent;
        const double pull = (e.toward == e.parent)
                                ? e.strength_parent - e.strength_child
                                : e.strength_child - e.strength_parent;
        auto& cur = next_bubble[static_cast<std::size_t>(from)];
        auto& cur_pull = best_pull[static_cast<std::size_t>(from)];
        if (pull > cur_pull || (pull == cur_pull && (cur == -1 || e.toward < cur))) {
            cur_pull = pull;
            cur = e.toward;
        }
    }

    // Walk every bubble to its converging bubble (out-degree zero). On a
    // tree each directed step leaves the current subtree, so walks are simple.
    std::vector<int> sink(static_cast<std::size_t>(n_bubbles), -1);
    for (int b = 0; b < n_bubbles; ++b) {
        int cur = b;
        std::vector<int> path;
        while (sink[static_cast<std::size_t>(cur)] == -1 &&
               out_degree[static_cast<std::size_t>(cur)] != 0) {
            path.push_back(cur);
            cur = next_bubble[static_cast<std::size_t>(cur)];
        }
        const int s_id = (sink[static_cast<std::size_t>(cur)] != -1)
                             ? sink[static_cast<std::size_t>(cur)]
                             : cur;
        sink[static_cast<std::size_t>(cur)] = s_id;
        for (int p : path) sink[static_cast<std::size_t>(p)] = s_id;
    }

    // Attach every vertex to the bubble holding it most strongly.
    std::vector<std::vector<int>> bubbles_of(static_cast<std::size_t>(n));
    for (int b = 0; b < n_bubbles; ++b) {
        for (int v : bubbles[static_cast<std::size_t>(b)].vertices) {
            bubbles_of[static_cast<std::size_t>(v)].push_back(b);
        }
    }
    std::vector<int> home_sink(static_cast<std::size_t>(n), -1);
    for (int v = 0; v < n; ++v) {
        double best_chi = -std::numeric_limits<double>::infinity();
        int best_bubble = -1;
        for (int b : bubbles_of[static_cast<std::size_t>(v)]) {
            double chi = 0.0;
            for (int u : bubbles[static_cast<std::size_t>(b)].vertices) {
                if (u != v) chi += s(v, u);
            }
            if (chi > best_chi) {
                best_chi = chi;
                best_bubble = b;
            }
        }
        home_sink[static_cast<std::size_t>(v)] = sink[static_cast<std::size_t>(best_bubble)];
    }

    // Preliminary clusters: one per populated converging bubble.
    std::map<int, std::vector<int>> by_sink;
    for (int v = 0; v < n; ++v) {
        by_sink[home_sink[static_cast<std::size_t>(v)]].push_back(v);
    }
    std::vector<std::vector<int>> clusters;
    std::vector<int> cluster_of(static_cast<std::size_t>(n), -1);
    for (auto& [sid, verts] : by_sink) {
        for (int v : verts) cluster_of[static_cast<std::size_t>(v)] = static_cast<int>(clusters.size());
        clusters.push_back(std::move(verts));
    }

    // Merge adjacent clusters whose boundary similarity is statistically
    // indistinguishable from the weaker interior. Homogeneous regions split
    // by noise in the direction field collapse back into one cluster; real
    // block boundaries (similarity valleys) stay.
    constexpr double kMergeZ = 4.0;
    while (clusters.size() > 1) {
        // Adjacency through retained graph edges.
        std::set<std::pair<int, int>> adjacent;
        for (const auto& e : graph.edges) {
            const int a = cluster_of[static_cast<std::size_t>(e.i)];
            const int b = cluster_of[static_cast<std::size_t>(e.j)];
            if (a != b) adjacent.insert({std::min(a, b), std::max(a, b)});
        }
        double best_score = -std::numeric_limits<double>::infinity();
        std::pair<int, int> best_pair{-1, -1};
        for (const auto& [a, b] : adjacent) {
            const PairStats wb = between_stats(s, clusters[static_cast<std::size_t>(a)],
                                               clusters[static_cast<std::size_t>(b)]);
            const PairStats wa = within_stats(s, clusters[static_cast<std::size_t>(a)]);
            const PairStats wq = within_stats(s, clusters[static_cast<std::size_t>(b)]);
            const PairStats* weaker = nullptr;
            if (wa.count > 0 && wq.count > 0) {
                weaker = (wa.mean <= wq.mean) ? &wa : &wq;
            } else if (wa.count > 0) {
                weaker = &wa;
            } else if (wq.count > 0) {
                weaker = &wq;
            } else {
                continue;  // two singletons: no interior evidence either way
            }
            const double se = wb.sd / std::sqrt(double(wb.count)) +
                              weaker->sd / std::sqrt(double(weaker->count));
            const double score = wb.mean - (weaker->mean - kMergeZ * se);
            if (score >= 0.0 && score > best_score) {
                best_score = score;
                best_pair = {a, b};
            }
        }
        if (best_pair.first < 0) break;
        auto& dst = clusters[static_cast<std::size_t>(best_pair.first)];
        auto& src = clusters[static_cast<std::size_t>(best_pair.second)];
        for (int v : src) cluster_of[static_cast<std::size_t>(v)] = best_pair.first;
        dst.insert(dst.end(), src.begin(), src.end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_pair.second));
        for (int v = 0; v < n; ++v) {
            if (cluster_of[static_cast<std::size_t>(v)] > best_pair.second) {
                --cluster_of[static_cast<std::size_t>(v)];
            }
        }
    }

    // Canonical ids: 1..K in order of first occurrence along the vertex index.
    Clustering result;
    result.labels.assign(static_cast<std::size_t>(n), 0);
    std::vector<int> relabel(clusters.size(), 0);
    int next_id = 0;
    for (int v = 0; v < n; ++v) {
        const int c = cluster_of[static_cast<std::size_t>(v)];
        if (relabel[static_cast<std::size_t>(c)] == 0) {
            relabel[static_cast<std::size_t>(c)] = ++next_id;
        }
        result.labels[static_cast<std::size_t>(v)] = relabel[static_cast<std::size_t>(c)];
    }
    result.k = next_id;
    result.validate();
    return result;
}

}  // namespace logvol
