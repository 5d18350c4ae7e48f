#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "masksim/errors.hpp"
#include "masksim/rng.hpp"

namespace masksim {

using NodeId = std::uint32_t;

/// Undirected weighted contact network. Edge weights are daily transmission
/// probability scaffolds in (0, 1]. Edges are stored once with u < v, sorted,
/// and the adjacency is derived so both views always agree.
struct ContactGraph {
    struct Edge {
        NodeId u;
        NodeId v;
        double weight;
        bool operator==(const Edge&) const = default;
    };
    struct Neighbor {
        NodeId id;
        double weight;
    };

    std::size_t n_nodes = 0;
    std::vector<Edge> edges;
    std::vector<std::vector<Neighbor>> adjacency;

    static ContactGraph from_edges(std::size_t n, std::vector<Edge> edge_list) {
        ContactGraph g;
        g.n_nodes = n;
        g.edges = std::move(edge_list);
        for (auto& e : g.edges) {
            if (e.u > e.v) std::swap(e.u, e.v);
        }
        std::sort(g.edges.begin(), g.edges.end(), [](const Edge& a, const Edge& b) {
            return std::tie(a.u, a.v) < std::tie(b.u, b.v);
        });
        g.rebuild_adjacency();
        g.check_invariants();
        return g;
    }

    std::size_t n_edges() const { return edges.size(); }

    std::size_t degree(NodeId u) const { return adjacency[u].size(); }

    double max_weight() const {
        double w = 0.0;
        for (const auto& e : edges) w = std::max(w, e.weight);
        return w;
    }

    double mean_degree() const {
        return n_nodes == 0 ? 0.0 : 2.0 * static_cast<double>(edges.size()) / static_cast<double>(n_nodes);
    }

    /// Copy with every weight multiplied by `scale`.
    ContactGraph scaled(double scale) const {
        ContactGraph g = *this;
        for (auto& e : g.edges) e.weight *= scale;
        for (auto& nbrs : g.adjacency)
            for (auto& nb : nbrs) nb.weight *= scale;
        g.check_invariants();
        return g;
    }

    void rebuild_adjacency() {
        adjacency.assign(n_nodes, {});
        for (const auto& e : edges) {
            adjacency[e.u].push_back({e.v, e.weight});
            adjacency[e.v].push_back({e.u, e.weight});
        }
        for (auto& nbrs : adjacency) {
            std::sort(nbrs.begin(), nbrs.end(),
                      [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
        }
    }

    void check_invariants() const {
        std::size_t degree_sum = 0;
        const Edge* prev = nullptr;
        for (const auto& e : edges) {
            if (e.u >= n_nodes || e.v >= n_nodes)
                throw ContractViolation("graph: edge endpoint out of range");
            if (e.u == e.v) throw ContractViolation("graph: self-loop");
            if (e.u > e.v) throw ContractViolation("graph: edge not stored canonically");
            if (prev && prev->u == e.u && prev->v == e.v)
                throw ContractViolation("graph: duplicate edge");
            if (!(e.weight > 0.0) || e.weight > 1.0)
                throw ContractViolation("graph: weight outside (0, 1]");
            prev = &e;
        }
        if (adjacency.size() != n_nodes) throw ContractViolation("graph: adjacency size mismatch");
        for (const auto& nbrs : adjacency) degree_sum += nbrs.size();
        if (degree_sum != 2 * edges.size())
            throw ContractViolation("graph: adjacency inconsistent with edge list");
    }
};

/// Degree -> number of nodes with that degree. Includes degree zero, so the
/// frequencies always sum to n_nodes.
using DegreeHistogram = std::map<std::size_t, std::size_t>;

inline DegreeHistogram degree_histogram(const ContactGraph& g) {
    DegreeHistogram h;
    for (NodeId u = 0; u < g.n_nodes; ++u) ++h[g.degree(u)];
    return h;
}

inline std::size_t histogram_l1_distance(const DegreeHistogram& a, const DegreeHistogram& b) {
    std::size_t total = 0;
    auto add = [&](const DegreeHistogram& x, const DegreeHistogram& y) {
        for (const auto& [deg, cnt] : x) {
            auto it = y.find(deg);
            const std::size_t other = it == y.end() ? 0 : it->second;
            if (cnt > other) total += cnt - other;
        }
    };
    add(a, b);
    add(b, a);
    return total;
}

/// Preferential-attachment graph: each new node attaches m = round(target_edges / n)
/// edges to nodes sampled proportionally to degree. Unweighted (weight 1.0).
/// The realized edge count m * (n - m) must land within +/- n of target_edges.
inline ContactGraph generate_barabasi_albert(std::size_t n, std::size_t target_edges,
                                             std::uint64_t seed) {
    if (n < 3) throw ConfigError("barabasi_albert: need n >= 3");
    const auto m = static_cast<std::size_t>(
        std::llround(static_cast<double>(target_edges) / static_cast<double>(n)));
    if (m < 1)
        throw ConfigError("barabasi_albert: target_edges too small (attachment parameter m < 1)");
    if (m >= n)
        throw ConfigError("barabasi_albert: target_edges too large (attachment parameter m >= n)");
    const std::size_t realized = m * (n - m);
    const std::size_t gap = realized > target_edges ? realized - target_edges : target_edges - realized;
    if (gap > n)
        throw ConfigError("barabasi_albert: m*(n-m) = " + std::to_string(realized) +
                          " misses target_edges by more than n");

    RngStream rng = RngFactory(seed).stream(streams::graph_gen);
    std::vector<ContactGraph::Edge> edges;
    edges.reserve(realized);
    // Endpoints repeated by multiplicity; uniform picks are degree-proportional.
    std::vector<NodeId> repeated;
    repeated.reserve(2 * realized);

    std::vector<NodeId> targets(m);
    for (std::size_t i = 0; i < m; ++i) targets[i] = static_cast<NodeId>(i);

    std::vector<char> in_targets(n, 0);
    for (NodeId x = static_cast<NodeId>(m); x < n; ++x) {
        for (const NodeId t : targets) {
            edges.push_back({x, t, 1.0});
            repeated.push_back(t);
            repeated.push_back(x);
        }
        // Next target set: m distinct degree-proportional picks.
        targets.clear();
        while (targets.size() < m) {
            const NodeId cand = repeated[rng.uniform_below(repeated.size())];
            if (!in_targets[cand]) {
                in_targets[cand] = 1;
                targets.push_back(cand);
            }
        }
        for (const NodeId t : targets) in_targets[t] = 0;
    }
    return ContactGraph::from_edges(n, std::move(edges));
}

namespace detail {

// Pairs (u, v), u < v, in lexicographic order. Offset of the block with
// first coordinate u, then binary search to invert.
inline std::uint64_t pair_block_offset(std::uint64_t u, std::uint64_t n) {
    return u * (n - 1) - u * (u - 1) / 2;
}

inline ContactGraph::Edge decode_pair_index(std::uint64_t k, std::uint64_t n) {
    std::uint64_t lo = 0, hi = n - 1;
    while (lo + 1 < hi) {
        const std::uint64_t mid = (lo + hi) / 2;
        if (pair_block_offset(mid, n) <= k)
            lo = mid;
        else
            hi = mid;
    }
    const std::uint64_t u = lo;
    const std::uint64_t v = u + 1 + (k - pair_block_offset(u, n));
    return {static_cast<NodeId>(u), static_cast<NodeId>(v), 1.0};
}

} // namespace detail

/// Exactly m distinct edges drawn uniformly without replacement (Floyd's
/// algorithm over the pair-index space). Unweighted (weight 1.0).
inline ContactGraph generate_uniform_random(std::size_t n, std::size_t m, std::uint64_t seed) {
    if (n < 1) throw ConfigError("uniform_random: need n >= 1");
    const std::uint64_t max_pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    if (m > max_pairs)
        throw ConfigError("uniform_random: m = " + std::to_string(m) + " exceeds n(n-1)/2 = " +
                          std::to_string(max_pairs));

    RngStream rng = RngFactory(seed).stream(streams::graph_gen);
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(m * 2);
    for (std::uint64_t j = max_pairs - m; j < max_pairs; ++j) {
        const std::uint64_t t = rng.uniform_below(j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::vector<std::uint64_t> indices(chosen.begin(), chosen.end());
    std::sort(indices.begin(), indices.end());
    std::vector<ContactGraph::Edge> edges;
    edges.reserve(m);
    for (const auto k : indices) edges.push_back(detail::decode_pair_index(k, n));
    return ContactGraph::from_edges(n, std::move(edges));
}

// ---------------------------------------------------------------------------
// Edge-list text format: "u v weight" per line, '#' comments, and an optional
// trailing per-node attribute block started by a "%nodes" line ("id label"
// per line). The attribute block is skipped unless explicitly requested.
// ---------------------------------------------------------------------------

struct LoadedGraph {
    ContactGraph graph;
    /// Per compacted node id; empty strings where the file gave no label.
    std::vector<std::string> node_labels;
};

inline LoadedGraph load_edge_list_with_attributes(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("edge list: cannot open '" + path + "'");

    struct RawEdge {
        std::uint64_t u, v;
        double w;
    };
    std::vector<RawEdge> raw;
    std::unordered_map<std::uint64_t, std::string> labels;
    std::unordered_set<std::uint64_t> seen_pairs;
    std::vector<std::uint64_t> ids;

    auto fail = [&](std::size_t line_no, const std::string& msg) {
        throw ParseError("edge list " + path + ":" + std::to_string(line_no) + ": " + msg);
    };

    std::string line;
    std::size_t line_no = 0;
    bool in_node_block = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        if (line.compare(first, 6, "%nodes") == 0) {
            in_node_block = true;
            continue;
        }
        std::istringstream ls(line);
        if (in_node_block) {
            std::uint64_t id;
            std::string label;
            if (!(ls >> id >> label)) fail(line_no, "malformed node attribute line");
            labels[id] = label;
            continue;
        }
        std::uint64_t u, v;
        double w;
        if (!(ls >> u >> v >> w)) fail(line_no, "expected 'u v weight'");
        std::string extra;
        if (ls >> extra) fail(line_no, "trailing token '" + extra + "'");
        if (u == v) fail(line_no, "self-loop on node " + std::to_string(u));
        if (!(w > 0.0) || w > 1.0) fail(line_no, "weight " + std::to_string(w) + " outside (0, 1]");
        const std::uint64_t a = std::min(u, v), b = std::max(u, v);
        if (!seen_pairs.insert((a << 32) ^ b).second)
            fail(line_no, "duplicate edge " + std::to_string(u) + "-" + std::to_string(v));
        raw.push_back({a, b, w});
        ids.push_back(a);
        ids.push_back(b);
        if (a >= (1ULL << 32) || b >= (1ULL << 32)) fail(line_no, "node id exceeds 32 bits");
    }

    // Compact ids to 0..n-1 in sorted order so agent arrays index directly.
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::unordered_map<std::uint64_t, NodeId> compact;
    compact.reserve(ids.size());
    for (NodeId i = 0; i < ids.size(); ++i) compact[ids[i]] = i;

    std::vector<ContactGraph::Edge> edges;
    edges.reserve(raw.size());
    for (const auto& e : raw) edges.push_back({compact[e.u], compact[e.v], e.w});

    LoadedGraph out;
    out.graph = ContactGraph::from_edges(ids.size(), std::move(edges));
    out.node_labels.assign(ids.size(), "");
    for (const auto& [id, label] : labels) {
        auto it = compact.find(id);
        if (it != compact.end()) out.node_labels[it->second] = label;
    }
    return out;
}

inline ContactGraph load_edge_list(const std::string& path) {
    return load_edge_list_with_attributes(path).graph;
}

inline void save_edge_list(const ContactGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("edge list: cannot write '" + path + "'");
    out << "# " << g.n_nodes << " nodes, " << g.edges.size() << " edges\n";
    char buf[64];
    for (const auto& e : g.edges) {
        std::snprintf(buf, sizeof(buf), "%u %u %.17g\n", e.u, e.v, e.weight);
        out << buf;
    }
}

/// Label-by-label contact counts; diagnostic only, computed when the edge
/// list carried node attributes.
inline std::map<std::pair<std::string, std::string>, std::size_t>
mixing_matrix(const ContactGraph& g, const std::vector<std::string>& labels) {
    std::map<std::pair<std::string, std::string>, std::size_t> mm;
    for (const auto& e : g.edges) {
        std::string a = labels[e.u], b = labels[e.v];
        if (a > b) std::swap(a, b);
        ++mm[{a, b}];
    }
    return mm;
}

// ---------------------------------------------------------------------------
// Cluster sampling with degree-preserving stub rewiring
// ---------------------------------------------------------------------------

struct RewireDiagnostics {
    std::size_t clusters_grown = 0;
    std::size_t internal_edges = 0;
    std::size_t stubs_collected = 0;
    std::size_t stubs_matched = 0;
    std::size_t stubs_dropped = 0;
    /// L1 distance between the output degree histogram and the target
    /// histogram implied by internal degree + collected stubs.
    std::size_t histogram_l1 = 0;
};

struct SampledGraph {
    ContactGraph graph;
    RewireDiagnostics diag;
};

/// Downsample g to target_n nodes: grow BFS balls from random roots until
/// target_n nodes are collected, keep all internal edges, then re-pair the
/// cut-edge stubs configuration-model style to preserve per-node degree.
/// A re-paired edge takes the mean weight of its two stubs. Stubs that still
/// collide after max_attempts shuffles are dropped.
inline SampledGraph sample_and_rewire(const ContactGraph& g, std::size_t target_n,
                                      std::uint64_t seed, std::size_t max_attempts = 16) {
    if (target_n >= g.n_nodes)
        throw ConfigError("sample_and_rewire: target_n must be < n_nodes");
    if (target_n == 0) throw ConfigError("sample_and_rewire: target_n must be >= 1");

    RngStream rng = RngFactory(seed).stream(streams::rewire);
    RewireDiagnostics diag;

    // BFS-grow clusters from uniformly random unvisited roots.
    std::vector<NodeId> picked;
    picked.reserve(target_n);
    std::vector<char> visited(g.n_nodes, 0);
    while (picked.size() < target_n) {
        NodeId root;
        do {
            root = static_cast<NodeId>(rng.uniform_below(g.n_nodes));
        } while (visited[root]);
        ++diag.clusters_grown;
        std::vector<NodeId> queue{root};
        visited[root] = 1;
        std::size_t head = 0;
        picked.push_back(root);
        while (head < queue.size() && picked.size() < target_n) {
            const NodeId cur = queue[head++];
            for (const auto& nb : g.adjacency[cur]) {
                if (visited[nb.id]) continue;
                visited[nb.id] = 1;
                queue.push_back(nb.id);
                picked.push_back(nb.id);
                if (picked.size() == target_n) break;
            }
        }
    }

    std::sort(picked.begin(), picked.end());
    std::vector<NodeId> compact(g.n_nodes, 0);
    std::vector<char> in_sample(g.n_nodes, 0);
    for (NodeId i = 0; i < picked.size(); ++i) {
        compact[picked[i]] = i;
        in_sample[picked[i]] = 1;
    }

    struct Stub {
        NodeId node; // compacted id
        double weight;
    };
    std::vector<ContactGraph::Edge> edges;
    std::vector<Stub> stubs;
    for (const auto& e : g.edges) {
        const bool iu = in_sample[e.u], iv = in_sample[e.v];
        if (iu && iv) {
            edges.push_back({compact[e.u], compact[e.v], e.weight});
        } else if (iu) {
            stubs.push_back({compact[e.u], e.weight});
        } else if (iv) {
            stubs.push_back({compact[e.v], e.weight});
        }
    }
    diag.internal_edges = edges.size();
    diag.stubs_collected = stubs.size();

    // Target histogram: internal degree + collected stubs per node (equals
    // each sampled node's original degree in g).
    std::vector<std::size_t> target_degree(target_n, 0);
    for (const auto& e : edges) {
        ++target_degree[e.u];
        ++target_degree[e.v];
    }
    for (const auto& s : stubs) ++target_degree[s.node];
    DegreeHistogram target_hist;
    for (const auto d : target_degree) ++target_hist[d];

    std::unordered_set<std::uint64_t> existing;
    existing.reserve(edges.size() * 2);
    auto edge_key = [](NodeId a, NodeId b) {
        return (static_cast<std::uint64_t>(std::min(a, b)) << 32) ^ std::max(a, b);
    };
    for (const auto& e : edges) existing.insert(edge_key(e.u, e.v));

    // Iterative pairing: shuffle, pair adjacent stubs, carry failures over.
    std::vector<Stub> pending = std::move(stubs);
    for (std::size_t attempt = 0; attempt < max_attempts && pending.size() >= 2; ++attempt) {
        for (std::size_t i = pending.size(); i > 1; --i) {
            const auto j = rng.uniform_below(i);
            std::swap(pending[i - 1], pending[j]);
        }
        std::vector<Stub> carry;
        for (std::size_t i = 0; i + 1 < pending.size(); i += 2) {
            const Stub& a = pending[i];
            const Stub& b = pending[i + 1];
            if (a.node == b.node || existing.contains(edge_key(a.node, b.node))) {
                carry.push_back(a);
                carry.push_back(b);
                continue;
            }
            existing.insert(edge_key(a.node, b.node));
            edges.push_back({std::min(a.node, b.node), std::max(a.node, b.node),
                             0.5 * (a.weight + b.weight)});
            diag.stubs_matched += 2;
        }
        if (pending.size() % 2 == 1) carry.push_back(pending.back());
        pending = std::move(carry);
    }
    diag.stubs_dropped = pending.size();

    SampledGraph out;
    out.graph = ContactGraph::from_edges(target_n, std::move(edges));
    out.diag = diag;
    out.diag.histogram_l1 = histogram_l1_distance(degree_histogram(out.graph), target_hist);
    return out;
}

} // namespace masksim
