#include "kg/iso.hpp"

#include "kg/stats.hpp"

#include <algorithm>
#include <queue>

namespace kg {

namespace {

double induced_avg_degree(const KnowledgeGraph& g, const std::set<NodeId>& nodes) {
    if (nodes.empty()) return 0.0;
    std::int64_t twice_edges = 0;
    for (NodeId id : nodes) {
        for (NodeId nb : g.neighbors(id))
            if (nodes.count(nb)) ++twice_edges;
    }
    return static_cast<double>(twice_edges) / static_cast<double>(nodes.size());
}

std::set<NodeId> ego_network(const KnowledgeGraph& g, NodeId seed, int hops) {
    std::set<NodeId> nodes = {seed};
    std::set<NodeId> frontier = {seed};
    for (int h = 0; h < hops; ++h) {
        std::set<NodeId> next;
        for (NodeId id : frontier)
            for (NodeId nb : g.neighbors(id))
                if (!nodes.count(nb)) next.insert(nb);
        nodes.insert(next.begin(), next.end());
        frontier = std::move(next);
    }
    return nodes;
}

std::vector<std::set<NodeId>> split_connected(const KnowledgeGraph& g,
                                              const std::set<NodeId>& nodes) {
    std::vector<std::set<NodeId>> parts;
    std::set<NodeId> seen;
    for (NodeId start : nodes) {
        if (seen.count(start)) continue;
        std::set<NodeId> part;
        std::queue<NodeId> q;
        q.push(start);
        seen.insert(start);
        while (!q.empty()) {
            NodeId cur = q.front();
            q.pop();
            part.insert(cur);
            for (NodeId nb : g.neighbors(cur))
                if (nodes.count(nb) && seen.insert(nb).second) q.push(nb);
        }
        parts.push_back(std::move(part));
    }
    return parts;
}

} // namespace

std::vector<CandidateSubgraph> enumerate_candidates(const KnowledgeGraph& g,
                                                    const IsoConstraints& constraints,
                                                    const std::string& origin) {
    if (g.node_count() == 0) return {};
    std::set<NodeId> scope_nodes;
    if (constraints.search_scope == IsoScope::giant_components_only) {
        auto components = connected_components(g);
        const std::set<NodeId>* best = nullptr;
        for (const auto& comp : components) {
            if (!best || comp.size() > best->size() ||
                (comp.size() == best->size() && *comp.begin() < *best->begin()))
                best = &comp;
        }
        scope_nodes = *best;
    } else {
        for (const auto& [id, rec] : g.nodes()) scope_nodes.insert(id);
    }
    KnowledgeGraph scoped = induced_subgraph(g, scope_nodes);
    // scoped ids differ from g's; translate back through labels
    auto to_g_ids = [&](const std::set<NodeId>& scoped_ids) {
        std::set<NodeId> out;
        for (NodeId id : scoped_ids) out.insert(*g.find_label(scoped.node(id).label));
        return out;
    };

    std::vector<std::set<NodeId>> raw;
    CommunityPartition partition = detect_communities(scoped);
    for (const auto& community : partition.communities) raw.push_back(to_g_ids(community));

    auto betweenness = betweenness_centrality(scoped);
    std::vector<std::pair<double, NodeId>> ranked;
    for (const auto& [id, score] : betweenness) ranked.emplace_back(score, id);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t i = 0; i < ranked.size() && i < 20; ++i)
        raw.push_back(to_g_ids(ego_network(scoped, ranked[i].second, 2)));

    std::set<std::set<NodeId>> seen;
    std::vector<CandidateSubgraph> out;
    for (const auto& nodes : raw) {
        for (auto& part : split_connected(g, nodes)) {
            if (static_cast<int>(part.size()) < constraints.min_nodes) continue;
            double avg = induced_avg_degree(g, part);
            if (avg < constraints.min_avg_degree) continue;
            if (!seen.insert(part).second) continue;
            CandidateSubgraph c;
            c.origin = origin;
            c.size = part.size();
            c.avg_degree = avg;
            c.nodes = std::move(part);
            out.push_back(std::move(c));
        }
    }
    std::sort(out.begin(), out.end(), [](const CandidateSubgraph& a, const CandidateSubgraph& b) {
        if (a.size != b.size) return a.size > b.size;
        return *a.nodes.begin() < *b.nodes.begin();
    });
    return out;
}

namespace {

// dense induced adjacency for backtracking
struct LocalView {
    std::vector<NodeId> ids; // local index -> graph node id
    std::vector<std::vector<char>> adj;
    std::vector<int> degree;

    LocalView(const KnowledgeGraph& g, const std::set<NodeId>& nodes) {
        ids.assign(nodes.begin(), nodes.end());
        const int n = static_cast<int>(ids.size());
        std::map<NodeId, int> index;
        for (int i = 0; i < n; ++i) index[ids[i]] = i;
        adj.assign(n, std::vector<char>(n, 0));
        degree.assign(n, 0);
        for (int i = 0; i < n; ++i) {
            for (NodeId nb : g.neighbors(ids[i])) {
                auto it = index.find(nb);
                if (it == index.end()) continue;
                adj[i][it->second] = 1;
                ++degree[i];
            }
        }
    }

    std::vector<int> sorted_degrees() const {
        std::vector<int> d(degree);
        std::sort(d.begin(), d.end());
        return d;
    }
};

class Vf2Matcher {
public:
    Vf2Matcher(const LocalView& a, const LocalView& b, std::chrono::milliseconds timeout)
        : a_(a), b_(b), deadline_(std::chrono::steady_clock::now() + timeout) {
        order_ = connectivity_order();
    }

    // enumerate mappings until `limit` found; false when the timeout fired
    bool enumerate(int limit, std::vector<std::map<NodeId, NodeId>>& out) {
        const int n = static_cast<int>(a_.ids.size());
        map_ab_.assign(n, -1);
        used_b_.assign(n, 0);
        limit_ = limit;
        out_ = &out;
        timed_out_ = false;
        backtrack(0);
        return !timed_out_;
    }

private:
    // pick next vertex maximally connected to the already-ordered set
    std::vector<int> connectivity_order() {
        const int n = static_cast<int>(a_.ids.size());
        std::vector<int> order;
        std::vector<char> placed(n, 0);
        for (int step = 0; step < n; ++step) {
            int best = -1, best_links = -1, best_degree = -1;
            for (int v = 0; v < n; ++v) {
                if (placed[v]) continue;
                int links = 0;
                for (int u : order) links += a_.adj[v][u];
                if (links > best_links ||
                    (links == best_links && a_.degree[v] > best_degree)) {
                    best = v;
                    best_links = links;
                    best_degree = a_.degree[v];
                }
            }
            placed[best] = 1;
            order.push_back(best);
        }
        return order;
    }

    void backtrack(int depth) {
        if (timed_out_ || static_cast<int>(out_->size()) >= limit_) return;
        if (++steps_ % 1024 == 0 && std::chrono::steady_clock::now() > deadline_) {
            timed_out_ = true;
            return;
        }
        const int n = static_cast<int>(a_.ids.size());
        if (depth == n) {
            std::map<NodeId, NodeId> mapping;
            for (int v = 0; v < n; ++v) mapping[a_.ids[v]] = b_.ids[map_ab_[v]];
            out_->push_back(std::move(mapping));
            return;
        }
        int u = order_[depth];
        for (int v = 0; v < n; ++v) {
            if (used_b_[v] || b_.degree[v] != a_.degree[u]) continue;
            bool ok = true;
            for (int d = 0; d < depth; ++d) {
                int prev_a = order_[d];
                if (a_.adj[u][prev_a] != b_.adj[v][map_ab_[prev_a]]) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            map_ab_[u] = v;
            used_b_[v] = 1;
            backtrack(depth + 1);
            map_ab_[u] = -1;
            used_b_[v] = 0;
            if (timed_out_ || static_cast<int>(out_->size()) >= limit_) return;
        }
    }

    const LocalView& a_;
    const LocalView& b_;
    std::chrono::steady_clock::time_point deadline_;
    std::vector<int> order_;
    std::vector<int> map_ab_;
    std::vector<char> used_b_;
    std::vector<std::map<NodeId, NodeId>>* out_ = nullptr;
    int limit_ = 0;
    long steps_ = 0;
    bool timed_out_ = false;
};

std::vector<std::pair<EdgeKey, EdgeKey>> induced_edge_pairs(
    const KnowledgeGraph& g1, const KnowledgeGraph& g2,
    const std::map<NodeId, NodeId>& node_pairs) {
    std::vector<std::pair<EdgeKey, EdgeKey>> out;
    for (auto it = node_pairs.begin(); it != node_pairs.end(); ++it) {
        for (auto jt = std::next(it); jt != node_pairs.end(); ++jt) {
            if (g1.find_edge(it->first, jt->first)) {
                out.emplace_back(make_edge_key(it->first, jt->first),
                                 make_edge_key(it->second, jt->second));
            }
        }
    }
    return out;
}

} // namespace

std::vector<IsoMapping> find_isomorphic_subgraphs(const KnowledgeGraph& g1,
                                                  const KnowledgeGraph& g2,
                                                  const IsoConstraints& constraints,
                                                  std::vector<std::string>* skipped) {
    if (g1.node_count() == 0 || g2.node_count() == 0)
        throw Error("find_isomorphic_subgraphs: empty input graph");

    auto candidates1 = enumerate_candidates(g1, constraints, "g1");
    auto candidates2 = enumerate_candidates(g2, constraints, "g2");

    struct Pair {
        std::size_t i, j, size;
    };
    std::vector<Pair> pairs;
    std::vector<LocalView> views1, views2;
    views1.reserve(candidates1.size());
    views2.reserve(candidates2.size());
    for (const auto& c : candidates1) views1.emplace_back(g1, c.nodes);
    for (const auto& c : candidates2) views2.emplace_back(g2, c.nodes);

    for (std::size_t i = 0; i < candidates1.size(); ++i) {
        for (std::size_t j = 0; j < candidates2.size(); ++j) {
            if (candidates1[i].size != candidates2[j].size) continue;
            if (views1[i].sorted_degrees() != views2[j].sorted_degrees()) continue;
            pairs.push_back({i, j, candidates1[i].size});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.size != b.size) return a.size > b.size;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });

    std::vector<IsoMapping> results;
    for (const auto& pair : pairs) {
        int remaining = constraints.max_mappings - static_cast<int>(results.size());
        if (remaining <= 0) break;
        Vf2Matcher matcher(views1[pair.i], views2[pair.j], constraints.pair_timeout);
        std::vector<std::map<NodeId, NodeId>> found;
        bool completed = matcher.enumerate(remaining, found);
        if (!completed) {
            if (skipped)
                skipped->push_back("timeout matching candidate pair (" + std::to_string(pair.i) +
                                   ", " + std::to_string(pair.j) + ") of size " +
                                   std::to_string(pair.size));
            continue;
        }
        for (auto& node_pairs : found) {
            IsoMapping mapping;
            mapping.edge_pairs = induced_edge_pairs(g1, g2, node_pairs);
            mapping.node_pairs = std::move(node_pairs);
            if (!verify_mapping(g1, g2, mapping))
                throw Error("find_isomorphic_subgraphs: search emitted an invalid mapping");
            results.push_back(std::move(mapping));
        }
    }
    return results;
}

bool verify_mapping(const KnowledgeGraph& g1, const KnowledgeGraph& g2,
                    const IsoMapping& mapping) {
    std::set<NodeId> range;
    for (const auto& [u, v] : mapping.node_pairs) {
        if (!g1.has_node(u) || !g2.has_node(v)) return false;
        if (!range.insert(v).second) return false; // not injective
    }
    for (auto it = mapping.node_pairs.begin(); it != mapping.node_pairs.end(); ++it) {
        for (auto jt = std::next(it); jt != mapping.node_pairs.end(); ++jt) {
            bool in_g1 = g1.find_edge(it->first, jt->first) != nullptr;
            bool in_g2 = g2.find_edge(it->second, jt->second) != nullptr;
            if (in_g1 != in_g2) return false;
        }
    }
    return true;
}

namespace {

std::string edge_text(const KnowledgeGraph& g, const EdgeKey& key) {
    const EdgeRecord* e = g.find_edge(key.first, key.second);
    if (!e) throw Error("mapping_report: edge not found");
    return g.node(key.first).label + " -- " + e->relation + " -- " + g.node(key.second).label;
}

std::string csv_escape(const std::string& text) {
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::string latex_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        if (c == '&' || c == '%' || c == '#' || c == '_') out += std::string("\\") + c;
        else out += c;
    }
    return out;
}

} // namespace

MappingReport mapping_report(const KnowledgeGraph& g1, const KnowledgeGraph& g2,
                             const IsoMapping& mapping) {
    if (!verify_mapping(g1, g2, mapping)) throw Error("mapping_report: invalid mapping");
    MappingReport report;
    for (const auto& [u, v] : mapping.node_pairs)
        report.node_rows.push_back({g1.node(u).label, g2.node(v).label});
    for (const auto& [e1, e2] : mapping.edge_pairs)
        report.edge_rows.push_back({edge_text(g1, e1), edge_text(g2, e2)});
    return report;
}

std::string mapping_report_csv(const MappingReport& report) {
    std::string out = "section,g1,g2,reasoning\n";
    for (const auto& row : report.node_rows)
        out += "node," + csv_escape(row.g1_text) + "," + csv_escape(row.g2_text) + ",\n";
    for (const auto& row : report.edge_rows)
        out += "edge," + csv_escape(row.g1_text) + "," + csv_escape(row.g2_text) + ",\n";
    return out;
}

std::string mapping_report_latex(const MappingReport& report) {
    std::string out;
    out += "\\begin{tabular}{|l|l|l|}\n\\hline\n";
    out += "\\textbf{G1 Node} & \\textbf{G2 Node} & \\textbf{Reasoning} \\\\ \\hline\n";
    for (const auto& row : report.node_rows)
        out += latex_escape(row.g1_text) + " & " + latex_escape(row.g2_text) + " &  \\\\ \\hline\n";
    out += "\\end{tabular}\n\n";
    out += "\\begin{tabular}{|l|l|l|}\n\\hline\n";
    out += "\\textbf{Edge Mapping from G1} & \\textbf{Edge Mapping to G2} & \\textbf{Reasoning} "
           "\\\\ \\hline\n";
    for (const auto& row : report.edge_rows)
        out += latex_escape(row.g1_text) + " & " + latex_escape(row.g2_text) + " &  \\\\ \\hline\n";
    out += "\\end{tabular}\n";
    return out;
}

} // namespace kg
