#include "kg/embedding.hpp"

#include "http_util.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <numeric>
#include <sstream>

namespace kg {

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size())
        throw Error("cosine_similarity: dimension mismatch (" + std::to_string(a.size()) +
                    " vs " + std::to_string(b.size()) + ")");
    double na = a.norm();
    double nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw Error("cosine_similarity: zero vector has no direction");
    return a.dot(b) / (na * nb);
}

std::string truncate_to_tokens(const std::string& text, int max_tokens) {
    std::istringstream in(text);
    std::string word;
    std::string out;
    int count = 0;
    while (count < max_tokens && in >> word) {
        if (!out.empty()) out += ' ';
        out += word;
        ++count;
    }
    if (in >> word) return out; // something was cut
    return out.empty() ? text : out;
}

EmbeddingVector EmbeddingProvider::embed_one(const std::string& text) {
    auto vectors = embed({text});
    if (vectors.size() != 1) throw Error("embed: provider returned wrong vector count");
    return std::move(vectors[0]);
}

namespace {

std::uint64_t fnv1a64(const std::string& text, std::uint64_t seed) {
    std::uint64_t hash = 14695981039346656037ULL ^ seed;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

// uniform in (0,1), fully determined by the engine state
double next_uniform(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace

HashEmbeddingProvider::HashEmbeddingProvider(int dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
    if (dimension < 1) throw Error("HashEmbeddingProvider: dimension must be positive");
}

std::string HashEmbeddingProvider::fingerprint() const {
    return "hash-mock/d" + std::to_string(dimension_) + "/s" + std::to_string(seed_);
}

void HashEmbeddingProvider::set_override(const std::string& text, EmbeddingVector raw) {
    if (raw.size() != dimension_) throw Error("set_override: wrong dimension");
    overrides_[text] = std::move(raw);
}

std::vector<EmbeddingVector> HashEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        auto hit = overrides_.find(text);
        if (hit != overrides_.end()) {
            out.push_back(hit->second);
            continue;
        }
        std::mt19937_64 rng(fnv1a64(text, seed_));
        EmbeddingVector v(dimension_);
        // Box-Muller from the raw engine stream keeps this reproducible
        // across standard libraries.
        for (int i = 0; i < dimension_; i += 2) {
            double u1 = next_uniform(rng);
            double u2 = next_uniform(rng);
            double r = std::sqrt(-2.0 * std::log(u1));
            v[i] = r * std::cos(2.0 * M_PI * u2);
            if (i + 1 < dimension_) v[i + 1] = r * std::sin(2.0 * M_PI * u2);
        }
        out.push_back(std::move(v));
    }
    return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEmbeddingConfig config)
    : config_(std::move(config)) {
    if (config_.dimension < 1) throw Error("HttpEmbeddingProvider: dimension must be positive");
}

std::string HttpEmbeddingProvider::fingerprint() const {
    return config_.endpoint + "|" + config_.model + "|d" + std::to_string(config_.dimension);
}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    auto url = detail::parse_url(config_.endpoint);
    httplib::Client client(url.base);
    client.set_read_timeout(config_.timeout_seconds, 0);
    client.set_connection_timeout(config_.timeout_seconds, 0);

    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    nlohmann::json body = {{"model", config_.model}, {"input", texts}};
    auto res = client.Post(url.path + "/embeddings", headers, body.dump(), "application/json");
    if (!res) throw Error("embedding request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw Error("embedding endpoint returned status " + std::to_string(res->status));

    nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("data") || !parsed["data"].is_array() ||
        parsed["data"].size() != texts.size())
        throw Error("embedding endpoint returned malformed payload");

    std::vector<EmbeddingVector> out(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const auto& arr = parsed["data"][i]["embedding"];
        if (!arr.is_array() || static_cast<int>(arr.size()) != config_.dimension)
            throw Error("embedding for input " + std::to_string(i) + " has wrong dimension");
        EmbeddingVector v(config_.dimension);
        for (int d = 0; d < config_.dimension; ++d) v[d] = arr[d].get<double>();
        out[i] = std::move(v);
    }
    return out;
}

NodeEmbeddingIndex::NodeEmbeddingIndex(std::map<NodeId, IndexEntry> entries,
                                       std::string fingerprint, int dimension)
    : entries_(std::move(entries)), fingerprint_(std::move(fingerprint)), dimension_(dimension) {}

bool NodeEmbeddingIndex::covers(const KnowledgeGraph& g) const {
    for (const auto& [id, rec] : g.nodes()) {
        if (!entries_.count(id)) return false;
    }
    return true;
}

const EmbeddingVector& NodeEmbeddingIndex::vector_of(NodeId id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw Error("index: no embedding for node " + std::to_string(id));
    return it->second.vector;
}

namespace {

EmbeddingVector normalized_or_throw(EmbeddingVector v, const std::string& label) {
    if (!v.allFinite()) throw Error("embedding for '" + label + "' has non-finite entries");
    double norm = v.norm();
    if (norm == 0.0) throw Error("embedding for '" + label + "' is the zero vector");
    return v / norm;
}

} // namespace

NodeEmbeddingIndex embed_nodes(const KnowledgeGraph& g, EmbeddingProvider& provider,
                               int parallelism) {
    if (parallelism < 1) parallelism = 1;
    std::vector<NodeId> ids;
    std::vector<std::string> texts;
    ids.reserve(g.node_count());
    for (const auto& [id, rec] : g.nodes()) {
        ids.push_back(id);
        texts.push_back(truncate_to_tokens(rec.label, provider.max_input_tokens()));
    }

    std::vector<EmbeddingVector> vectors(ids.size());
    const std::size_t batch = 64;
    std::vector<std::string> failed;
    std::size_t cursor = 0;
    while (cursor < ids.size()) {
        // fan out up to `parallelism` batches, then collect into fixed slots
        std::vector<std::pair<std::size_t, std::future<std::vector<EmbeddingVector>>>> inflight;
        for (int p = 0; p < parallelism && cursor < ids.size(); ++p) {
            std::size_t begin = cursor;
            std::size_t end = std::min(cursor + batch, ids.size());
            cursor = end;
            std::vector<std::string> slice(texts.begin() + begin, texts.begin() + end);
            inflight.emplace_back(begin, std::async(std::launch::async,
                                                    [&provider, slice = std::move(slice)] {
                                                        return provider.embed(slice);
                                                    }));
        }
        for (auto& [begin, fut] : inflight) {
            try {
                auto got = fut.get();
                for (std::size_t i = 0; i < got.size(); ++i)
                    vectors[begin + i] = std::move(got[i]);
            } catch (const std::exception& e) {
                std::size_t end = std::min(begin + batch, ids.size());
                for (std::size_t i = begin; i < end; ++i) failed.push_back(g.node(ids[i]).label);
            }
        }
    }
    if (!failed.empty()) {
        std::string msg = "embed_nodes: provider failed for " + std::to_string(failed.size()) +
                          " label(s):";
        for (std::size_t i = 0; i < failed.size() && i < 8; ++i) msg += " '" + failed[i] + "'";
        throw Error(msg);
    }

    std::map<NodeId, IndexEntry> entries;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        entries.emplace(ids[i], IndexEntry{g.node(ids[i]).label,
                                           normalized_or_throw(std::move(vectors[i]),
                                                               g.node(ids[i]).label)});
    }
    return NodeEmbeddingIndex(std::move(entries), provider.fingerprint(), provider.dimension());
}

std::vector<NodeMatch> match_nodes(const NodeEmbeddingIndex& index, const std::string& query,
                                   int k, EmbeddingProvider& provider) {
    if (k < 1) throw Error("match_nodes: k must be >= 1");
    if (index.size() == 0) return {};
    EmbeddingVector q = provider.embed_one(truncate_to_tokens(query, provider.max_input_tokens()));
    q = normalized_or_throw(std::move(q), "<query>");

    std::vector<NodeMatch> matches;
    matches.reserve(index.size());
    for (const auto& [id, entry] : index.entries())
        matches.push_back({id, entry.label, q.dot(entry.vector)});
    std::sort(matches.begin(), matches.end(), [](const NodeMatch& a, const NodeMatch& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.label < b.label;
    });
    if (static_cast<std::size_t>(k) < matches.size()) matches.resize(k);
    return matches;
}

namespace {

struct UnionFind {
    std::map<NodeId, NodeId> parent;
    NodeId find(NodeId x) {
        auto it = parent.find(x);
        if (it == parent.end() || it->second == x) return x;
        return it->second = find(it->second);
    }
    void unite(NodeId a, NodeId b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent[b] = a; // smaller id becomes the root, keeps output deterministic
    }
};

} // namespace

std::vector<MergeGroup> similarity_merge_groups(const NodeEmbeddingIndex& index,
                                                const KnowledgeGraph& g, double eta) {
    if (!index.covers(g)) throw Error("similarity_merge_groups: index does not cover the graph");
    std::vector<NodeId> ids;
    ids.reserve(index.size());
    for (const auto& [id, entry] : index.entries())
        if (g.has_node(id)) ids.push_back(id);

    const std::size_t n = ids.size();
    if (n < 2) return {};
    const int dim = index.dimension();

    Eigen::MatrixXd m(n, dim);
    for (std::size_t i = 0; i < n; ++i) m.row(i) = index.vector_of(ids[i]).transpose();

    UnionFind uf;
    const std::size_t block = 512;
    for (std::size_t row = 0; row < n; row += block) {
        std::size_t rows = std::min(block, n - row);
        // vectors are unit length, so the Gram block holds cosine similarities
        Eigen::MatrixXd sims = m.middleRows(row, rows) * m.transpose();
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = row + i + 1; j < n; ++j) {
                if (sims(i, j) > eta) uf.unite(ids[row + i], ids[j]);
            }
        }
    }

    std::map<NodeId, std::set<NodeId>> classes;
    for (NodeId id : ids) classes[uf.find(id)].insert(id);

    std::vector<MergeGroup> groups;
    for (auto& [root, members] : classes) {
        if (members.size() < 2) continue;
        groups.push_back(make_merge_group(g, std::move(members)));
    }
    return groups;
}

} // namespace kg
