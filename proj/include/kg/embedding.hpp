#pragma once

#include "kg/graph.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace kg {

using EmbeddingVector = Eigen::VectorXd;

/// (a.b)/(|a||b|). Throws on dimension mismatch or zero vectors.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Truncate to the first `max_tokens` whitespace-separated words.
std::string truncate_to_tokens(const std::string& text, int max_tokens);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual int dimension() const = 0;
    virtual int max_input_tokens() const { return 512; }
    virtual std::string fingerprint() const = 0;
    /// One raw (unnormalized) vector per input text, in input order.
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;

    EmbeddingVector embed_one(const std::string& text);
};

/// Deterministic hash-seeded provider for hermetic runs. Identical text maps
/// to the identical vector; distinct texts are near-orthogonal in expectation.
class HashEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HashEmbeddingProvider(int dimension = 256, std::uint64_t seed = 0);

    int dimension() const override { return dimension_; }
    std::string fingerprint() const override;
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

    /// Raw-vector injection hook: force the vector returned for `text`.
    void set_override(const std::string& text, EmbeddingVector raw);

private:
    int dimension_;
    std::uint64_t seed_;
    std::map<std::string, EmbeddingVector> overrides_;
};

struct HttpEmbeddingConfig {
    std::string endpoint; // base URL, e.g. http://localhost:8080/v1
    std::string model;
    std::string api_key_env; // name of the env var holding the key, may be empty
    int dimension = 1024;
    int max_input_tokens = 512;
    int timeout_seconds = 120;
};

/// Client for an embeddings endpoint: POST {endpoint}/embeddings with
/// {"model":..., "input":[texts]}, expecting {"data":[{"embedding":[...]},...]}.
class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(HttpEmbeddingConfig config);

    int dimension() const override { return config_.dimension; }
    int max_input_tokens() const override { return config_.max_input_tokens; }
    std::string fingerprint() const override;
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

private:
    HttpEmbeddingConfig config_;
};

struct IndexEntry {
    std::string label;
    EmbeddingVector vector; // stored L2-normalized
};

struct NodeMatch {
    NodeId id = 0;
    std::string label;
    double score = 0.0; // cosine similarity to the query
};

class NodeEmbeddingIndex {
public:
    NodeEmbeddingIndex() = default;
    NodeEmbeddingIndex(std::map<NodeId, IndexEntry> entries, std::string fingerprint, int dimension);

    const std::map<NodeId, IndexEntry>& entries() const { return entries_; }
    const std::string& fingerprint() const { return fingerprint_; }
    int dimension() const { return dimension_; }
    std::size_t size() const { return entries_.size(); }
    bool covers(const KnowledgeGraph& g) const;
    const EmbeddingVector& vector_of(NodeId id) const;

private:
    std::map<NodeId, IndexEntry> entries_;
    std::string fingerprint_;
    int dimension_ = 0;
};

/// One normalized vector per node label. Labels longer than the provider's
/// token limit are truncated before embedding. `parallelism` bounds the
/// number of concurrent embed batches.
NodeEmbeddingIndex embed_nodes(const KnowledgeGraph& g, EmbeddingProvider& provider,
                               int parallelism = 1);

/// Top-k nodes by cosine similarity, descending; ties broken by label.
std::vector<NodeMatch> match_nodes(const NodeEmbeddingIndex& index, const std::string& query,
                                   int k, EmbeddingProvider& provider);

/// Connected components of the "similarity > eta" relation over node pairs;
/// only groups of two or more nodes are returned, ordered by smallest member.
std::vector<MergeGroup> similarity_merge_groups(const NodeEmbeddingIndex& index,
                                                const KnowledgeGraph& g, double eta = 0.95);

} // namespace kg
