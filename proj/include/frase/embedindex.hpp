#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace frase::framenet {
struct FrameInventory;
}

namespace frase::embed {

using EmbeddingVector = std::vector<float>;

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dim() const = 0;
    virtual std::string id() const = 0;
    // Must be deterministic for a fixed provider configuration.
    virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) = 0;
};

// Embeds a single text; throws InputError when the text is empty after
// whitespace normalization, ServiceError on provider failure or a dimension
// mismatch against the provider's declared dim.
EmbeddingVector embed_text(EmbeddingProvider& provider, const std::string& text);

// Deterministic offline provider: FNV-hashed word tokens folded into a
// fixed-dimension vector, L2-normalized. Same text always embeds identically.
class HashFoldProvider : public EmbeddingProvider {
public:
    explicit HashFoldProvider(std::size_t dim = 256);
    std::size_t dim() const override { return dim_; }
    std::string id() const override;
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

    static EmbeddingVector fold(const std::string& text, std::size_t dim);

private:
    std::size_t dim_;
};

// Remote provider speaking POST {"texts": [...]} -> {"vectors": [[...], ...]}.
class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(std::string url, std::size_t expected_dim, int timeout_ms = 30000,
                          std::size_t batch_size = 32);
    std::size_t dim() const override { return dim_; }
    std::string id() const override;
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

private:
    std::string url_;
    std::size_t dim_;
    int timeout_ms_;
    std::size_t batch_size_;
};

struct SearchHit {
    std::string item_id;
    double score = 0.0;  // cosine similarity in [-1, 1]
};

// Exact top-k cosine index. Immutable after build; concurrent searches are
// safe. Corpora at FrameNet scale (~1.2k items) never justify ANN here.
class VectorIndex {
public:
    VectorIndex() = default;
    explicit VectorIndex(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    const std::string& provider_id() const { return provider_id_; }
    void set_provider_id(std::string id) { provider_id_ = std::move(id); }
    const std::vector<std::string>& ids() const { return ids_; }

    // Throws InputError on duplicate id or dimension mismatch.
    void add(const std::string& item_id, const EmbeddingVector& vector);

    // k >= 1; returns min(k, size()) hits sorted by descending score, ties by
    // ascending item_id.
    std::vector<SearchHit> search(const EmbeddingVector& query, std::size_t k) const;

    // Flat little-endian float32 payload behind a JSON header
    // {dim, provider, count, ids}; byte-identical across rebuilds.
    void save(const std::filesystem::path& path) const;
    static VectorIndex load(const std::filesystem::path& path);

private:
    std::size_t dim_ = 0;
    std::string provider_id_;
    std::vector<std::string> ids_;
    std::vector<float> data_;    // row-major, size() * dim_
    std::vector<double> norms_;  // cached L2 norms per row
};

// One item per frame: item_id = frame id, vector = embed(render_frame_text).
// With a checkpoint path, a provider failure mid-build persists the partial
// index there and rethrows; the next build resumes from it (same provider and
// dim required) and removes it on success.
VectorIndex build_frame_index(const framenet::FrameInventory& inventory,
                              EmbeddingProvider& provider,
                              const std::filesystem::path& checkpoint = {});

}  // namespace frase::embed
