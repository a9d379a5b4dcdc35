#include "frase/embedindex.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include <httplib.h>

#include "frase/common.hpp"
#include "frase/framenet.hpp"
#include "frase/jsonio.hpp"

static_assert(sizeof(float) == 4, "float32 persistence assumes 4-byte floats");

namespace frase::embed {

EmbeddingVector embed_text(EmbeddingProvider& provider, const std::string& text) {
    if (normalize_whitespace(text).empty())
        throw InputError("embed_text: text is empty after normalization");
    auto vectors = provider.embed_batch({text});
    if (vectors.size() != 1)
        throw ServiceError("embedding provider returned " + std::to_string(vectors.size()) +
                           " vectors for 1 text");
    if (vectors[0].size() != provider.dim())
        throw ServiceError("embedding dimension mismatch: got " +
                           std::to_string(vectors[0].size()) + ", provider declares " +
                           std::to_string(provider.dim()));
    for (float v : vectors[0])
        if (!std::isfinite(v)) throw ServiceError("non-finite embedding component");
    return vectors[0];
}

HashFoldProvider::HashFoldProvider(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw InputError("hash-fold dim must be positive");
}

std::string HashFoldProvider::id() const { return "hash-fold-" + std::to_string(dim_); }

EmbeddingVector HashFoldProvider::fold(const std::string& text, std::size_t dim) {
    EmbeddingVector v(dim, 0.0f);
    for (const std::string& token : word_tokens(text)) {
        std::uint64_t h = fnv1a64(token);
        std::size_t slot = static_cast<std::size_t>(h % dim);
        float sign = (h >> 63) ? -1.0f : 1.0f;
        v[slot] += sign;
    }
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (float& x : v) x = static_cast<float>(x / norm);
    return v;
}

std::vector<EmbeddingVector> HashFoldProvider::embed_batch(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(fold(t, dim_));
    return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string url, std::size_t expected_dim,
                                             int timeout_ms, std::size_t batch_size)
    : url_(std::move(url)), dim_(expected_dim), timeout_ms_(timeout_ms),
      batch_size_(batch_size ? batch_size : 1) {}

std::string HttpEmbeddingProvider::id() const { return "http:" + url_ + ":" + std::to_string(dim_); }

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
    // split scheme://host[:port] from path
    std::size_t scheme = url_.find("://");
    std::size_t path_pos = scheme == std::string::npos ? url_.find('/')
                                                       : url_.find('/', scheme + 3);
    std::string base = path_pos == std::string::npos ? url_ : url_.substr(0, path_pos);
    std::string path = path_pos == std::string::npos ? "/" : url_.substr(path_pos);

    httplib::Client client(base);
    client.set_connection_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
    client.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
        std::size_t end = std::min(texts.size(), start + batch_size_);
        json body = {{"texts", json::array()}};
        for (std::size_t i = start; i < end; ++i) body["texts"].push_back(texts[i]);
        auto res = client.Post(path, body.dump(), "application/json");
        if (!res)
            throw ServiceError("embedding service unreachable: " + url_);
        if (res->status != 200)
            throw ServiceError("embedding service error " + std::to_string(res->status));
        json parsed = json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("vectors") || !parsed["vectors"].is_array())
            throw ServiceError("malformed embedding response");
        for (const auto& vec : parsed["vectors"]) {
            EmbeddingVector v;
            v.reserve(vec.size());
            for (const auto& x : vec) v.push_back(x.get<float>());
            out.push_back(std::move(v));
        }
    }
    if (out.size() != texts.size())
        throw ServiceError("embedding service returned wrong vector count");
    return out;
}

namespace {

double l2_norm(const EmbeddingVector& v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

}  // namespace

void VectorIndex::add(const std::string& item_id, const EmbeddingVector& vector) {
    if (dim_ == 0) dim_ = vector.size();
    if (vector.size() != dim_)
        throw InputError("index_add: vector dim " + std::to_string(vector.size()) +
                         " != index dim " + std::to_string(dim_));
    if (std::find(ids_.begin(), ids_.end(), item_id) != ids_.end())
        throw InputError("index_add: duplicate item id '" + item_id + "'");
    ids_.push_back(item_id);
    data_.insert(data_.end(), vector.begin(), vector.end());
    norms_.push_back(l2_norm(vector));
}

std::vector<SearchHit> VectorIndex::search(const EmbeddingVector& query, std::size_t k) const {
    if (k == 0) throw InputError("index_search: k must be >= 1");
    if (query.size() != dim_)
        throw InputError("index_search: query dim " + std::to_string(query.size()) +
                         " != index dim " + std::to_string(dim_));
    double qnorm = l2_norm(query);

    std::vector<SearchHit> hits;
    hits.reserve(ids_.size());
    for (std::size_t row = 0; row < ids_.size(); ++row) {
        double dot = 0.0;
        const float* base = data_.data() + row * dim_;
        for (std::size_t j = 0; j < dim_; ++j)
            dot += static_cast<double>(base[j]) * static_cast<double>(query[j]);
        double denom = norms_[row] * qnorm;
        double score = denom > 0.0 ? dot / denom : 0.0;
        hits.push_back({ids_[row], score});
    }
    auto better = [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item_id < b.item_id;
    };
    std::size_t take = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(take), hits.end(),
                      better);
    hits.resize(take);
    return hits;
}

namespace {

void append_le_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t read_le_u32(const std::string& s, std::size_t pos) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos])) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos + 1])) << 8) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos + 2])) << 16) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos + 3])) << 24);
}

constexpr char kMagic[8] = {'F', 'R', 'A', 'S', 'E', 'I', 'D', 'X'};

}  // namespace

void VectorIndex::save(const std::filesystem::path& path) const {
    json header = {{"dim", dim_}, {"provider", provider_id_}, {"count", ids_.size()},
                   {"ids", ids_}};
    std::string header_text = header.dump();

    std::string blob;
    blob.append(kMagic, sizeof(kMagic));
    append_le_u32(blob, static_cast<std::uint32_t>(header_text.size()));
    blob += header_text;
    // float32 rows, little-endian
    for (float x : data_) {
        std::uint32_t bits;
        std::memcpy(&bits, &x, 4);
        append_le_u32(blob, bits);
    }
    write_file_atomic(path, blob);
}

VectorIndex VectorIndex::load(const std::filesystem::path& path) {
    std::string blob = read_file(path);
    if (blob.size() < sizeof(kMagic) + 4 || std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0)
        throw InputError("not an index file: " + path.string());
    std::uint32_t header_len = read_le_u32(blob, sizeof(kMagic));
    std::size_t header_off = sizeof(kMagic) + 4;
    if (blob.size() < header_off + header_len)
        throw InputError("truncated index header: " + path.string());
    json header = json::parse(blob.substr(header_off, header_len), nullptr, false);
    if (header.is_discarded()) throw InputError("malformed index header: " + path.string());

    VectorIndex index(header.at("dim").get<std::size_t>());
    index.provider_id_ = header.value("provider", "");
    std::vector<std::string> ids = header.at("ids").get<std::vector<std::string>>();
    std::size_t count = header.at("count").get<std::size_t>();
    if (ids.size() != count) throw InputError("index id manifest count mismatch");

    std::size_t data_off = header_off + header_len;
    std::size_t expected = count * index.dim_ * 4;
    if (blob.size() - data_off != expected)
        throw InputError("index payload size mismatch: " + path.string());

    index.ids_ = std::move(ids);
    index.data_.resize(count * index.dim_);
    for (std::size_t i = 0; i < index.data_.size(); ++i) {
        std::uint32_t bits = read_le_u32(blob, data_off + i * 4);
        float x;
        std::memcpy(&x, &bits, 4);
        index.data_[i] = x;
    }
    index.norms_.resize(count);
    for (std::size_t row = 0; row < count; ++row) {
        double s = 0.0;
        const float* base = index.data_.data() + row * index.dim_;
        for (std::size_t j = 0; j < index.dim_; ++j)
            s += static_cast<double>(base[j]) * base[j];
        index.norms_[row] = std::sqrt(s);
    }
    return index;
}

VectorIndex build_frame_index(const framenet::FrameInventory& inventory,
                              EmbeddingProvider& provider,
                              const std::filesystem::path& checkpoint) {
    if (inventory.size() == 0) throw InputError("cannot index an empty frame inventory");
    VectorIndex index(provider.dim());
    index.set_provider_id(provider.id());

    std::set<std::string> done;
    if (!checkpoint.empty() && std::filesystem::exists(checkpoint)) {
        VectorIndex partial = VectorIndex::load(checkpoint);
        if (partial.dim() == provider.dim() && partial.provider_id() == provider.id()) {
            index = std::move(partial);
            done.insert(index.ids().begin(), index.ids().end());
        }
    }

    for (const std::string& id : inventory.ids()) {
        if (done.count(id)) continue;
        const framenet::Frame* frame = inventory.find(id);
        try {
            index.add(id, embed_text(provider, framenet::render_frame_text(*frame)));
        } catch (const ServiceError&) {
            if (!checkpoint.empty() && index.size() > 0) index.save(checkpoint);
            throw;
        }
    }
    if (!checkpoint.empty()) {
        std::error_code ec;
        std::filesystem::remove(checkpoint, ec);
    }
    return index;
}

}  // namespace frase::embed
