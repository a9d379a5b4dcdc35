#include <doctest.h>

#include <random>

#include "frase/common.hpp"
#include "frase/embedindex.hpp"
#include "frase/framenet.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace frase;
using namespace frase::embed;
using frase::testsupport::TempDir;
namespace fs = std::filesystem;

namespace {

std::vector<float> random_vector(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<float> dist(0.0f, 1.0f);
    std::vector<float> v(dim);
    for (auto& x : v) x = dist(rng);
    return v;
}

}  // namespace

TEST_SUITE("embedindex") {

TEST_CASE("hash-fold provider is deterministic") {
    HashFoldProvider provider(64);
    auto a = embed_text(provider, "the quick brown fox");
    auto b = embed_text(provider, "the quick brown fox");
    CHECK(a == b);
    CHECK(a.size() == 64);
}

TEST_CASE("different texts have cosine below one") {
    HashFoldProvider provider(64);
    auto a = embed_text(provider, "first text about dynasties");
    auto b = embed_text(provider, "completely unrelated words here");
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += double(a[i]) * b[i];
    CHECK(dot < 1.0 - 1e-6);  // both are unit vectors
}

TEST_CASE("empty text is a precondition error") {
    HashFoldProvider provider(64);
    CHECK_THROWS_AS(embed_text(provider, "   "), InputError);
}

TEST_CASE("index add and duplicate rejection") {
    VectorIndex index(4);
    index.add("a", {1, 0, 0, 0});
    CHECK(index.size() == 1);
    CHECK_THROWS_AS(index.add("a", {0, 1, 0, 0}), InputError);
    CHECK_THROWS_AS(index.add("b", {0, 1, 0}), InputError);
    for (int i = 0; i < 16; ++i)
        index.add("item" + std::to_string(i), {float(i), 1, 0, 0});
    CHECK(index.size() == 17);
}

TEST_CASE("search basics: identical and orthogonal vectors") {
    VectorIndex index(3);
    index.add("v", {0.5f, 0.5f, 0.0f});
    auto hits = index.search({0.5f, 0.5f, 0.0f}, 1);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].item_id == "v");
    CHECK(hits[0].score == doctest::Approx(1.0).epsilon(1e-9));

    auto ortho = index.search({0.0f, 0.0f, 2.0f}, 1);
    CHECK(ortho[0].score == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("k=0 rejected, k clamps to index size") {
    VectorIndex index(2);
    index.add("a", {1, 0});
    CHECK_THROWS_AS(index.search({1, 0}, 0), InputError);
    CHECK(index.search({1, 0}, 10).size() == 1);
}

TEST_CASE("exactness against brute-force oracle") {
    std::mt19937_64 rng(20260810);
    const std::size_t dim = 32, n = 500;
    VectorIndex index(dim);
    std::vector<std::pair<std::string, std::vector<float>>> items;
    for (std::size_t i = 0; i < n; ++i) {
        auto v = random_vector(rng, dim);
        std::string id = "item" + std::to_string(i);
        index.add(id, v);
        items.emplace_back(id, v);
    }
    for (int q = 0; q < 20; ++q) {
        auto query = random_vector(rng, dim);
        for (std::size_t k : {1, 3, 7}) {
            auto got = index.search(query, k);
            auto expected = oracle::brute_force_topk(items, query, k);
            REQUIRE(got.size() == expected.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].item_id == expected[i].id);
                CHECK(got[i].score == doctest::Approx(expected[i].score).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("scale invariance of queries") {
    std::mt19937_64 rng(99);
    VectorIndex index(16);
    for (int i = 0; i < 50; ++i) index.add("i" + std::to_string(i), random_vector(rng, 16));
    auto query = random_vector(rng, 16);
    auto base = index.search(query, 5);
    // powers of two scale float components exactly
    for (double c : {0.25, 2.0, 1024.0}) {
        std::vector<float> scaled(query);
        for (auto& x : scaled) x = static_cast<float>(x * c);
        auto hits = index.search(scaled, 5);
        REQUIRE(hits.size() == base.size());
        for (std::size_t i = 0; i < hits.size(); ++i) {
            CHECK(hits[i].item_id == base[i].item_id);
            CHECK(hits[i].score == doctest::Approx(base[i].score).epsilon(1e-9));
        }
    }
}

TEST_CASE("k monotonicity: smaller k is a prefix") {
    std::mt19937_64 rng(123);
    VectorIndex index(8);
    for (int i = 0; i < 64; ++i) index.add("i" + std::to_string(i), random_vector(rng, 8));
    auto query = random_vector(rng, 8);
    auto one = index.search(query, 1);
    auto three = index.search(query, 3);
    REQUIRE(three.size() == 3);
    CHECK(one[0].item_id == three[0].item_id);
}

TEST_CASE("ties break by ascending item id") {
    VectorIndex index(2);
    index.add("zz", {1, 0});
    index.add("aa", {2, 0});  // same direction, same cosine
    auto hits = index.search({5, 0}, 2);
    CHECK(hits[0].item_id == "aa");
    CHECK(hits[1].item_id == "zz");
}

TEST_CASE("persistence round-trip is byte identical") {
    TempDir dir("idx");
    HashFoldProvider provider(32);
    VectorIndex index(32);
    index.set_provider_id(provider.id());
    for (int i = 0; i < 10; ++i)
        index.add("f" + std::to_string(i),
                  embed_text(provider, "frame text " + std::to_string(i)));
    index.save(dir.file("a.idx"));
    index.save(dir.file("b.idx"));
    CHECK(read_file(dir.file("a.idx")) == read_file(dir.file("b.idx")));

    VectorIndex loaded = VectorIndex::load(dir.file("a.idx"));
    CHECK(loaded.size() == index.size());
    CHECK(loaded.dim() == 32);
    CHECK(loaded.provider_id() == provider.id());
    loaded.save(dir.file("c.idx"));
    CHECK(read_file(dir.file("a.idx")) == read_file(dir.file("c.idx")));

    auto q = embed_text(provider, "frame text 3");
    auto hits = loaded.search(q, 1);
    CHECK(hits[0].item_id == "f3");
    CHECK(hits[0].score == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("dimension mismatch rejected on search and load stays distinct") {
    TempDir dir("idx");
    HashFoldProvider p32(32), p16(16);
    VectorIndex a(32), b(16);
    a.set_provider_id(p32.id());
    b.set_provider_id(p16.id());
    a.add("x", embed_text(p32, "some text"));
    b.add("x", embed_text(p16, "some text"));
    a.save(dir.file("a.idx"));
    b.save(dir.file("b.idx"));
    VectorIndex la = VectorIndex::load(dir.file("a.idx"));
    VectorIndex lb = VectorIndex::load(dir.file("b.idx"));
    CHECK(la.dim() == 32);
    CHECK(lb.dim() == 16);
    CHECK_THROWS_AS(la.search(embed_text(p16, "query"), 1), InputError);
}

TEST_CASE("build_frame_index covers the inventory") {
    framenet::FrameInventory inv;
    for (int i = 0; i < 20; ++i) {
        framenet::Frame f;
        f.id = "F" + std::to_string(i);
        f.label = "Frame" + std::to_string(i);
        f.definition = "Definition number " + std::to_string(i) + ".";
        inv.frames.emplace(f.id, f);
    }
    HashFoldProvider provider(64);
    VectorIndex index = build_frame_index(inv, provider);
    CHECK(index.size() == 20);
    CHECK(index.provider_id() == provider.id());

    framenet::FrameInventory empty;
    CHECK_THROWS_AS(build_frame_index(empty, provider), InputError);
}

TEST_CASE("provider failure checkpoints partial progress and resumes") {
    // fails on one specific frame text until told otherwise
    class FlakyProvider : public EmbeddingProvider {
    public:
        bool healed = false;
        std::size_t dim() const override { return 16; }
        std::string id() const override { return "hash-fold-16"; }
        std::vector<EmbeddingVector> embed_batch(
            const std::vector<std::string>& texts) override {
            std::vector<EmbeddingVector> out;
            for (const auto& t : texts) {
                if (!healed && t.find("F3") != std::string::npos)
                    throw ServiceError("provider hiccup");
                out.push_back(HashFoldProvider::fold(t, 16));
            }
            return out;
        }
    };

    TempDir dir("ckpt");
    framenet::FrameInventory inv;
    for (int i = 0; i < 6; ++i) {
        framenet::Frame f;
        f.id = "F" + std::to_string(i);
        f.label = "Frame F" + std::to_string(i);
        inv.frames.emplace(f.id, f);
    }
    FlakyProvider flaky;
    fs::path checkpoint = dir.file("frames.idx.partial");
    CHECK_THROWS_AS(build_frame_index(inv, flaky, checkpoint), ServiceError);
    REQUIRE(fs::exists(checkpoint));
    CHECK(VectorIndex::load(checkpoint).size() == 3);  // F0..F2 embedded before the failure

    flaky.healed = true;
    VectorIndex resumed = build_frame_index(inv, flaky, checkpoint);
    CHECK(resumed.size() == 6);
    CHECK_FALSE(fs::exists(checkpoint));  // consumed on success

    // resumed build equals a clean one byte for byte
    HashFoldProvider clean(16);
    TempDir dir2("ckpt2");
    resumed.save(dir2.file("resumed.idx"));
    build_frame_index(inv, clean).save(dir2.file("clean.idx"));
    CHECK(read_file(dir2.file("resumed.idx")) == read_file(dir2.file("clean.idx")));
}

TEST_CASE("rebuild with same provider is byte identical on disk") {
    TempDir dir("idx");
    framenet::FrameInventory inv;
    for (int i = 0; i < 5; ++i) {
        framenet::Frame f;
        f.id = "F" + std::to_string(i);
        f.label = "Frame" + std::to_string(i);
        inv.frames.emplace(f.id, f);
    }
    HashFoldProvider provider(16);
    build_frame_index(inv, provider).save(dir.file("one.idx"));
    build_frame_index(inv, provider).save(dir.file("two.idx"));
    CHECK(read_file(dir.file("one.idx")) == read_file(dir.file("two.idx")));
}

}  // TEST_SUITE
