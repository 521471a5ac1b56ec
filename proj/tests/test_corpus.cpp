#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "erase/corpus.hpp"
#include "erase/errors.hpp"
#include "test_util.hpp"

using namespace erase;
using testutil::TempDir;
using testutil::write_file;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Io;
}

// Independent ASCII-only whitespace count.
std::uint64_t ascii_tokens(const std::string& s) {
  std::uint64_t n = 0;
  bool in = false;
  for (unsigned char c : s) {
    const bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
    if (!ws && !in) ++n;
    in = !ws;
  }
  return n;
}

void put_u32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f32(std::string& b, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32(b, v);
}

std::string binary_embeddings(std::uint32_t dim, const std::vector<std::pair<std::uint64_t, std::vector<float>>>& rows) {
  std::string b = "ERSE";
  put_u32(b, 1);
  put_u64(b, rows.size());
  put_u32(b, dim);
  for (const auto& [id, v] : rows) {
    put_u64(b, id);
    for (float f : v) put_f32(b, f);
  }
  return b;
}

const char* kThree =
    "{\"id\":1,\"input\":\"a b c\",\"output\":\"d\"}\n"
    "{\"id\":2,\"input\":\"e\",\"output\":\"f g\"}\n"
    "{\"id\":3,\"input\":\"h i\",\"output\":\"j\"}\n";

}  // namespace

TEST_CASE("three well-formed lines give three examples") {
  TempDir dir("corpus");
  write_file(dir / "d.jsonl", kThree);
  const Corpus c = load_dataset(dir / "d.jsonl");
  CHECK(c.size() == 3);
  CHECK(c.ids() == std::vector<ExampleId>{1, 2, 3});
}

TEST_CASE("duplicate id is rejected and named") {
  TempDir dir("corpus");
  write_file(dir / "d.jsonl",
             "{\"id\":7,\"input\":\"a\",\"output\":\"b\"}\n{\"id\":7,\"input\":\"c\",\"output\":\"d\"}\n");
  try {
    load_dataset(dir / "d.jsonl");
    FAIL("expected DuplicateId");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateId);
    CHECK(std::string(e.what()).find('7') != std::string::npos);
  }
}

TEST_CASE("token counts come from the whitespace tokenizer") {
  TempDir dir("corpus");
  write_file(dir / "d.jsonl", kThree);
  const Corpus c = load_dataset(dir / "d.jsonl");
  for (const auto& ex : c.examples()) {
    CHECK(ex.input_tokens == ascii_tokens(ex.input));
    CHECK(ex.output_tokens == ascii_tokens(ex.output));
  }
  CHECK(c.example(1).input_tokens == 3);
  CHECK(c.example(1).output_tokens == 1);
}

TEST_CASE("explicit token counts are kept") {
  TempDir dir("corpus");
  write_file(dir / "d.jsonl", "{\"id\":1,\"input\":\"a b c\",\"output\":\"d\",\"input_tokens\":9,\"output_tokens\":4}\n");
  const Corpus c = load_dataset(dir / "d.jsonl");
  CHECK(c.example(1).input_tokens == 9);
  CHECK(c.example(1).output_tokens == 4);
}

TEST_CASE("unicode whitespace separates tokens") {
  CHECK(whitespace_token_count("a b　c") == 3);
  CHECK(whitespace_token_count("  lead  and   trail  ") == 3);
  CHECK(whitespace_token_count("") == 0);
  CHECK(whitespace_token_count("café naïve") == 2);
}

TEST_CASE("malformed line reports its line number") {
  TempDir dir("corpus");
  write_file(dir / "d.jsonl", "{\"id\":1,\"input\":\"a\",\"output\":\"b\"}\n{not json\n");
  try {
    load_dataset(dir / "d.jsonl");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("empty dataset and missing file") {
  TempDir dir("corpus");
  write_file(dir / "d.jsonl", "\n\n");
  CHECK(code_of([&] { load_dataset(dir / "d.jsonl"); }) == ErrorCode::EmptyCorpus);
  CHECK(code_of([&] { load_dataset(dir / "missing.jsonl"); }) == ErrorCode::Io);
}

TEST_CASE("dataset round trip") {
  TempDir dir("corpus");
  write_file(dir / "d.jsonl", kThree);
  const Corpus c = load_dataset(dir / "d.jsonl");
  save_dataset(c, dir / "e.jsonl");
  const Corpus back = load_dataset(dir / "e.jsonl");
  REQUIRE(back.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(back.examples()[i] == c.examples()[i]);
}

TEST_CASE("binary embeddings with dim 4") {
  TempDir dir("corpus");
  write_file(dir / "d.jsonl",
             "{\"id\":1,\"input\":\"a\",\"output\":\"b\"}\n{\"id\":2,\"input\":\"c\",\"output\":\"d\"}\n");
  write_file(dir / "e.bin", binary_embeddings(4, {{1, {1, 2, 3, 4}}, {2, {5, 6, 7, 8}}}));
  const Corpus c = load_embeddings(dir / "e.bin", load_dataset(dir / "d.jsonl"));
  CHECK(c.dim() == 4);
  CHECK(c.embedding(2)[3] == 8.0f);
}

TEST_CASE("embedding validation errors") {
  TempDir dir("corpus");
  write_file(dir / "d.jsonl",
             "{\"id\":1,\"input\":\"a\",\"output\":\"b\"}\n{\"id\":2,\"input\":\"c\",\"output\":\"d\"}\n");
  const Corpus base = load_dataset(dir / "d.jsonl");

  SUBCASE("unknown id") {
    write_file(dir / "e.bin", binary_embeddings(2, {{1, {1, 2}}, {3, {5, 6}}}));
    CHECK(code_of([&] { load_embeddings(dir / "e.bin", base); }) == ErrorCode::UnknownId);
  }
  SUBCASE("mixed dims") {
    write_file(dir / "e.jsonl", "{\"id\":1,\"vector\":[1,2,3,4]}\n{\"id\":2,\"vector\":[1,2,3,4,5]}\n");
    CHECK(code_of([&] { load_embeddings(dir / "e.jsonl", base); }) == ErrorCode::DimMismatch);
  }
  SUBCASE("missing embedding") {
    write_file(dir / "e.bin", binary_embeddings(2, {{1, {1, 2}}}));
    CHECK(code_of([&] { load_embeddings(dir / "e.bin", base); }) == ErrorCode::MissingEmbedding);
  }
  SUBCASE("non-finite component") {
    write_file(dir / "e.bin",
               binary_embeddings(2, {{1, {1, std::numeric_limits<float>::quiet_NaN()}}, {2, {5, 6}}}));
    CHECK(code_of([&] { load_embeddings(dir / "e.bin", base); }) == ErrorCode::NonFiniteVector);
  }
}

TEST_CASE("jsonl and binary embedding files agree") {
  TempDir dir("corpus");
  write_file(dir / "d.jsonl", kThree);
  const Corpus c = test_embed(load_dataset(dir / "d.jsonl"), 8, 5);
  save_embeddings_binary(c, dir / "e.bin");
  save_embeddings_jsonl(c, dir / "e.jsonl");
  const Corpus a = load_embeddings(dir / "e.bin", load_dataset(dir / "d.jsonl"));
  const Corpus b = load_embeddings(dir / "e.jsonl", load_dataset(dir / "d.jsonl"));
  for (ExampleId id : c.ids()) {
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(a.embedding(id)[i] == c.embedding(id)[i]);
      CHECK(b.embedding(id)[i] == c.embedding(id)[i]);
    }
  }
}

TEST_CASE("test embedder") {
  SUBCASE("deterministic") {
    CHECK(test_embed_text("the quick brown fox", 16, 1) == test_embed_text("the quick brown fox", 16, 1));
    CHECK(test_embed_text("the quick brown fox", 16, 1) != test_embed_text("the quick brown fox", 16, 2));
  }
  SUBCASE("repeated token is one unit coordinate") {
    for (std::size_t d : {1u, 4u, 16u, 64u}) {
      const auto v = test_embed_text("x x x", d, 3);
      int nonzero = 0;
      for (float f : v) {
        if (f != 0.0f) {
          ++nonzero;
          CHECK(f == 1.0f);
        }
      }
      CHECK(nonzero == 1);
    }
  }
  SUBCASE("empty text") {
    CHECK(test_embed_text("", 4, 0) == std::vector<float>{1, 0, 0, 0});
  }
  SUBCASE("unit norm") {
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
      std::string text;
      const auto words = 1 + rng.uniform_below(20);
      for (std::uint64_t w = 0; w < words; ++w) text += "w" + std::to_string(rng.uniform_below(50)) + " ";
      const auto v = test_embed_text(text, 1 + rng.uniform_below(32), 7);
      double n2 = 0.0;
      for (float f : v) n2 += static_cast<double>(f) * f;
      CHECK(std::sqrt(n2) == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("points restricted to ids are ascending") {
  const Corpus c = testutil::corpus_from_rows({{0}, {1}, {2}, {3}});
  const std::vector<ExampleId> ids = {4, 2};
  const PointSet p = c.points(ids);
  CHECK(p.ids == std::vector<ExampleId>{2, 4});
  CHECK(p.row(1)[0] == 3.0f);
  const std::vector<ExampleId> bad = {9};
  CHECK(code_of([&] { c.points(bad); }) == ErrorCode::UnknownId);
}
