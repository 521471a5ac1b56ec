#include "erase/corpus.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "erase/errors.hpp"

namespace erase {
namespace {

using nlohmann::json;

bool is_unicode_space(char32_t cp) {
  return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 || cp == 0xA0 ||
         cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 ||
         cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

// Decodes one code point starting at text[pos]; returns its byte length.
// Malformed sequences decode as a single non-space unit.
std::size_t decode_utf8(std::string_view text, std::size_t pos, char32_t& cp) {
  const auto b0 = static_cast<unsigned char>(text[pos]);
  std::size_t len = 1;
  if (b0 < 0x80) {
    cp = b0;
    return 1;
  }
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    cp = 0xFFFD;
    return 1;
  }
  if (pos + len > text.size()) {
    cp = 0xFFFD;
    return 1;
  }
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(text[pos + i]);
    if ((b & 0xC0) != 0x80) {
      cp = 0xFFFD;
      return 1;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  return len;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

template <typename Fn>
void for_each_line(const std::string& text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string_view line(text.data() + start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") != std::string_view::npos) fn(line, line_no);
    start = end + 1;
  }
}

std::uint64_t require_u64(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_unsigned()) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_no) + ": field '" + key + "' must be an unsigned integer");
  }
  return it->get<std::uint64_t>();
}

std::string require_string(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_no) + ": field '" + key + "' must be a string");
  }
  return it->get<std::string>();
}

json parse_line(std::string_view line, std::size_t line_no) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": not a JSON object");
  }
  return obj;
}

constexpr std::array<char, 4> kMagic = {'E', 'R', 'S', 'E'};
constexpr std::uint32_t kBinaryVersion = 1;

template <typename T>
void put_le(std::string& buf, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(std::string_view buf, std::size_t& pos) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
  }
  pos += sizeof(T);
  return static_cast<T>(v);
}

std::vector<EmbeddedExample> parse_binary_embeddings(std::string_view buf) {
  constexpr std::size_t kHeader = 4 + 4 + 8 + 4;
  if (buf.size() < kHeader) throw Error(ErrorCode::ParseError, "embedding file truncated header");
  std::size_t pos = 4;
  const auto version = get_le<std::uint32_t>(buf, pos);
  if (version != kBinaryVersion) {
    throw Error(ErrorCode::ParseError, "unsupported embedding file version " + std::to_string(version));
  }
  const auto count = get_le<std::uint64_t>(buf, pos);
  const auto dim = get_le<std::uint32_t>(buf, pos);
  if (dim == 0) throw Error(ErrorCode::ParseError, "embedding dim is 0");
  const std::uint64_t record = 8 + 4ULL * dim;
  if ((buf.size() - kHeader) / record != count || (buf.size() - kHeader) % record != 0) {
    throw Error(ErrorCode::ParseError, "embedding file size does not match header count/dim");
  }
  std::vector<EmbeddedExample> rows(count);
  for (auto& row : rows) {
    row.id = get_le<std::uint64_t>(buf, pos);
    row.vector.resize(dim);
    for (auto& x : row.vector) x = std::bit_cast<float>(get_le<std::uint32_t>(buf, pos));
  }
  return rows;
}

std::vector<EmbeddedExample> parse_jsonl_embeddings(const std::string& text) {
  std::vector<EmbeddedExample> rows;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    json obj = parse_line(line, line_no);
    EmbeddedExample row;
    row.id = require_u64(obj, "id", line_no);
    auto it = obj.find("vector");
    if (it == obj.end() || !it->is_array()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": 'vector' must be an array");
    }
    row.vector.reserve(it->size());
    for (const auto& v : *it) {
      if (!v.is_number()) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": non-numeric vector entry");
      }
      row.vector.push_back(static_cast<float>(v.get<double>()));
    }
    rows.push_back(std::move(row));
  });
  return rows;
}

}  // namespace

std::vector<std::string_view> whitespace_tokens(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  std::size_t token_start = std::string_view::npos;
  while (pos < text.size()) {
    char32_t cp = 0;
    const std::size_t len = decode_utf8(text, pos, cp);
    if (is_unicode_space(cp)) {
      if (token_start != std::string_view::npos) {
        tokens.push_back(text.substr(token_start, pos - token_start));
        token_start = std::string_view::npos;
      }
    } else if (token_start == std::string_view::npos) {
      token_start = pos;
    }
    pos += len;
  }
  if (token_start != std::string_view::npos) tokens.push_back(text.substr(token_start));
  return tokens;
}

std::uint64_t whitespace_token_count(std::string_view text) {
  return whitespace_tokens(text).size();
}

Corpus::Corpus(std::vector<Example> examples) : examples_(std::move(examples)) {
  std::sort(examples_.begin(), examples_.end(),
            [](const Example& a, const Example& b) { return a.id < b.id; });
  auto dup = std::adjacent_find(examples_.begin(), examples_.end(),
                                [](const Example& a, const Example& b) { return a.id == b.id; });
  if (dup != examples_.end()) throw Error(ErrorCode::DuplicateId, std::to_string(dup->id));
}

std::vector<ExampleId> Corpus::ids() const {
  std::vector<ExampleId> out;
  out.reserve(examples_.size());
  for (const auto& e : examples_) out.push_back(e.id);
  return out;
}

bool Corpus::contains(ExampleId id) const {
  auto it = std::lower_bound(examples_.begin(), examples_.end(), id,
                             [](const Example& e, ExampleId v) { return e.id < v; });
  return it != examples_.end() && it->id == id;
}

std::size_t Corpus::index_of(ExampleId id) const {
  auto it = std::lower_bound(examples_.begin(), examples_.end(), id,
                             [](const Example& e, ExampleId v) { return e.id < v; });
  if (it == examples_.end() || it->id != id) throw Error(ErrorCode::UnknownId, std::to_string(id));
  return static_cast<std::size_t>(it - examples_.begin());
}

std::span<const float> Corpus::embedding(ExampleId id) const {
  if (!has_embeddings()) throw Error(ErrorCode::MissingEmbedding, std::to_string(id));
  return embedding_at(index_of(id));
}

void Corpus::set_embeddings(std::vector<EmbeddedExample> rows) {
  if (rows.empty()) throw Error(ErrorCode::MissingEmbedding, "no embedding rows");
  const std::size_t dim = rows.front().vector.size();
  if (dim == 0) throw Error(ErrorCode::DimMismatch, "embedding dimension is 0");
  std::vector<float> matrix(examples_.size() * dim);
  std::vector<bool> seen(examples_.size(), false);
  for (const auto& row : rows) {
    if (!contains(row.id)) throw Error(ErrorCode::UnknownId, std::to_string(row.id));
    const std::size_t idx = index_of(row.id);
    if (seen[idx]) throw Error(ErrorCode::DuplicateId, std::to_string(row.id));
    if (row.vector.size() != dim) {
      throw Error(ErrorCode::DimMismatch, "id " + std::to_string(row.id) + " has dim " +
                                              std::to_string(row.vector.size()) + ", expected " +
                                              std::to_string(dim));
    }
    for (float x : row.vector) {
      if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteVector, std::to_string(row.id));
    }
    std::copy(row.vector.begin(), row.vector.end(), matrix.begin() + static_cast<std::ptrdiff_t>(idx * dim));
    seen[idx] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw Error(ErrorCode::MissingEmbedding, std::to_string(examples_[i].id));
  }
  matrix_ = std::move(matrix);
  dim_ = dim;
}

PointSet Corpus::points() const {
  if (!has_embeddings()) throw Error(ErrorCode::MissingEmbedding, "corpus has no embeddings");
  return PointSet{ids(), matrix_, dim_};
}

PointSet Corpus::points(std::span<const ExampleId> ids) const {
  if (!has_embeddings()) throw Error(ErrorCode::MissingEmbedding, "corpus has no embeddings");
  PointSet out;
  out.dim = dim_;
  out.ids.assign(ids.begin(), ids.end());
  std::sort(out.ids.begin(), out.ids.end());
  out.data.reserve(out.ids.size() * dim_);
  for (ExampleId id : out.ids) {
    auto row = embedding_at(index_of(id));
    out.data.insert(out.data.end(), row.begin(), row.end());
  }
  return out;
}

Corpus load_dataset(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<Example> examples;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    json obj = parse_line(line, line_no);
    Example ex;
    ex.id = require_u64(obj, "id", line_no);
    ex.input = require_string(obj, "input", line_no);
    ex.output = require_string(obj, "output", line_no);
    ex.input_tokens = obj.contains("input_tokens") ? require_u64(obj, "input_tokens", line_no)
                                                   : whitespace_token_count(ex.input);
    ex.output_tokens = obj.contains("output_tokens") ? require_u64(obj, "output_tokens", line_no)
                                                     : whitespace_token_count(ex.output);
    examples.push_back(std::move(ex));
  });
  if (examples.empty()) throw Error(ErrorCode::EmptyCorpus, path.string());
  return Corpus(std::move(examples));
}

void save_dataset(const Corpus& corpus, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& ex : corpus.examples()) {
    json obj = {{"id", ex.id},
                {"input", ex.input},
                {"output", ex.output},
                {"input_tokens", ex.input_tokens},
                {"output_tokens", ex.output_tokens}};
    out << obj.dump() << '\n';
  }
}

Corpus load_embeddings(const std::filesystem::path& path, Corpus corpus) {
  const std::string buf = read_file(path);
  const bool binary = buf.size() >= 4 && std::equal(kMagic.begin(), kMagic.end(), buf.begin());
  corpus.set_embeddings(binary ? parse_binary_embeddings(buf) : parse_jsonl_embeddings(buf));
  return corpus;
}

void save_embeddings_binary(const Corpus& corpus, const std::filesystem::path& path) {
  if (!corpus.has_embeddings()) throw Error(ErrorCode::MissingEmbedding, "corpus has no embeddings");
  std::string buf(kMagic.begin(), kMagic.end());
  put_le<std::uint32_t>(buf, kBinaryVersion);
  put_le<std::uint64_t>(buf, corpus.size());
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(corpus.dim()));
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    put_le<std::uint64_t>(buf, corpus.examples()[i].id);
    for (float x : corpus.embedding_at(i)) put_le<std::uint32_t>(buf, std::bit_cast<std::uint32_t>(x));
  }
  auto out = open_out(path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void save_embeddings_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  if (!corpus.has_embeddings()) throw Error(ErrorCode::MissingEmbedding, "corpus has no embeddings");
  auto out = open_out(path);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto row = corpus.embedding_at(i);
    json vec = json::array();
    for (float x : row) vec.push_back(static_cast<double>(x));
    out << json{{"id", corpus.examples()[i].id}, {"vector", vec}}.dump() << '\n';
  }
}

std::vector<float> test_embed_text(std::string_view text, std::size_t dim, Seed seed) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "dim must be >= 1");
  std::vector<double> acc(dim, 0.0);
  const std::uint64_t basis = splitmix64(seed);
  for (auto token : whitespace_tokens(text)) {
    const std::uint64_t h = splitmix64(fnv1a64(token, basis));
    acc[h % dim] += 1.0;
  }
  double norm2 = 0.0;
  for (double x : acc) norm2 += x * x;
  std::vector<float> out(dim, 0.0F);
  if (norm2 == 0.0) {
    out[0] = 1.0F;
    return out;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] * inv);
  return out;
}

Corpus test_embed(Corpus corpus, std::size_t dim, Seed seed) {
  std::vector<EmbeddedExample> rows;
  rows.reserve(corpus.size());
  for (const auto& ex : corpus.examples()) rows.push_back({ex.id, test_embed_text(ex.input, dim, seed)});
  corpus.set_embeddings(std::move(rows));
  return corpus;
}

}  // namespace erase
