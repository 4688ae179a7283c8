#include <array>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "binary_io.hpp"
#include "creweight/codebook.hpp"

namespace creweight {

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'R', 'W', 'B', 'O', 'O', 'K', '\0'};
constexpr std::uint32_t kHasEmbeddings = 1;
constexpr std::uint32_t kHasAssignment = 2;

using detail::read_le;
using detail::write_le;

struct Container {
  std::uint32_t flags = 0;
  std::uint64_t n = 0;
  std::uint32_t d = 0;
  std::uint32_t h = 0;
  std::vector<float> embeddings;
  std::vector<std::uint32_t> assignment;
};

void write_container(const std::filesystem::path& path, const TokenEmbeddingTable* table, const Clustering* clustering) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  std::uint32_t flags = 0;
  std::uint64_t n = 0;
  if (table) {
    flags |= kHasEmbeddings;
    n = table->vocab_size();
  }
  if (clustering) {
    flags |= kHasAssignment;
    if (table && clustering->vocab_size() != n)
      throw InvalidArgument("clustering covers " + std::to_string(clustering->vocab_size()) +
                            " tokens but the table has " + std::to_string(n));
    n = clustering->vocab_size();
  }
  out.write(kMagic.data(), kMagic.size());
  write_le<std::uint32_t>(out, kCodebookVersion);
  write_le<std::uint32_t>(out, flags);
  write_le<std::uint64_t>(out, n);
  write_le<std::uint32_t>(out, table ? static_cast<std::uint32_t>(table->dim()) : 0);
  write_le<std::uint32_t>(out, clustering ? clustering->num_clusters() : 0);
  if (table)
    for (float v : table->values()) write_le<float>(out, v);
  if (clustering)
    for (auto c : clustering->assignment()) write_le<std::uint32_t>(out, c);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw ParseError("field 'magic': not a codebook container");
  const auto version = read_le<std::uint32_t>(in, "version");
  if (version != kCodebookVersion) throw ParseError("field 'version': unsupported value " + std::to_string(version));
  Container c;
  c.flags = read_le<std::uint32_t>(in, "flags");
  if (c.flags & ~(kHasEmbeddings | kHasAssignment)) throw ParseError("field 'flags': unknown bits set");
  c.n = read_le<std::uint64_t>(in, "N");
  c.d = read_le<std::uint32_t>(in, "d");
  c.h = read_le<std::uint32_t>(in, "h");
  if (c.n == 0 || c.n > (std::uint64_t{1} << 32)) throw ParseError("field 'N': out of range");
  if (c.flags & kHasEmbeddings) {
    if (c.d == 0) throw ParseError("field 'd': zero with embeddings present");
    c.embeddings.resize(c.n * c.d);
    for (auto& v : c.embeddings) v = read_le<float>(in, "embeddings");
  }
  if (c.flags & kHasAssignment) {
    if (c.h == 0) throw ParseError("field 'h': zero with assignment present");
    c.assignment.resize(c.n);
    for (auto& v : c.assignment) v = read_le<std::uint32_t>(in, "assignment");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("trailing bytes after last section");
  return c;
}

}  // namespace

void save_embeddings(const std::filesystem::path& path, const TokenEmbeddingTable& table) {
  write_container(path, &table, nullptr);
}

void save_clustering(const std::filesystem::path& path, const Clustering& clustering) {
  write_container(path, nullptr, &clustering);
}

void save_codebook(const std::filesystem::path& path, const TokenEmbeddingTable& table, const Clustering& clustering) {
  write_container(path, &table, &clustering);
}

TokenEmbeddingTable load_embeddings(const std::filesystem::path& path) {
  auto c = read_container(path);
  if (!(c.flags & kHasEmbeddings)) throw ParseError("field 'flags': container has no embedding section");
  try {
    return TokenEmbeddingTable(c.n, c.d, std::move(c.embeddings));
  } catch (const InvalidInput& e) {
    throw IntegrityError(e.what());
  }
}

Clustering load_clustering(const std::filesystem::path& path) {
  auto c = read_container(path);
  if (!(c.flags & kHasAssignment)) throw ParseError("field 'flags': container has no assignment section");
  return Clustering(c.h, std::move(c.assignment));
}

bool has_embeddings(const std::filesystem::path& path) { return read_container(path).flags & kHasEmbeddings; }

TokenEmbeddingTable load_embeddings_any(const std::filesystem::path& path) {
  if (path.extension() != ".csv") return load_embeddings(path);
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<float> values;
  std::size_t rows = 0, dim = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stof(cell));
      } catch (const std::exception&) {
        throw ParseError("row " + std::to_string(rows) + ": cannot parse '" + cell + "' as a float");
      }
      ++cols;
    }
    if (rows == 0) dim = cols;
    if (cols != dim) throw ParseError("row " + std::to_string(rows) + ": expected " + std::to_string(dim) + " columns");
    ++rows;
  }
  return TokenEmbeddingTable(rows, dim, std::move(values));
}

std::string clustering_to_json(const Clustering& clustering, const TokenEmbeddingTable* table) {
  nlohmann::json j;
  j["version"] = kCodebookVersion;
  j["N"] = clustering.vocab_size();
  j["h"] = clustering.num_clusters();
  j["d"] = table ? table->dim() : 0;
  j["sizes"] = clustering.cluster_sizes();
  j["assignment"] = clustering.assignment();
  if (table) {
    auto rows = nlohmann::json::array();
    for (std::size_t t = 0; t < table->vocab_size(); ++t) {
      const auto r = table->row(static_cast<TokenId>(t));
      rows.push_back(std::vector<float>(r.begin(), r.end()));
    }
    j["embeddings"] = std::move(rows);
  }
  return j.dump(2);
}

}  // namespace creweight
