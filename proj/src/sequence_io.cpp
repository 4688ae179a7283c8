#include "creweight/sequence_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "binary_io.hpp"

namespace creweight {

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'R', 'W', 'S', 'E', 'Q', '\0', '\0'};

TokenId parse_id(std::string_view s, std::size_t line_no) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  TokenId v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("line " + std::to_string(line_no) + ": '" + std::string(s) + "' is not a token id");
  return v;
}

}  // namespace

void write_sequence_text(std::ostream& out, const TokenSequence& seq) {
  if (!seq.prompt.empty()) {
    out << "#prompt";
    for (auto t : seq.prompt) out << ' ' << t;
    out << '\n';
  }
  for (auto t : seq.tokens) out << t << '\n';
}

TokenSequence read_sequence_text(std::istream& in) {
  TokenSequence seq;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (line.rfind("#prompt", 0) == 0) {
      if (line_no != 1) throw ParseError("line " + std::to_string(line_no) + ": '#prompt' must be the first line");
      std::istringstream ss(line.substr(7));
      std::string tok;
      while (ss >> tok) seq.prompt.push_back(parse_id(tok, line_no));
      continue;
    }
    seq.tokens.push_back(parse_id(line, line_no));
  }
  return seq;
}

void write_sequence_binary(std::ostream& out, const TokenSequence& seq) {
  out.write(kMagic.data(), kMagic.size());
  detail::write_le<std::uint32_t>(out, kSequenceVersion);
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(seq.prompt.size()));
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(seq.tokens.size()));
  for (auto t : seq.prompt) detail::write_le<std::uint32_t>(out, t);
  for (auto t : seq.tokens) detail::write_le<std::uint32_t>(out, t);
}

TokenSequence read_sequence_binary(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw ParseError("field 'magic': not a sequence file");
  const auto version = detail::read_le<std::uint32_t>(in, "version");
  if (version != kSequenceVersion) throw ParseError("field 'version': unsupported value " + std::to_string(version));
  TokenSequence seq;
  seq.prompt.resize(detail::read_le<std::uint32_t>(in, "prompt_len"));
  seq.tokens.resize(detail::read_le<std::uint32_t>(in, "token_len"));
  for (auto& t : seq.prompt) t = detail::read_le<std::uint32_t>(in, "prompt");
  for (auto& t : seq.tokens) t = detail::read_le<std::uint32_t>(in, "tokens");
  return seq;
}

void save_sequence(const std::filesystem::path& path, const TokenSequence& seq) {
  const bool binary = path.extension() == ".bin";
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  if (binary)
    write_sequence_binary(out, seq);
  else
    write_sequence_text(out, seq);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

TokenSequence load_sequence(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::array<char, 8> head{};
  in.read(head.data(), head.size());
  const bool binary = in.gcount() == 8 && head == kMagic;
  in.clear();
  in.seekg(0);
  return binary ? read_sequence_binary(in) : read_sequence_text(in);
}

void check_token_range(const TokenSequence& seq, std::size_t vocab_size) {
  for (auto t : seq.prompt)
    if (t >= vocab_size) throw InvalidInput("prompt token " + std::to_string(t) + " outside the vocabulary");
  for (auto t : seq.tokens)
    if (t >= vocab_size) throw InvalidInput("token " + std::to_string(t) + " outside the vocabulary");
}

}  // namespace creweight
