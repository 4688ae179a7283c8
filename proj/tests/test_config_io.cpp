#include <filesystem>
#include <fstream>
#include <sstream>

#include "creweight/config.hpp"
#include "creweight/sequence_io.hpp"
#include "doctest.h"

using namespace creweight;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_sim_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config: full document") {
  const auto cfg = parse_sim_config(R"({
    "version": 1,
    "codebook": {"N": 256, "d": 4, "n_blobs": 8, "separation": 12.5, "blob_std": 1.0, "seed": 3},
    "model": {"order": 2, "dirichlet_alpha": 0.3, "temperature": 0.8, "seed": 9},
    "channel": {"kind": "retokenize", "p_flip": 0.3, "beta": 100},
    "channels": [{"kind": "identity"}, {"kind": "substitute", "rate": 0.2}]
  })");
  REQUIRE(cfg.codebook);
  CHECK(cfg.codebook->vocab_size == 256);
  CHECK(cfg.codebook->separation == 12.5);
  REQUIRE(cfg.model);
  CHECK(cfg.model->order == 2);
  REQUIRE(cfg.channel);
  CHECK(cfg.channel->kind == ChannelKind::kRetokenize);
  CHECK(cfg.channel->beta == 100.0);
  REQUIRE(cfg.sweep.size() == 2);
  CHECK(cfg.sweep[1].rate == 0.2);
}

TEST_CASE("config: errors name the key") {
  CHECK(error_of(R"({"codebook": {}})").find("version") != std::string::npos);
  CHECK(error_of(R"({"version": 2})").find("version") != std::string::npos);
  CHECK(error_of(R"({"version": 1, "extra": 1})").find("extra") != std::string::npos);
  CHECK(error_of(R"({"version": 1, "model": {"temprature": 1}})").find("temprature") != std::string::npos);
  CHECK(error_of(R"({"version": 1, "codebook": {"N": "big"}})").find("N") != std::string::npos);
  CHECK(error_of(R"({"version": 1, "channel": {"kind": "gaussian"}})").find("kind") != std::string::npos);
  CHECK(error_of(R"({"version": 1, "channel": {"kind": "retokenize", "p_flip": 2}})").find("p_flip") !=
        std::string::npos);
  CHECK_FALSE(error_of("{not json").empty());
}

TEST_CASE("config: file loading") {
  CHECK_THROWS_AS(load_sim_config("/nonexistent/creweight.json"), IoError);
}

TEST_CASE("sequence text round trip") {
  const TokenSequence seq{{7, 8}, {1, 2, 3}};
  std::stringstream ss;
  write_sequence_text(ss, seq);
  CHECK(read_sequence_text(ss) == seq);
  std::stringstream bad("1\n2\nx\n");
  CHECK_THROWS_AS(read_sequence_text(bad), ParseError);
}

TEST_CASE("sequence binary round trip and sniffing") {
  const TokenSequence seq{{4}, {9, 9, 0, 65535}};
  const auto bin = fs::temp_directory_path() / "creweight_seq_test.bin";
  const auto txt = fs::temp_directory_path() / "creweight_seq_test.txt";
  save_sequence(bin, seq);
  save_sequence(txt, seq);
  CHECK(load_sequence(bin) == seq);
  CHECK(load_sequence(txt) == seq);
  fs::resize_file(bin, fs::file_size(bin) - 2);
  CHECK_THROWS_AS(load_sequence(bin), ParseError);
  fs::remove(bin);
  fs::remove(txt);
  CHECK_THROWS_AS(load_sequence("/nonexistent/seq.txt"), IoError);
}

TEST_CASE("token range check") {
  const TokenSequence seq{{}, {1, 5}};
  CHECK_NOTHROW(check_token_range(seq, 6));
  CHECK_THROWS_AS(check_token_range(seq, 5), InvalidInput);
}
