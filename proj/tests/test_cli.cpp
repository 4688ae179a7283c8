#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Sandbox {
  fs::path dir = fs::temp_directory_path() / ("creweight_cli_test_" + std::to_string(::getpid()));
  Sandbox() { fs::create_directories(dir); }
  ~Sandbox() { fs::remove_all(dir); }
  std::string operator()(const std::string& f) const { return "'" + (dir / f).string() + "'"; }
};

int run(const std::string& args, const std::string& stderr_to = "/dev/null") {
  const std::string cmd = std::string("env -u CREWEIGHT_KEY '") + CREWEIGHT_CLI_PATH + "' " + args +
                          " >/dev/null 2>" + stderr_to;
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cluster: success, determinism, constraint errors") {
  Sandbox sb;
  REQUIRE(run("synth-codebook --N 200 --d 4 --n-blobs 8 --seed 2 --out " + sb("emb.crwb")) == 0);
  CHECK(run("cluster --embeddings " + sb("emb.crwb") + " --h 8 --seed 1 --out " + sb("a.crwb")) == 0);
  CHECK(run("cluster --embeddings " + sb("emb.crwb") + " --h 8 --seed 1 --out " + sb("b.crwb")) == 0);
  CHECK(slurp(sb.dir / "a.crwb") == slurp(sb.dir / "b.crwb"));
  CHECK(fs::exists(sb.dir / "a.crwb.manifest.json"));

  const auto err = (sb.dir / "err.txt").string();
  CHECK(run("cluster --embeddings " + sb("emb.crwb") + " --h 500 --seed 1 --out " + sb("c.crwb"), err) == 3);
  const auto j = nlohmann::json::parse(slurp(err));
  CHECK(j.at("message").get<std::string>().find("h") != std::string::npos);
  CHECK(run("cluster --embeddings " + sb("missing.crwb") + " --h 8 --out " + sb("c.crwb")) == 2);
}

TEST_CASE("generate / detect error codes and report-only decisions") {
  Sandbox sb;
  REQUIRE(run("synth-codebook --N 128 --d 4 --n-blobs 4 --seed 2 --out " + sb("emb.crwb")) == 0);
  REQUIRE(run("cluster --embeddings " + sb("emb.crwb") + " --h 4 --out " + sb("book.crwb")) == 0);
  CHECK(run("generate --clustering " + sb("book.crwb") + " --length 64 --out " + sb("x.txt")) == 4);
  REQUIRE(run("keygen --out " + sb("key.hex")) == 0);
  CHECK(run("keygen --out " + sb("key.hex")) == 3);
  CHECK(run("generate --clustering " + sb("book.crwb") + " --key-file " + sb("key.hex") + " --h 8 --out " +
            sb("x.txt")) == 3);
  REQUIRE(run("generate --plain --clustering " + sb("book.crwb") + " --length 64 --seed 1 --out " + sb("plain.txt")) ==
          0);
  CHECK(run("detect --clustering " + sb("book.crwb") + " --key-file " + sb("key.hex") + " --in " + sb("plain.txt") +
            " --out " + sb("r.json")) == 0);
  const auto r = nlohmann::json::parse(slurp(sb.dir / "r.json"));
  CHECK(r.contains("decision"));
  CHECK(r.at("manifest").at("command") == "detect");
  CHECK(run("detect --clustering " + sb("book.crwb") + " --key-file " + sb("key.hex") + " --in " + sb("plain.txt") +
            " --fpr 1.5") == 3);
  CHECK(run("frobnicate") == 3);
}

TEST_CASE("key from environment") {
  Sandbox sb;
  REQUIRE(run("synth-codebook --N 64 --d 2 --n-blobs 4 --out " + sb("emb.crwb")) == 0);
  REQUIRE(run("cluster --embeddings " + sb("emb.crwb") + " --h 4 --out " + sb("book.crwb")) == 0);
  const std::string key(64, 'a');
  const std::string cmd = "CREWEIGHT_KEY=" + key + " '" + CREWEIGHT_CLI_PATH + "' generate --clustering " +
                          sb("book.crwb") + " --length 16 --out " + sb("s.txt") + " >/dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(slurp(sb.dir / "s.txt.manifest.json").find(key) == std::string::npos);
}
