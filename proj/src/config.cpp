#include "creweight/config.hpp"

#include <fstream>
#include <iterator>
#include <set>

#include "json.hpp"

namespace creweight {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& section, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("'" + section + "' must be an object");
  for (const auto& [k, v] : obj.items())
    if (!allowed.contains(k)) throw ConfigError("unknown key '" + section + "." + k + "'");
}

template <class T>
void read(const json& obj, const std::string& section, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + section + "." + key + "' has the wrong type");
  }
}

ChannelSpec parse_channel(const json& j, const std::string& section) {
  reject_unknown(j, section, {"kind", "p_flip", "beta", "rate"});
  ChannelSpec c;
  std::string kind = "identity";
  read(j, section, "kind", kind);
  if (kind == "identity")
    c.kind = ChannelKind::kIdentity;
  else if (kind == "retokenize")
    c.kind = ChannelKind::kRetokenize;
  else if (kind == "substitute")
    c.kind = ChannelKind::kSubstitute;
  else
    throw ConfigError("key '" + section + ".kind' must be identity, retokenize or substitute");
  read(j, section, "p_flip", c.p_flip);
  read(j, section, "beta", c.beta);
  read(j, section, "rate", c.rate);
  c.validate();
  return c;
}

}  // namespace

SimConfig parse_sim_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j, "<root>", {"version", "codebook", "model", "channel", "channels"});
  if (!j.contains("version")) throw ConfigError("key 'version' is required");
  int version = 0;
  read(j, "<root>", "version", version);
  if (version != kConfigVersion) throw ConfigError("key 'version': unsupported value " + std::to_string(version));

  SimConfig cfg;
  if (j.contains("codebook")) {
    const auto& s = j["codebook"];
    reject_unknown(s, "codebook", {"N", "d", "n_blobs", "separation", "blob_std", "seed"});
    CodebookSpec c;
    read(s, "codebook", "N", c.vocab_size);
    read(s, "codebook", "d", c.dim);
    read(s, "codebook", "n_blobs", c.n_blobs);
    read(s, "codebook", "separation", c.separation);
    read(s, "codebook", "blob_std", c.blob_std);
    read(s, "codebook", "seed", c.seed);
    if (c.vocab_size < 1 || c.dim < 1) throw ConfigError("codebook.N and codebook.d must be >= 1");
    if (c.n_blobs < 1 || c.n_blobs > c.vocab_size) throw ConfigError("codebook.n_blobs must lie in [1, N]");
    if (!(c.separation >= 0.0)) throw ConfigError("codebook.separation must be >= 0");
    if (!(c.blob_std >= 0.0)) throw ConfigError("codebook.blob_std must be >= 0");
    cfg.codebook = c;
  }
  if (j.contains("model")) {
    const auto& s = j["model"];
    reject_unknown(s, "model", {"order", "dirichlet_alpha", "temperature", "seed"});
    ModelSpec m;
    read(s, "model", "order", m.order);
    read(s, "model", "dirichlet_alpha", m.dirichlet_alpha);
    read(s, "model", "temperature", m.temperature);
    read(s, "model", "seed", m.seed);
    if (!(m.dirichlet_alpha > 0.0)) throw ConfigError("model.dirichlet_alpha must be > 0");
    if (!(m.temperature > 0.0)) throw ConfigError("model.temperature must be > 0");
    cfg.model = m;
  }
  if (j.contains("channel")) cfg.channel = parse_channel(j["channel"], "channel");
  if (j.contains("channels")) {
    if (!j["channels"].is_array()) throw ConfigError("'channels' must be an array");
    for (std::size_t i = 0; i < j["channels"].size(); ++i)
      cfg.sweep.push_back(parse_channel(j["channels"][i], "channels[" + std::to_string(i) + "]"));
  }
  return cfg;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  return parse_sim_config(std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
}

}  // namespace creweight
