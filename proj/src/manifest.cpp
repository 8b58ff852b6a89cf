#include "lem/manifest.hpp"

#include <array>
#include <fstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "lem/io.hpp"

namespace lem {

namespace {

using json = nlohmann::json;

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      throw Error("sha256 init failed");
    }
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const char* data, std::size_t n) { EVP_DigestUpdate(ctx_, data, n); }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, digest.data(), &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(kHex[digest[i] >> 4]);
      out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

std::vector<std::string> output_paths(const StageRecord& s) {
  std::vector<std::string> out;
  for (const auto& f : s.outputs) out.push_back(f.path);
  return out;
}

json files_to_json(const std::vector<StageFile>& files) {
  json arr = json::array();
  for (const auto& f : files) arr.push_back({{"path", f.path}, {"sha256", f.sha256}});
  return arr;
}

std::vector<StageFile> files_from_json(const json& arr) {
  std::vector<StageFile> out;
  for (const auto& f : arr) out.push_back({f.at("path"), f.at("sha256")});
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string() + " for hashing");
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

PipelineManifest PipelineManifest::load(const std::filesystem::path& path) {
  PipelineManifest m;
  if (!std::filesystem::exists(path)) return m;
  std::ifstream in(path);
  json doc;
  try {
    doc = json::parse(in);
    for (const auto& s : doc.at("stages")) {
      StageRecord r;
      r.name = s.at("name");
      r.config = s.at("config").get<std::map<std::string, std::string>>();
      r.inputs = files_from_json(s.at("inputs"));
      r.outputs = files_from_json(s.at("outputs"));
      m.stages_.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return m;
}

void PipelineManifest::save(const std::filesystem::path& path) const {
  json stages = json::array();
  for (const auto& s : stages_) {
    stages.push_back({{"name", s.name},
                      {"config", s.config},
                      {"inputs", files_to_json(s.inputs)},
                      {"outputs", files_to_json(s.outputs)}});
  }
  const json doc = {{"tool_version", std::string(kToolVersion)}, {"stages", std::move(stages)}};
  io::write_file_atomic(path, doc.dump(2) + "\n");
}

void PipelineManifest::verify_inputs(const std::vector<std::string>& inputs) const {
  for (const auto& in : inputs) {
    for (const auto& s : stages_) {
      for (const auto& out : s.outputs) {
        if (out.path != in) continue;
        const auto actual = sha256_file(in);
        if (actual != out.sha256) {
          throw HashMismatchError("input " + in + " differs from the output recorded by stage '" +
                                  s.name + "'");
        }
      }
    }
  }
}

bool PipelineManifest::up_to_date(const std::string& name,
                                  const std::map<std::string, std::string>& config,
                                  const std::vector<std::string>& inputs,
                                  const std::vector<std::string>& outputs) const {
  for (const auto& s : stages_) {
    if (s.name != name || output_paths(s) != outputs) continue;
    if (s.config != config || s.inputs.size() != inputs.size()) return false;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (s.inputs[i].path != inputs[i] || !std::filesystem::exists(inputs[i]) ||
          sha256_file(inputs[i]) != s.inputs[i].sha256) {
        return false;
      }
    }
    for (const auto& out : s.outputs) {
      if (!std::filesystem::exists(out.path) || sha256_file(out.path) != out.sha256) return false;
    }
    return true;
  }
  return false;
}

void PipelineManifest::record(StageRecord stage) {
  for (auto& s : stages_) {
    if (s.name == stage.name && output_paths(s) == output_paths(stage)) {
      s = std::move(stage);
      return;
    }
  }
  stages_.push_back(std::move(stage));
}

StageRecord make_stage_record(const std::string& name,
                              std::map<std::string, std::string> config,
                              const std::vector<std::string>& inputs,
                              const std::vector<std::string>& outputs) {
  StageRecord r{name, std::move(config), {}, {}};
  for (const auto& p : inputs) r.inputs.push_back({p, sha256_file(p)});
  for (const auto& p : outputs) r.outputs.push_back({p, sha256_file(p)});
  return r;
}

}  // namespace lem
