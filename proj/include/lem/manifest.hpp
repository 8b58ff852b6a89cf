#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lem/error.hpp"

namespace lem {

inline constexpr std::string_view kToolVersion = "0.3.0";

class HashMismatchError : public Error {
 public:
  using Error::Error;
};

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

struct StageFile {
  std::string path;
  std::string sha256;

  bool operator==(const StageFile&) const = default;
};

struct StageRecord {
  std::string name;
  std::map<std::string, std::string> config;
  std::vector<StageFile> inputs;
  std::vector<StageFile> outputs;

  bool operator==(const StageRecord&) const = default;
};

// Record of every stage run against one working directory. Stages are keyed
// by (name, output paths); re-running a stage replaces its record.
class PipelineManifest {
 public:
  // Missing file yields an empty manifest.
  static PipelineManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  // Throws HashMismatchError when an input was written by an earlier stage
  // and its current content no longer matches the recorded hash.
  void verify_inputs(const std::vector<std::string>& inputs) const;

  // True when a record with the same key, config and input hashes exists and
  // every recorded output still has its recorded hash.
  bool up_to_date(const std::string& name, const std::map<std::string, std::string>& config,
                  const std::vector<std::string>& inputs,
                  const std::vector<std::string>& outputs) const;

  void record(StageRecord stage);

  const std::vector<StageRecord>& stages() const { return stages_; }

 private:
  std::vector<StageRecord> stages_;
};

StageRecord make_stage_record(const std::string& name,
                              std::map<std::string, std::string> config,
                              const std::vector<std::string>& inputs,
                              const std::vector<std::string>& outputs);

}  // namespace lem
