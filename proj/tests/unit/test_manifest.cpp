#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "lem/manifest.hpp"

using namespace lem;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("lem_manifest_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write(const fs::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

}  // namespace

TEST_CASE("sha256 of known inputs") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("manifest records stages, detects no-ops and hash mismatches") {
  TempDir dir;
  const auto in = (dir.path / "in.txt").string();
  const auto out = (dir.path / "out.txt").string();
  const auto man = dir.path / "manifest.json";
  write(in, "hello\n");
  write(out, "HELLO\n");

  PipelineManifest m = PipelineManifest::load(man);
  CHECK(m.stages().empty());
  m.record(make_stage_record("upper", {{"--in", in}}, {in}, {out}));
  m.save(man);

  auto loaded = PipelineManifest::load(man);
  REQUIRE(loaded.stages().size() == 1);
  CHECK(loaded.stages()[0] == m.stages()[0]);
  CHECK(loaded.up_to_date("upper", {{"--in", in}}, {in}, {out}));
  CHECK_FALSE(loaded.up_to_date("upper", {{"--in", in}, {"--x", "1"}}, {in}, {out}));

  // A later stage consuming `out` notices that it was modified.
  CHECK_NOTHROW(loaded.verify_inputs({out}));
  write(out, "tampered\n");
  CHECK_THROWS_AS(loaded.verify_inputs({out}), HashMismatchError);
  CHECK_FALSE(loaded.up_to_date("upper", {{"--in", in}}, {in}, {out}));

  // Re-recording replaces rather than appends.
  loaded.record(make_stage_record("upper", {{"--in", in}}, {in}, {out}));
  CHECK(loaded.stages().size() == 1);
}
