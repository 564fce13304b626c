#ifndef BEACON_MANIFEST_HPP
#define BEACON_MANIFEST_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace beacon {

// Reproducibility record written next to every CLI run's outputs: the full
// effective configuration, the seed, content hashes of the inputs, and the
// produced files. Re-running with the same config and inputs must reproduce
// the outputs bit-identically.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_hashes;  // path -> git blob sha1
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;
};

// SHA-1 of "blob <len>\0<bytes>", like git hash-object.
std::string git_blob_sha1(const std::filesystem::path& path);
std::string sha1_hex(const void* data, std::size_t len);

void write_manifest(const RunManifest& manifest,
                    const std::filesystem::path& path);

}  // namespace beacon

#endif  // BEACON_MANIFEST_HPP
