#pragma once

// Run manifest: everything needed to byte-reproduce a CLI run — the command,
// its full parameter set, the seed (or the dice rolls it came from), the tool
// version, hashes of every input file, and the list of files written.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "bmda/errors.hpp"
#include "bmda/fileio.hpp"
#include "bmda/version.hpp"

namespace bmda {

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
    throw data_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

inline std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

struct RunManifest {
  std::string command;
  nlohmann::json parameters;  // full flag set, normalized
  std::uint64_t seed = 0;
  std::vector<int> dice;  // die rolls the seed was folded from, if any
  std::vector<std::pair<std::string, std::string>> input_hashes;  // path -> sha256
  std::vector<std::string> outputs;

  void add_input(const std::string& path) { input_hashes.emplace_back(path, sha256_file(path)); }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["tool_version"] = kVersion;
    j["command"] = command;
    j["parameters"] = parameters;
    j["seed"] = seed;
    j["dice"] = dice;
    nlohmann::json inputs(nlohmann::json::value_t::object);
    for (const auto& [path, hash] : input_hashes) inputs[path] = hash;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    return j;
  }
};

}  // namespace bmda
