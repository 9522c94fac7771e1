#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nephra::manifest {

inline constexpr const char* kToolVersion = "nephra 1.0.0";

// Run provenance: every output file is listed with a content digest so audit
// runs are reproducible and citable.
struct RunManifest {
    std::string subcommand;
    std::optional<uint64_t> seed;
    std::string config_digest;  // digest of the flag/config string, hex64
    std::vector<std::string> inputs;   // paths; digested on write
    std::vector<std::string> outputs;  // paths; digested on write
};

// Serializes to pretty JSON with input/output digests resolved from the
// filesystem. Output files must exist before the manifest is written.
std::string render_manifest(const RunManifest& m);
void write_manifest(const RunManifest& m, const std::string& path);

}  // namespace nephra::manifest
