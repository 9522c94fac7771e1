#include "nephra/manifest.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "nephra/digest.hpp"

namespace nephra::manifest {

using nlohmann::json;

std::string render_manifest(const RunManifest& m) {
    json j;
    j["tool"] = kToolVersion;
    j["subcommand"] = m.subcommand;
    if (m.seed) j["seed"] = *m.seed;
    if (!m.config_digest.empty()) j["config_digest"] = m.config_digest;
    json inputs = json::object();
    for (const auto& p : m.inputs) inputs[p] = hex64(digest_file(p));
    j["inputs"] = std::move(inputs);
    json outputs = json::object();
    for (const auto& p : m.outputs) outputs[p] = hex64(digest_file(p));
    j["outputs"] = std::move(outputs);
    return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << render_manifest(m);
}

}  // namespace nephra::manifest
