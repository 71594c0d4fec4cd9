#pragma once

#include "slitspec/slitmesh.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace slitspec {

/// Reproducibility record written next to every CSV output. Re-running the
/// stored command with the stored seed reproduces the eigenvalues within the
/// recorded solver tolerance.
struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    std::map<std::string, std::string> parameters;
    std::uint64_t seed = 0;
    double tol = 0.0;
    std::string input_hash;  // content hash of the canonical parameter string
    std::vector<std::string> outputs;
    double seconds = 0.0;

    struct MeshStats {
        std::string name;
        int dofs = 0;
        int elements = 0;
        int seam_pairs = 0;
        int tips = 0;
        int components = 0;
        double h_max = 0.0;
    };
    std::vector<MeshStats> meshes;

    void add_mesh(const std::string& name, const SlitMesh& mesh);
    /// Computes input_hash from command + parameters + seed.
    void seal();
    std::string to_json() const;
    static RunManifest from_json_file(const std::string& path);
};

/// SHA-1 hex digest (content hashing only).
std::string sha1_hex(const std::string& data);

/// Write-then-rename so readers never observe a partial file.
void atomic_write_file(const std::string& path, const std::string& contents);

} // namespace slitspec
