#include "slitspec/manifest.hpp"
#include "slitspec/errors.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace slitspec {

// Compact SHA-1 (FIPS 180-1); used for content hashes only.
std::string sha1_hex(const std::string& data) {
    std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};
    std::string msg = data;
    const std::uint64_t bitlen = static_cast<std::uint64_t>(msg.size()) * 8;
    msg.push_back(static_cast<char>(0x80));
    while (msg.size() % 64 != 56) msg.push_back('\0');
    for (int i = 7; i >= 0; --i) msg.push_back(static_cast<char>((bitlen >> (8 * i)) & 0xff));

    auto rol = [](std::uint32_t x, int n) { return (x << n) | (x >> (32 - n)); };
    for (size_t chunk = 0; chunk < msg.size(); chunk += 64) {
        std::uint32_t w[80];
        for (int i = 0; i < 16; ++i) {
            w[i] = 0;
            for (int b = 0; b < 4; ++b)
                w[i] = (w[i] << 8) | static_cast<unsigned char>(msg[chunk + 4 * i + b]);
        }
        for (int i = 16; i < 80; ++i) w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
        for (int i = 0; i < 80; ++i) {
            std::uint32_t f, k;
            if (i < 20) {
                f = (b & c) | ((~b) & d);
                k = 0x5A827999u;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ED9EBA1u;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8F1BBCDCu;
            } else {
                f = b ^ c ^ d;
                k = 0xCA62C1D6u;
            }
            const std::uint32_t tmp = rol(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = rol(b, 30);
            b = a;
            a = tmp;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
    }
    char out[41];
    std::snprintf(out, sizeof(out), "%08x%08x%08x%08x%08x", h[0], h[1], h[2], h[3], h[4]);
    return std::string(out);
}

void atomic_write_file(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw InputError("cannot open " + tmp);
        f << contents;
    }
    std::filesystem::rename(tmp, path);
}

void RunManifest::add_mesh(const std::string& name, const SlitMesh& mesh) {
    MeshStats s;
    s.name = name;
    s.dofs = mesh.dof_count();
    s.elements = mesh.element_count();
    s.seam_pairs = static_cast<int>(mesh.seam_pairs.size());
    s.tips = static_cast<int>(mesh.tip_vertices.size());
    s.components = mesh.num_components;
    s.h_max = mesh.h_max;
    meshes.push_back(s);
}

void RunManifest::seal() {
    std::ostringstream canon;
    canon << command << '\n';
    for (const auto& [k, v] : parameters) canon << k << '=' << v << '\n';
    canon << "seed=" << seed << '\n';
    input_hash = sha1_hex(canon.str());
}

std::string RunManifest::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["argv"] = argv;
    j["parameters"] = parameters;
    j["seed"] = seed;
    j["tol"] = tol;
    j["input_hash"] = input_hash;
    j["outputs"] = outputs;
    j["seconds"] = seconds;
    j["meshes"] = nlohmann::json::array();
    for (const auto& m : meshes)
        j["meshes"].push_back({{"name", m.name},
                               {"dofs", m.dofs},
                               {"elements", m.elements},
                               {"seam_pairs", m.seam_pairs},
                               {"tips", m.tips},
                               {"components", m.components},
                               {"h_max", m.h_max}});
    return j.dump(2);
}

RunManifest RunManifest::from_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InputError("cannot open " + path);
    nlohmann::json j;
    f >> j;
    RunManifest m;
    m.command = j.value("command", "");
    m.argv = j.value("argv", std::vector<std::string>{});
    if (j.contains("parameters"))
        for (auto it = j["parameters"].begin(); it != j["parameters"].end(); ++it)
            m.parameters[it.key()] = it.value().get<std::string>();
    m.seed = j.value("seed", std::uint64_t{0});
    m.tol = j.value("tol", 0.0);
    m.input_hash = j.value("input_hash", "");
    m.outputs = j.value("outputs", std::vector<std::string>{});
    m.seconds = j.value("seconds", 0.0);
    return m;
}

} // namespace slitspec
