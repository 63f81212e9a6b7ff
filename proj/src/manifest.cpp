#include "loanhazard/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <memory>

#include "loanhazard/error.hpp"

namespace loanhazard {

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        fail(Errc::Numerical, "SHA-256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::Schema, "cannot open '" + path + "'");
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return sha256_hex(bytes);
}

void RunManifest::add_input(const std::string& path) { inputs.push_back({path, sha256_file(path)}); }

void RunManifest::add_output(const std::string& path, std::string_view bytes) {
    outputs.push_back({path, sha256_hex(bytes)});
}

void RunManifest::set(const std::string& key, std::string value) {
    for (auto& [k, v] : parameters) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    parameters.emplace_back(key, std::move(value));
}

namespace {

nlohmann::ordered_json digests(const std::vector<FileDigest>& files) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& f : files) arr.push_back({{"path", f.path}, {"sha256", f.sha256}});
    return arr;
}

std::vector<FileDigest> read_digests(const nlohmann::json& arr) {
    std::vector<FileDigest> out;
    for (const auto& f : arr) out.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>()});
    return out;
}

}  // namespace

std::string RunManifest::to_json() const {
    nlohmann::ordered_json doc;
    doc["command"] = command;
    doc["tool_version"] = version;
    doc["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
    auto& params = doc["parameters"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : parameters) params[k] = v;
    doc["inputs"] = digests(inputs);
    doc["outputs"] = digests(outputs);
    return doc.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        RunManifest m;
        m.command = doc.at("command").get<std::string>();
        m.version = doc.at("tool_version").get<std::string>();
        if (!doc.at("seed").is_null()) m.seed = doc.at("seed").get<std::uint64_t>();
        for (const auto& [k, v] : doc.at("parameters").items()) m.parameters.emplace_back(k, v.get<std::string>());
        m.inputs = read_digests(doc.at("inputs"));
        m.outputs = read_digests(doc.at("outputs"));
        return m;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::Schema, std::string("invalid manifest: ") + e.what());
    }
}

std::vector<std::string> verify_outputs(const RunManifest& manifest) {
    std::vector<std::string> bad;
    for (const auto& f : manifest.outputs) {
        if (sha256_file(f.path) != f.sha256) bad.push_back(f.path);
    }
    return bad;
}

}  // namespace loanhazard
