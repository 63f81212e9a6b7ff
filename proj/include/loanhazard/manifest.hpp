#pragma once

// Run manifest written next to every CLI output: what ran, on which inputs,
// with which parameters, and SHA-256 digests of the bytes produced.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace loanhazard {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);

struct FileDigest {
    std::string path;
    std::string sha256;
};

struct RunManifest {
    std::string command;
    std::vector<FileDigest> inputs;
    std::vector<std::pair<std::string, std::string>> parameters;  // in insertion order
    std::optional<std::uint64_t> seed;
    std::string version = LOANHAZARD_VERSION;
    std::vector<FileDigest> outputs;

    void add_input(const std::string& path);
    void add_output(const std::string& path, std::string_view bytes);
    void set(const std::string& key, std::string value);

    std::string to_json() const;
};

RunManifest manifest_from_json(const std::string& text);

/// Recomputes every output digest from disk; returns the paths that differ.
std::vector<std::string> verify_outputs(const RunManifest& manifest);

}  // namespace loanhazard
