#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace frase {

using json = nlohmann::json;

// Reads a JSON-lines file; blank lines are ignored. `on_record` receives the
// parsed value and the 0-based line index. A malformed line is reported via
// `on_bad_line` (return value ignored); when no handler is given it throws.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const json&, std::size_t)>& on_record,
                    const std::function<void(const std::string&, std::size_t)>& on_bad_line = {});

std::vector<json> read_jsonl(const std::filesystem::path& path);

// Serializes one record per line with stable key order (nlohmann objects are
// key-sorted), suitable for byte-identical reruns.
void write_jsonl_atomic(const std::filesystem::path& path, const std::vector<json>& records);

std::string jsonl_to_string(const std::vector<json>& records);

// Parses a whole file that holds either a JSON array or JSON-lines.
std::vector<json> read_json_records(const std::filesystem::path& path);

}  // namespace frase
