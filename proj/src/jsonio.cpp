#include "frase/jsonio.hpp"

#include <fstream>
#include <sstream>

#include "frase/common.hpp"

namespace frase {

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const json&, std::size_t)>& on_record,
                    const std::function<void(const std::string&, std::size_t)>& on_bad_line) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read file: " + path.string());
    std::string line;
    std::size_t index = 0;
    while (std::getline(in, line)) {
        std::size_t current = index++;
        if (trim(line).empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded()) {
            if (on_bad_line) {
                on_bad_line(line, current);
                continue;
            }
            throw InputError("malformed JSON at " + path.string() + ":" +
                             std::to_string(current + 1));
        }
        on_record(record, current);
    }
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::vector<json> records;
    for_each_jsonl(path, [&](const json& r, std::size_t) { records.push_back(r); });
    return records;
}

std::string jsonl_to_string(const std::vector<json>& records) {
    std::ostringstream out;
    for (const json& r : records) out << r.dump() << '\n';
    return out.str();
}

void write_jsonl_atomic(const std::filesystem::path& path, const std::vector<json>& records) {
    write_file_atomic(path, jsonl_to_string(records));
}

std::vector<json> read_json_records(const std::filesystem::path& path) {
    std::string content = read_file(path);
    std::size_t i = 0;
    while (i < content.size() && std::isspace(static_cast<unsigned char>(content[i]))) ++i;
    if (i < content.size() && content[i] == '[') {
        json arr = json::parse(content, nullptr, false);
        if (arr.is_discarded() || !arr.is_array())
            throw InputError("malformed JSON array: " + path.string());
        return std::vector<json>(arr.begin(), arr.end());
    }
    return read_jsonl(path);
}

}  // namespace frase
