#include "frase/framenet.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "frase/common.hpp"
#include "frase/jsonio.hpp"

namespace frase::framenet {

CoreStatus core_status_from_string(const std::string& s) {
    std::string v = to_lower(trim(s));
    if (v == "core" || v == "core-unexpressed") return CoreStatus::core;
    if (v == "peripheral") return CoreStatus::peripheral;
    if (v == "extra-thematic" || v == "extra_thematic") return CoreStatus::extra_thematic;
    return CoreStatus::unknown;
}

const char* core_status_to_string(CoreStatus s) {
    switch (s) {
        case CoreStatus::core: return "core";
        case CoreStatus::peripheral: return "peripheral";
        case CoreStatus::extra_thematic: return "extra-thematic";
        default: return "unknown";
    }
}

const FrameElement* Frame::find_element(const std::string& name) const {
    for (const auto& e : elements)
        if (e.name == name) return &e;
    return nullptr;
}

const Frame* FrameInventory::find(const std::string& id) const {
    auto it = frames.find(id);
    return it == frames.end() ? nullptr : &it->second;
}

std::vector<std::string> FrameInventory::ids() const {
    std::vector<std::string> out;
    out.reserve(frames.size());
    for (const auto& [id, _] : frames) out.push_back(id);
    return out;
}

namespace {

bool parse_frame_record(const json& record, Frame& out) {
    if (!record.is_object()) return false;
    if (!record.contains("id") || !record["id"].is_string()) return false;
    if (!record.contains("label") || !record["label"].is_string()) return false;
    out.id = record["id"].get<std::string>();
    out.label = record["label"].get<std::string>();
    if (out.id.empty() || out.label.empty()) return false;
    out.definition =
        record.contains("definition") && record["definition"].is_string()
            ? record["definition"].get<std::string>()
            : "";
    out.elements.clear();
    if (record.contains("elements")) {
        if (!record["elements"].is_array()) return false;
        std::set<std::string> seen;
        for (const auto& el : record["elements"]) {
            if (!el.is_object() || !el.contains("name") || !el["name"].is_string()) return false;
            FrameElement fe;
            fe.name = el["name"].get<std::string>();
            if (fe.name.empty() || !seen.insert(fe.name).second) return false;
            fe.definition = el.contains("definition") && el["definition"].is_string()
                                ? el["definition"].get<std::string>()
                                : "";
            fe.core_status = el.contains("core_status") && el["core_status"].is_string()
                                 ? core_status_from_string(el["core_status"].get<std::string>())
                                 : CoreStatus::unknown;
            out.elements.push_back(std::move(fe));
        }
    }
    return true;
}

// Minimal extraction from FrameNet frame XML. We only need the frame name/ID
// attributes, the <definition> text, and each <FE name=... coreType=...> with
// its own <definition>. Example sentences (<ex> subtrees) are dropped and all
// remaining markup stripped.
std::string strip_xml_tags(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool in_tag = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '<') {
            in_tag = true;
        } else if (c == '>') {
            in_tag = false;
            out.push_back(' ');
        } else if (!in_tag) {
            out.push_back(c);
        }
    }
    // basic entities
    std::string decoded;
    decoded.reserve(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] == '&') {
            if (out.compare(i, 5, "&amp;") == 0) { decoded.push_back('&'); i += 4; continue; }
            if (out.compare(i, 4, "&lt;") == 0) { decoded.push_back('<'); i += 3; continue; }
            if (out.compare(i, 4, "&gt;") == 0) { decoded.push_back('>'); i += 3; continue; }
            if (out.compare(i, 6, "&quot;") == 0) { decoded.push_back('"'); i += 5; continue; }
            if (out.compare(i, 6, "&apos;") == 0) { decoded.push_back('\''); i += 5; continue; }
        }
        decoded.push_back(out[i]);
    }
    return normalize_whitespace(decoded);
}

std::string drop_subtrees(std::string s, const std::string& tag) {
    const std::string open = "<" + tag;
    const std::string close = "</" + tag + ">";
    std::size_t pos;
    while ((pos = s.find(open)) != std::string::npos) {
        std::size_t end = s.find(close, pos);
        if (end == std::string::npos) {
            s.erase(pos);
            break;
        }
        s.erase(pos, end + close.size() - pos);
    }
    return s;
}

std::optional<std::string> find_attr(const std::string& tag_text, const std::string& attr) {
    std::size_t pos = tag_text.find(attr + "=\"");
    if (pos == std::string::npos) return std::nullopt;
    pos += attr.size() + 2;
    std::size_t end = tag_text.find('"', pos);
    if (end == std::string::npos) return std::nullopt;
    return tag_text.substr(pos, end - pos);
}

// Returns the text of the first <tag ...>...</tag> region at or after `from`.
std::optional<std::pair<std::string, std::string>> find_element_region(const std::string& xml,
                                                                       const std::string& tag,
                                                                       std::size_t from,
                                                                       std::size_t* next) {
    std::size_t pos = from;
    while ((pos = xml.find("<" + tag, pos)) != std::string::npos) {
        char after = pos + tag.size() + 1 < xml.size() ? xml[pos + tag.size() + 1] : '\0';
        if (after != ' ' && after != '>' && after != '\t' && after != '\n' && after != '/') {
            ++pos;
            continue;
        }
        std::size_t tag_end = xml.find('>', pos);
        if (tag_end == std::string::npos) return std::nullopt;
        std::string tag_text = xml.substr(pos, tag_end - pos + 1);
        if (xml[tag_end - 1] == '/') {  // self-closing
            if (next) *next = tag_end + 1;
            return std::make_pair(tag_text, std::string());
        }
        std::size_t close = xml.find("</" + tag + ">", tag_end);
        if (close == std::string::npos) return std::nullopt;
        if (next) *next = close + tag.size() + 3;
        return std::make_pair(tag_text, xml.substr(tag_end + 1, close - tag_end - 1));
    }
    return std::nullopt;
}

bool parse_frame_xml(const std::string& xml, Frame& out) {
    std::size_t next = 0;
    auto frame_region = find_element_region(xml, "frame", 0, &next);
    if (!frame_region) return false;
    auto name = find_attr(frame_region->first, "name");
    if (!name || name->empty()) return false;
    out.label = *name;
    out.id = *name;  // frames keyed by name, matching the alignment output

    const std::string& body = frame_region->second;
    std::size_t cursor = 0;
    auto def = find_element_region(body, "definition", 0, &cursor);
    out.definition = def ? strip_xml_tags(drop_subtrees(def->second, "ex")) : "";

    out.elements.clear();
    std::set<std::string> seen;
    cursor = 0;
    while (true) {
        std::size_t after = cursor;
        auto fe = find_element_region(body, "FE", cursor, &after);
        if (!fe) break;
        cursor = after;
        auto fe_name = find_attr(fe->first, "name");
        if (!fe_name || fe_name->empty() || !seen.insert(*fe_name).second) continue;
        FrameElement element;
        element.name = *fe_name;
        auto core = find_attr(fe->first, "coreType");
        element.core_status = core ? core_status_from_string(*core) : CoreStatus::unknown;
        std::size_t ignored = 0;
        auto fe_def = find_element_region(fe->second, "definition", 0, &ignored);
        element.definition = fe_def ? strip_xml_tags(drop_subtrees(fe_def->second, "ex")) : "";
        out.elements.push_back(std::move(element));
    }
    return true;
}

void note_skipped(FrameInventory& inv, const std::string& where) {
    inv.skipped_records++;
    if (inv.skipped_where.size() < 20) inv.skipped_where.push_back(where);
}

void add_frame(FrameInventory& inv, Frame frame, const std::string& where) {
    if (inv.frames.count(frame.id)) {
        note_skipped(inv, where + " (duplicate id " + frame.id + ")");
        return;
    }
    if (frame.definition.empty()) inv.missing_definitions++;
    inv.frames.emplace(frame.id, std::move(frame));
}

}  // namespace

FrameInventory load_frame_inventory(const std::filesystem::path& path, InventoryFormat format,
                                    const std::string& version) {
    namespace fs = std::filesystem;
    if (!fs::exists(path)) throw InputError("inventory path does not exist: " + path.string());

    FrameInventory inv;
    if (format == InventoryFormat::json_lines) {
        if (!fs::is_regular_file(path))
            throw InputError("expected a JSON-lines file: " + path.string());
        for_each_jsonl(
            path,
            [&](const json& record, std::size_t index) {
                std::string where = "line " + std::to_string(index + 1);
                Frame frame;
                if (parse_frame_record(record, frame))
                    add_frame(inv, std::move(frame), where);
                else
                    note_skipped(inv, where);
            },
            [&](const std::string&, std::size_t index) {
                note_skipped(inv, "line " + std::to_string(index + 1));
            });
    } else {
        if (!fs::is_directory(path))
            throw InputError("expected a FrameNet XML directory: " + path.string());
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.is_regular_file() && entry.path().extension() == ".xml")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            Frame frame;
            if (parse_frame_xml(read_file(file), frame))
                add_frame(inv, std::move(frame), file.filename().string());
            else
                note_skipped(inv, file.filename().string());
        }
    }

    std::ostringstream meta;
    meta << "version=" << version << ";skipped=" << inv.skipped_records
         << ";missing_definitions=" << inv.missing_definitions;
    inv.source_meta = meta.str();
    return inv;
}

std::string render_frame_text(const Frame& frame) {
    std::string text = frame.label + ".";
    if (!frame.definition.empty()) text += " " + frame.definition;
    if (!frame.elements.empty()) {
        text += " Elements:";
        for (std::size_t i = 0; i < frame.elements.size(); ++i)
            text += (i == 0 ? " " : "; ") + frame.elements[i].name;
    }
    return normalize_whitespace(text);
}

std::string frame_to_json_line(const Frame& frame) {
    json elements = json::array();
    for (const auto& e : frame.elements)
        elements.push_back({{"name", e.name},
                            {"definition", e.definition},
                            {"core_status", core_status_to_string(e.core_status)}});
    json record = {{"id", frame.id},
                   {"label", frame.label},
                   {"definition", frame.definition},
                   {"elements", elements}};
    return record.dump();
}

void save_inventory_jsonl(const FrameInventory& inv, const std::filesystem::path& path) {
    std::ostringstream out;
    for (const auto& [_, frame] : inv.frames) out << frame_to_json_line(frame) << '\n';
    write_file_atomic(path, out.str());
}

}  // namespace frase::framenet
