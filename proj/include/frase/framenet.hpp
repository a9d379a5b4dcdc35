#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace frase::framenet {

enum class CoreStatus { core, peripheral, extra_thematic, unknown };

CoreStatus core_status_from_string(const std::string& s);
const char* core_status_to_string(CoreStatus s);

struct FrameElement {
    std::string name;
    std::string definition;
    CoreStatus core_status = CoreStatus::unknown;
};

struct Frame {
    std::string id;
    std::string label;
    std::string definition;
    std::vector<FrameElement> elements;  // source order preserved

    const FrameElement* find_element(const std::string& name) const;
};

struct FrameInventory {
    std::map<std::string, Frame> frames;  // keyed by frame id
    std::string source_meta;
    std::size_t skipped_records = 0;      // malformed source records
    std::vector<std::string> skipped_where;  // "line N" / file name, capped
    std::size_t missing_definitions = 0;     // kept, but flagged

    std::size_t size() const { return frames.size(); }
    const Frame* find(const std::string& id) const;

    // Ids in deterministic (sorted) order, convenient for index builds.
    std::vector<std::string> ids() const;
};

enum class InventoryFormat { framenet_xml_dir, json_lines };

// Loads frames from either a FrameNet-style XML directory (one frame per
// file) or a JSON-lines file with records
//   {id, label, definition, elements:[{name, definition, core_status}]}.
// Malformed records are skipped and counted; frames missing a definition are
// kept with an empty one.
FrameInventory load_frame_inventory(const std::filesystem::path& path, InventoryFormat format,
                                    const std::string& version = "unversioned");

// Deterministic retrieval text: "<label>. <definition> Elements: <e1>; <e2>".
std::string render_frame_text(const Frame& frame);

// Round-trip helpers for the normalized inventory artifact.
std::string frame_to_json_line(const Frame& frame);
void save_inventory_jsonl(const FrameInventory& inv, const std::filesystem::path& path);

}  // namespace frase::framenet
