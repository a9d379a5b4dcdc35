#include <doctest.h>

#include <fstream>

#include "frase/common.hpp"
#include "frase/framenet.hpp"
#include "support/temp_dir.hpp"

using namespace frase;
using namespace frase::framenet;
using frase::testsupport::TempDir;

namespace {

void write_lines(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

}  // namespace

TEST_SUITE("framenet") {

TEST_CASE("json-lines loading counts well-formed records") {
    TempDir dir("fn");
    write_lines(dir.file("inv.jsonl"),
                R"({"id": "A", "label": "A", "definition": "First.", "elements": []})"
                "\n"
                R"({"id": "B", "label": "B", "definition": "Second.", "elements": [{"name": "X"}]})"
                "\n");
    FrameInventory inv = load_frame_inventory(dir.file("inv.jsonl"),
                                              InventoryFormat::json_lines);
    CHECK(inv.size() == 2);
    CHECK(inv.skipped_records == 0);
}

TEST_CASE("empty file yields an empty inventory without error") {
    TempDir dir("fn");
    write_lines(dir.file("empty.jsonl"), "");
    FrameInventory inv = load_frame_inventory(dir.file("empty.jsonl"),
                                              InventoryFormat::json_lines);
    CHECK(inv.size() == 0);
}

TEST_CASE("malformed records are skipped and counted") {
    TempDir dir("fn");
    write_lines(dir.file("inv.jsonl"),
                R"({"id": "A", "label": "A"})"
                "\n"
                "this is not json\n"
                R"({"id": "B", "label": "B"})"
                "\n");
    FrameInventory inv = load_frame_inventory(dir.file("inv.jsonl"),
                                              InventoryFormat::json_lines);
    CHECK(inv.size() == 2);
    CHECK(inv.skipped_records == 1);
    CHECK(inv.source_meta.find("skipped=1") != std::string::npos);
    REQUIRE(inv.skipped_where.size() == 1);
    CHECK(inv.skipped_where[0] == "line 2");
}

TEST_CASE("missing definition is kept and flagged") {
    TempDir dir("fn");
    write_lines(dir.file("inv.jsonl"), R"({"id": "A", "label": "A"})" "\n");
    FrameInventory inv = load_frame_inventory(dir.file("inv.jsonl"),
                                              InventoryFormat::json_lines);
    CHECK(inv.size() == 1);
    CHECK(inv.missing_definitions == 1);
    CHECK(inv.find("A")->definition.empty());
}

TEST_CASE("unreadable path is an input error") {
    CHECK_THROWS_AS(load_frame_inventory("/nonexistent/inventory.jsonl",
                                         InventoryFormat::json_lines),
                    InputError);
}

TEST_CASE("render_frame_text matches the fixed format") {
    Frame frame;
    frame.id = "Replacing";
    frame.label = "Replacing";
    frame.definition = "An Agent substitutes a New entity for an Old one.";
    frame.elements = {{"Agent", "", CoreStatus::core},
                      {"Old", "", CoreStatus::core},
                      {"New", "", CoreStatus::core}};
    CHECK(render_frame_text(frame) ==
          "Replacing. An Agent substitutes a New entity for an Old one. "
          "Elements: Agent; Old; New");
}

TEST_CASE("degenerate frame renders to label and period") {
    Frame frame;
    frame.id = "X";
    frame.label = "X";
    CHECK(render_frame_text(frame) == "X.");
}

TEST_CASE("render is deterministic and never empty for labeled frames") {
    TempDir dir("fn");
    write_lines(dir.file("inv.jsonl"),
                R"({"id": "A", "label": "Alpha", "definition": "  Spaced   out   text. ", "elements": [{"name": "E1"}, {"name": "E2"}]})"
                "\n");
    FrameInventory inv = load_frame_inventory(dir.file("inv.jsonl"),
                                              InventoryFormat::json_lines);
    const Frame* frame = inv.find("A");
    REQUIRE(frame != nullptr);
    std::string once = render_frame_text(*frame);
    std::string twice = render_frame_text(*frame);
    CHECK(once == twice);
    CHECK_FALSE(once.empty());
    CHECK(once == "Alpha. Spaced out text. Elements: E1; E2");
}

TEST_CASE("duplicate element names make a record malformed") {
    TempDir dir("fn");
    write_lines(dir.file("inv.jsonl"),
                R"({"id": "A", "label": "A", "elements": [{"name": "X"}, {"name": "X"}]})"
                "\n");
    FrameInventory inv = load_frame_inventory(dir.file("inv.jsonl"),
                                              InventoryFormat::json_lines);
    CHECK(inv.size() == 0);
    CHECK(inv.skipped_records == 1);
}

TEST_CASE("framenet xml directory layout") {
    TempDir dir("fnxml");
    write_lines(dir.file("Replacing.xml"),
                "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                "<frame name=\"Replacing\" ID=\"1287\">\n"
                "  <definition>&lt;def-root&gt;An Agent substitutes a New entity.\n"
                "  <ex>Example dropped entirely.</ex></definition>\n"
                "  <FE name=\"Agent\" coreType=\"Core\"><definition>The actor.</definition></FE>\n"
                "  <FE name=\"Old\" coreType=\"Core\"><definition>Replaced thing.</definition></FE>\n"
                "  <FE name=\"Time\" coreType=\"Peripheral\"><definition>When.</definition></FE>\n"
                "</frame>\n");
    write_lines(dir.file("broken.xml"), "<frame name=>");
    FrameInventory inv = load_frame_inventory(dir.path(), InventoryFormat::framenet_xml_dir,
                                              "fn-test");
    CHECK(inv.size() == 1);
    CHECK(inv.skipped_records == 1);
    const Frame* frame = inv.find("Replacing");
    REQUIRE(frame != nullptr);
    CHECK(frame->elements.size() == 3);
    CHECK(frame->elements[0].name == "Agent");
    CHECK(frame->elements[0].core_status == CoreStatus::core);
    CHECK(frame->elements[2].core_status == CoreStatus::peripheral);
    CHECK(frame->definition.find("Agent substitutes") != std::string::npos);
    CHECK(frame->definition.find("Example dropped") == std::string::npos);
    CHECK(inv.source_meta.find("version=fn-test") != std::string::npos);
}

TEST_CASE("element source order is preserved") {
    TempDir dir("fn");
    write_lines(dir.file("inv.jsonl"),
                R"({"id": "A", "label": "A", "elements": [{"name": "Zeta"}, {"name": "Alpha"}, {"name": "Mid"}]})"
                "\n");
    FrameInventory inv = load_frame_inventory(dir.file("inv.jsonl"),
                                              InventoryFormat::json_lines);
    const Frame* frame = inv.find("A");
    REQUIRE(frame != nullptr);
    CHECK(frame->elements[0].name == "Zeta");
    CHECK(frame->elements[1].name == "Alpha");
    CHECK(frame->elements[2].name == "Mid");
}

TEST_CASE("bundled miniature inventory loads cleanly") {
    const char* root = std::getenv("FRASE_SOURCE_DIR");
    REQUIRE(root != nullptr);
    FrameInventory inv = load_frame_inventory(
        std::filesystem::path(root) / "data/fixtures/framenet_mini.jsonl",
        InventoryFormat::json_lines, "mini-20");
    CHECK(inv.size() == 20);
    CHECK(inv.skipped_records == 0);
    CHECK(inv.missing_definitions == 0);
    REQUIRE(inv.find("Replacing") != nullptr);
    REQUIRE(inv.find("Identicality") != nullptr);
    CHECK(inv.find("Replacing")->find_element("Old") != nullptr);
}

}  // TEST_SUITE
