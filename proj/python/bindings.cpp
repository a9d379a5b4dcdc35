#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "frase/argmap.hpp"
#include "frase/common.hpp"
#include "frase/dataset.hpp"
#include "frase/embedindex.hpp"
#include "frase/evalharness.hpp"
#include "frase/framealign.hpp"
#include "frase/framenet.hpp"
#include "frase/kbclient.hpp"
#include "frase/mockendpoint.hpp"
#include "frase/sparqltool.hpp"

namespace py = pybind11;
using namespace frase;

namespace {

framenet::InventoryFormat format_from_string(const std::string& format) {
    if (format == "framenet-xml-dir") return framenet::InventoryFormat::framenet_xml_dir;
    if (format == "json-lines") return framenet::InventoryFormat::json_lines;
    throw UsageError("unknown inventory format '" + format + "'");
}

py::dict annotation_to_dict(const argmap::FrameAnnotation& a) {
    py::dict out;
    out["frame_id"] = a.frame_id;
    py::list mappings;
    for (const auto& m : a.mappings) {
        py::dict d;
        d["element"] = m.element_name;
        d["span"] = m.span_text;
        d["start"] = m.char_start;
        d["end"] = m.char_end;
        mappings.append(d);
    }
    out["mappings"] = mappings;
    out["unfilled"] = a.unfilled;
    out["repairs"] = a.repairs;
    return out;
}

dataset::Lcq2Entry entry_from_dict(const py::dict& d) {
    dataset::Lcq2Entry e;
    e.uid = py::cast<std::string>(d["uid"]);
    e.raw_question = py::cast<std::string>(d["raw_question"]);
    if (d.contains("reformulated_question") && !d["reformulated_question"].is_none())
        e.reformulated_question = py::cast<std::string>(d["reformulated_question"]);
    e.sparql = py::cast<std::string>(d["sparql"]);
    e.template_id = py::cast<std::string>(d["template_id"]);
    return e;
}

py::dict entry_to_dict(const dataset::Lcq2Entry& e) {
    py::dict d;
    d["uid"] = e.uid;
    d["raw_question"] = e.raw_question;
    if (e.reformulated_question)
        d["reformulated_question"] = *e.reformulated_question;
    else
        d["reformulated_question"] = py::none();
    d["sparql"] = e.sparql;
    d["template_id"] = e.template_id;
    return d;
}

std::vector<dataset::Lcq2Entry> entries_from_list(const py::list& list) {
    std::vector<dataset::Lcq2Entry> entries;
    entries.reserve(list.size());
    for (const auto& item : list) entries.push_back(entry_from_dict(py::cast<py::dict>(item)));
    return entries;
}

py::dict stats_to_dict(const dataset::SubsetStats& s) {
    py::dict d;
    d["entries"] = s.entries;
    d["templates"] = s.templates;
    d["unseen_templates"] = s.unseen_templates;
    d["min_query_length"] = s.min_query_length;
    d["mean_query_length"] = s.mean_query_length;
    d["max_query_length"] = s.max_query_length;
    return d;
}

}  // namespace

PYBIND11_MODULE(_frase, m) {
    m.doc() = "Frame detection, LCQ3 dataset construction, and SPARQL evaluation core";

    py::register_exception<UsageError>(m, "FraseUsageError", PyExc_ValueError);
    py::register_exception<InputError>(m, "FraseInputError", PyExc_ValueError);
    py::register_exception<ServiceError>(m, "FraseServiceError", PyExc_RuntimeError);

    // ---- framenet ----
    py::class_<framenet::FrameElement>(m, "FrameElement")
        .def(py::init([](const std::string& name, const std::string& definition,
                         const std::string& core_status) {
                 return framenet::FrameElement{name, definition,
                                               framenet::core_status_from_string(core_status)};
             }),
             py::arg("name"), py::arg("definition") = "", py::arg("core_status") = "unknown")
        .def_readonly("name", &framenet::FrameElement::name)
        .def_readonly("definition", &framenet::FrameElement::definition)
        .def_property_readonly("core_status", [](const framenet::FrameElement& e) {
            return std::string(framenet::core_status_to_string(e.core_status));
        });

    py::class_<framenet::Frame>(m, "Frame")
        .def(py::init([](const std::string& id, const std::string& label,
                         const std::string& definition,
                         const std::vector<framenet::FrameElement>& elements) {
                 framenet::Frame f;
                 f.id = id;
                 f.label = label;
                 f.definition = definition;
                 f.elements = elements;
                 return f;
             }),
             py::arg("id"), py::arg("label"), py::arg("definition") = "",
             py::arg("elements") = std::vector<framenet::FrameElement>{})
        .def_readonly("id", &framenet::Frame::id)
        .def_readonly("label", &framenet::Frame::label)
        .def_readonly("definition", &framenet::Frame::definition)
        .def_readonly("elements", &framenet::Frame::elements);

    py::class_<framenet::FrameInventory>(m, "FrameInventory")
        .def_property_readonly("size", &framenet::FrameInventory::size)
        .def_readonly("source_meta", &framenet::FrameInventory::source_meta)
        .def_readonly("skipped_records", &framenet::FrameInventory::skipped_records)
        .def("ids", &framenet::FrameInventory::ids)
        .def("find",
             [](const framenet::FrameInventory& inv, const std::string& id) -> py::object {
                 const framenet::Frame* f = inv.find(id);
                 return f ? py::cast(*f) : py::none().cast<py::object>();
             })
        .def("__len__", &framenet::FrameInventory::size);

    m.def(
        "load_frame_inventory",
        [](const std::filesystem::path& path, const std::string& format,
           const std::string& version) {
            return framenet::load_frame_inventory(path, format_from_string(format), version);
        },
        py::arg("path"), py::arg("format") = "json-lines", py::arg("version") = "unversioned");
    m.def("render_frame_text", &framenet::render_frame_text, py::arg("frame"));

    // ---- sparql tooling ----
    m.def(
        "extract_uris",
        [](const std::string& query) {
            sparql::ExtractedUris uris = sparql::extract_uris(query);
            py::dict out;
            out["relations"] = uris.relations;
            out["classes"] = uris.classes;
            out["entities"] = uris.entities;
            return out;
        },
        py::arg("query"));
    m.def(
        "extract_template",
        [](const std::string& query) {
            sparql::QueryTemplate t = sparql::extract_template(query);
            py::dict out;
            out["canonical_text"] = t.canonical_text;
            out["form"] = std::string(sparql::query_form_to_string(t.form));
            out["placeholder_count"] = t.placeholder_count;
            return out;
        },
        py::arg("query"));
    m.def(
        "classify_query_form",
        [](const std::string& query) {
            return std::string(sparql::query_form_to_string(sparql::classify_query_form(query)));
        },
        py::arg("query"));
    m.def("query_length", &sparql::query_length, py::arg("query"));
    m.def("select_variables", &sparql::select_variables, py::arg("query"));

    // ---- embedding index ----
    py::class_<embed::HashFoldProvider>(m, "HashFoldProvider")
        .def(py::init<std::size_t>(), py::arg("dim") = 256)
        .def_property_readonly("dim", &embed::HashFoldProvider::dim)
        .def_property_readonly("id", &embed::HashFoldProvider::id)
        .def("embed", [](embed::HashFoldProvider& p, const std::string& text) {
            return embed::embed_text(p, text);
        });

    py::class_<embed::VectorIndex>(m, "VectorIndex")
        .def(py::init<std::size_t>(), py::arg("dim"))
        .def_property_readonly("dim", &embed::VectorIndex::dim)
        .def_property_readonly("size", &embed::VectorIndex::size)
        .def_property_readonly("provider_id", &embed::VectorIndex::provider_id)
        .def("add", &embed::VectorIndex::add, py::arg("item_id"), py::arg("vector"))
        .def(
            "search",
            [](const embed::VectorIndex& index, const std::vector<float>& query,
               std::size_t k) {
                py::list out;
                for (const auto& hit : index.search(query, k))
                    out.append(py::make_tuple(hit.item_id, hit.score));
                return out;
            },
            py::arg("query"), py::arg("k") = 1)
        .def("save", &embed::VectorIndex::save, py::arg("path"))
        .def_static("load", &embed::VectorIndex::load, py::arg("path"))
        .def("__len__", &embed::VectorIndex::size);

    m.def(
        "build_frame_index",
        [](const framenet::FrameInventory& inv, embed::HashFoldProvider& provider) {
            return embed::build_frame_index(inv, provider);
        },
        py::arg("inventory"), py::arg("provider"));

    // ---- frame alignment (offline, dict-backed descriptors) ----
    m.def(
        "detect_frames",
        [](const std::string& query, const embed::VectorIndex& index,
           embed::HashFoldProvider& provider, const py::dict& descriptors, std::size_t k,
           double threshold, bool dedupe_frames) {
            align::AlignConfig cfg{k, threshold, dedupe_frames};
            align::DescriptorSource source = [&descriptors](const std::string& uri,
                                                            kb::DescriptorKind kind) {
                kb::KbDescriptor d;
                d.uri = uri;
                d.kind = kind;
                if (descriptors.contains(py::str(uri))) {
                    py::tuple lv = py::cast<py::tuple>(descriptors[py::str(uri)]);
                    d.label = py::cast<std::string>(lv[0]);
                    d.description = py::cast<std::string>(lv[1]);
                    d.status = d.label.empty() ? kb::DescriptorStatus::missing_label
                               : d.description.empty()
                                   ? kb::DescriptorStatus::missing_description
                                   : kb::DescriptorStatus::ok;
                } else {
                    d.status = kb::DescriptorStatus::not_found;
                }
                return d;
            };
            align::DetectionResult r = align::detect_frames(query, index, source, provider,
                                                            cfg);
            py::list frames;
            for (const auto& f : r.frames)
                frames.append(py::make_tuple(f.frame_id, f.triggering_uri, f.score));
            py::dict out;
            out["frames"] = frames;
            out["skipped"] = r.skipped_uris;
            return out;
        },
        py::arg("query"), py::arg("index"), py::arg("provider"), py::arg("descriptors"),
        py::arg("k") = 1, py::arg("threshold") = 0.0, py::arg("dedupe_frames") = true,
        "Align a query's relation/class URIs with frames. `descriptors` maps a "
        "URI to a (label, description) tuple; absent URIs count as not found.");

    // ---- argument mapping ----
    m.def(
        "validate_annotation",
        [](const std::string& question, const framenet::Frame& frame,
           const std::string& backend_output) {
            return annotation_to_dict(argmap::validate_annotation(
                question, frame, argmap::parse_backend_output(backend_output)));
        },
        py::arg("question"), py::arg("frame"), py::arg("backend_output"));
    m.def(
        "lexical_baseline_annotate",
        [](const std::string& question, const framenet::Frame& frame, double threshold) {
            return annotation_to_dict(
                argmap::lexical_baseline_annotate(question, frame, threshold));
        },
        py::arg("question"), py::arg("frame"), py::arg("jaccard_threshold") = 0.5);

    // ---- dataset ----
    m.def(
        "load_lcq2",
        [](const std::filesystem::path& path) {
            py::list out;
            for (const auto& e : dataset::load_lcq2(path)) out.append(entry_to_dict(e));
            return out;
        },
        py::arg("path"));
    m.def(
        "make_original_split",
        [](const py::list& entries, std::uint64_t seed) {
            dataset::SplitSpec split =
                dataset::make_original_split(entries_from_list(entries), seed);
            py::dict out;
            for (const auto& [uid, subset] : split.assignments)
                out[py::str(uid)] = std::string(dataset::subset_to_string(subset));
            return out;
        },
        py::arg("entries"), py::arg("seed") = 1618);
    m.def(
        "make_unknown_template_split",
        [](const py::list& entries, std::uint64_t seed, bool relax) {
            dataset::UnknownTemplateOptions opts;
            opts.relax_validation_disjointness = relax;
            dataset::SplitSpec split =
                dataset::make_unknown_template_split(entries_from_list(entries), seed, opts);
            py::dict out;
            for (const auto& [uid, subset] : split.assignments)
                out[py::str(uid)] = std::string(dataset::subset_to_string(subset));
            return out;
        },
        py::arg("entries"), py::arg("seed") = 1618,
        py::arg("relax_validation_disjointness") = false);
    m.def(
        "split_stats",
        [](const py::list& entries, const py::dict& assignments, const std::string& variant) {
            auto native = entries_from_list(entries);
            dataset::SplitSpec split;
            for (const auto& [uid, subset] : assignments) {
                std::string s = py::cast<std::string>(subset);
                split.assignments.emplace(py::cast<std::string>(uid),
                                          s == "train"        ? dataset::Subset::train
                                          : s == "validation" ? dataset::Subset::validation
                                                              : dataset::Subset::test);
            }
            dataset::MaterializedSplit m2 = dataset::make_variant(
                native, split, dataset::variant_from_string(variant));
            dataset::StatsReport report = dataset::split_stats(m2);
            py::dict out;
            out["train"] = stats_to_dict(report.train);
            out["validation"] = stats_to_dict(report.validation);
            out["test"] = stats_to_dict(report.test);
            out["dropped_missing_reformulation"] = m2.dropped_missing_reformulation;
            return out;
        },
        py::arg("entries"), py::arg("assignments"), py::arg("variant") = "raw");
    m.def(
        "build_prompt",
        [](const std::string& question, const std::string& sparql_text, bool with_frames,
           const std::string& annotations_json) {
            std::vector<argmap::FrameAnnotation> annotations;
            if (!annotations_json.empty())
                for (const auto& a : nlohmann::json::parse(annotations_json))
                    annotations.push_back(argmap::annotation_from_json(a));
            dataset::MaterializedRecord record{"", "", question, sparql_text, ""};
            dataset::PromptRecord p = dataset::build_prompt(record, annotations, with_frames);
            py::dict out;
            out["instruction"] = p.instruction;
            out["input"] = p.input;
            out["output"] = p.output;
            return out;
        },
        py::arg("question"), py::arg("sparql"), py::arg("with_frames") = false,
        py::arg("annotations_json") = "");

    // ---- evaluation ----
    m.def("bleu", &eval::bleu, py::arg("candidate"), py::arg("reference"));
    m.def(
        "corpus_bleu",
        [](const std::vector<std::pair<std::string, std::string>>& pairs) {
            eval::CorpusBleu cb = eval::corpus_bleu(pairs);
            return py::make_tuple(cb.pooled, cb.mean_sentence);
        },
        py::arg("pairs"), "Returns (pooled, mean_sentence).");
    m.def(
        "answer_f1",
        [](const std::set<std::string>& pred, const std::set<std::string>& gold) {
            eval::AnswerSet p, g;
            p.values = pred;
            g.values = gold;
            eval::F1Score f = eval::answer_f1(p, g);
            return py::make_tuple(f.precision, f.recall, f.f1);
        },
        py::arg("pred"), py::arg("gold"));
    m.def(
        "answer_accuracy",
        [](const std::set<std::string>& pred, const std::set<std::string>& gold) {
            eval::AnswerSet p, g;
            p.values = pred;
            g.values = gold;
            return eval::answer_accuracy(p, g);
        },
        py::arg("pred"), py::arg("gold"));
    m.def(
        "execute_query",
        [](const std::string& endpoint, const std::string& query, int timeout_ms) {
            eval::EndpointOptions opts;
            opts.timeout_ms = timeout_ms;
            eval::ExecutionResult r = eval::execute_query(endpoint, query, opts);
            py::dict out;
            out["status"] = std::string(eval::exec_status_to_string(r.status));
            if (r.answers.kind == eval::AnswerKind::boolean)
                out["boolean"] = r.answers.boolean_value;
            else
                out["values"] = r.answers.values;
            return out;
        },
        py::arg("endpoint"), py::arg("query"), py::arg("timeout_ms") = 30000);
    m.def(
        "evaluate_run",
        [](const std::map<std::string, std::string>& predictions,
           const std::vector<std::pair<std::string, std::string>>& gold,
           const std::string& endpoint, int timeout_ms) {
            std::vector<eval::GoldEntry> entries;
            for (const auto& [uid, sparql_text] : gold) entries.push_back({uid, sparql_text});
            eval::EvalOptions opts;
            opts.timeout_ms = timeout_ms;
            eval::EvalReport report = eval::evaluate_run(predictions, entries, endpoint, opts);
            return py::module_::import("json").attr("loads")(report.to_json().dump());
        },
        py::arg("predictions"), py::arg("gold"), py::arg("endpoint"),
        py::arg("timeout_ms") = 30000,
        "gold is a list of (uid, sparql) pairs; returns the report as a dict.");

    py::class_<eval::MockSparqlEndpoint>(m, "MockSparqlEndpoint")
        .def(py::init<const std::filesystem::path&>(), py::arg("map_file"))
        .def("start", &eval::MockSparqlEndpoint::start, py::arg("port") = 0)
        .def("stop", &eval::MockSparqlEndpoint::stop)
        .def_property_readonly("url", &eval::MockSparqlEndpoint::url)
        .def_property_readonly("port", &eval::MockSparqlEndpoint::port);

    m.attr("__version__") = "0.1.0";
}
