#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "maldicom/dataset.hpp"
#include "maldicom/detector.hpp"
#include "maldicom/dicom.hpp"
#include "maldicom/models.hpp"
#include "maldicom/pe.hpp"
#include "maldicom/polyglot.hpp"
#include "maldicom/shapley.hpp"

namespace py = pybind11;
using namespace maldicom;

namespace {

std::vector<std::uint8_t> to_vec(const py::bytes& b) {
    std::string s = b;
    return {s.begin(), s.end()};
}

py::bytes to_bytes(const std::vector<std::uint8_t>& v) {
    return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

} // namespace

PYBIND11_MODULE(_maldicom, m) {
    m.doc() = "DICOM/PE polyglot toolkit: parsing, injection, detection, triage";

    py::register_exception<maldicom::Error>(m, "MaldicomError");

    // --- dicom / pe ------------------------------------------------------
    m.def("dicom_roundtrip", [](const py::bytes& b) {
        auto f = dicom::parse_dicom(to_vec(b));
        return to_bytes(dicom::serialize_dicom(f));
    }, "Parse and re-serialize a DICOM file (byte-exact for valid input)");

    m.def("dicom_tags", [](const py::bytes& b) {
        auto f = dicom::parse_dicom(to_vec(b));
        std::vector<std::string> tags;
        for (const auto& e : f.meta_elements) tags.push_back(dicom::tag_to_string(e.tag));
        for (const auto& e : f.body_elements) tags.push_back(dicom::tag_to_string(e.tag));
        return tags;
    }, "List element tags of a DICOM file as (gggg,eeee) strings");

    m.def("pe_section_count", [](const py::bytes& b) {
        return pe::parse_pe(to_vec(b)).sections.size();
    });

    // --- polyglot ----------------------------------------------------------
    m.def("create_pe_dicom", [](const py::bytes& pe_bytes, const py::bytes& dicom_bytes) {
        auto [out, record] = polyglot::create_pe_dicom(to_vec(pe_bytes), to_vec(dicom_bytes));
        return py::make_tuple(to_bytes(out), polyglot::record_to_json(record));
    }, py::arg("pe_bytes"), py::arg("dicom_bytes"),
       "Embed a PE into a DICOM file; returns (polyglot_bytes, record_json)");

    m.def("extract_pe", [](const py::bytes& poly, const std::string& record_json) {
        return to_bytes(polyglot::extract_pe(to_vec(poly),
                                             polyglot::record_from_json(record_json)));
    }, py::arg("polyglot_bytes"), py::arg("record_json"));

    m.def("verify_polyglot", [](const py::bytes& b) {
        auto c = polyglot::verify_polyglot(to_vec(b));
        return py::make_tuple(c.is_dicom, c.is_pe, c.e_lfanew_target_is_pe_sig);
    });

    // --- detector ------------------------------------------------------------
    m.def("shannon_entropy", [](const py::bytes& b) {
        auto v = to_vec(b);
        return detector::shannon_entropy(v);
    });

    m.def("classify_bytes", [](const py::bytes& b, double entropy_threshold, bool deep_scan) {
        detector::DetectorConfig cfg;
        cfg.entropy_threshold = entropy_threshold;
        cfg.deep_scan = deep_scan;
        return detector::classify_file(to_vec(b), cfg).to_json();
    }, py::arg("data"), py::arg("entropy_threshold") = 3.0, py::arg("deep_scan") = true,
       "Scan in-memory bytes; returns the report as JSON");

    m.def("scan_path", [](const std::string& path, double entropy_threshold, bool deep_scan) {
        detector::DetectorConfig cfg;
        cfg.entropy_threshold = entropy_threshold;
        cfg.deep_scan = deep_scan;
        return detector::scan_path(path, cfg).to_json();
    }, py::arg("path"), py::arg("entropy_threshold") = 3.0, py::arg("deep_scan") = true);

    // --- triage ---------------------------------------------------------------
    py::class_<triage::Dataset>(m, "Dataset")
        .def_readonly("feature_names", &triage::Dataset::feature_names)
        .def("__len__", &triage::Dataset::size)
        .def("row", [](const triage::Dataset& d, std::size_t i) {
            return d.samples.at(i).x;
        })
        .def("label", [](const triage::Dataset& d, std::size_t i) {
            return triage::Dataset::class_label(d.samples.at(i), triage::LabelMode::Family16);
        });

    m.def("load_csv", &triage::load_malmem_csv, py::arg("path"));
    m.def("smote", [](const triage::Dataset& d, int k, std::uint64_t seed) {
        return triage::smote_oversample(d, k, seed);
    }, py::arg("dataset"), py::arg("k") = 5, py::arg("seed") = 42);
    m.def("split", [](const triage::Dataset& d, double train_fraction, std::uint64_t seed) {
        auto [a, b] = triage::stratified_split(d, train_fraction, seed);
        return py::make_tuple(a, b);
    }, py::arg("dataset"), py::arg("train_fraction") = 0.8, py::arg("seed") = 42);

    py::class_<triage::Model, std::shared_ptr<triage::Model>>(m, "Model")
        .def_property_readonly("labels", &triage::Model::class_labels)
        .def("predict", [](const triage::Model& m_, const std::vector<double>& x) {
            auto p = m_.predict(x);
            return py::make_tuple(p.label, p.scores);
        })
        .def("to_json", &triage::Model::to_json);

    m.def("model_from_json", [](const std::string& j) {
        return std::shared_ptr<triage::Model>(triage::Model::from_json(j));
    });

    auto with_hp = [](int max_depth, int n_trees, int k) {
        triage::Hyperparams hp;
        hp.max_depth = max_depth;
        hp.n_trees = n_trees;
        hp.k_neighbors = k;
        return hp;
    };
    m.def("train", [with_hp](const std::string& kind, const triage::Dataset& d, int max_depth,
                             int n_trees, int k, std::uint64_t seed) {
        auto hp = with_hp(max_depth, n_trees, k);
        std::unique_ptr<triage::Model> mdl;
        if (kind == "dt") mdl = triage::train_decision_tree(d, hp);
        else if (kind == "rf") mdl = triage::train_random_forest(d, hp, seed);
        else if (kind == "knn") mdl = triage::train_knn(d, hp);
        else if (kind == "gnb") mdl = triage::train_gaussian_nb(d, hp);
        else throw std::invalid_argument("kind must be dt|rf|knn|gnb");
        return std::shared_ptr<triage::Model>(std::move(mdl));
    }, py::arg("kind"), py::arg("dataset"), py::arg("max_depth") = -1,
       py::arg("n_trees") = 100, py::arg("k") = 5, py::arg("seed") = 42);

    m.def("evaluate", [](const triage::Model& mdl, const triage::Dataset& d,
                         const std::string& name) {
        return triage::evaluate(mdl, d).to_json(name);
    }, py::arg("model"), py::arg("dataset"), py::arg("name") = "model");

    m.def("shapley", [](const triage::Model& mdl, const std::vector<double>& x,
                        const triage::Dataset& background, const std::string& mode,
                        int n_permutations, std::uint64_t seed,
                        const std::vector<int>& feature_subset, int target_class) {
        triage::ShapleyConfig cfg;
        cfg.mode = mode == "sampled" ? triage::ShapleyConfig::Mode::Sampled
                                     : triage::ShapleyConfig::Mode::Exact;
        cfg.n_permutations = n_permutations;
        cfg.seed = seed;
        cfg.feature_subset = feature_subset;
        cfg.target_class = target_class;
        auto e = triage::shapley_values(mdl, x, background, cfg);
        return py::make_tuple(e.phi, e.base_value, e.fx, e.features);
    }, py::arg("model"), py::arg("x"), py::arg("background"), py::arg("mode") = "exact",
       py::arg("n_permutations") = 2048, py::arg("seed") = 42,
       py::arg("feature_subset") = std::vector<int>{}, py::arg("target_class") = -1,
       "Returns (phi, base_value, fx, feature_indices)");
}
