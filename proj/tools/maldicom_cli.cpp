#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maldicom/dataset.hpp"
#include "maldicom/detector.hpp"
#include "maldicom/dicom.hpp"
#include "maldicom/models.hpp"
#include "maldicom/pe.hpp"
#include "maldicom/polyglot.hpp"
#include "maldicom/shapley.hpp"

namespace fs = std::filesystem;
using namespace maldicom;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitSuspicious = 2;
constexpr int kExitPolyglot = 3;

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes, bool force) {
    if (!force && fs::exists(path)) {
        throw Error(ErrorCode::IoError, path + " exists; pass --force to overwrite");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

void write_text(const std::string& path, const std::string& text, bool force) {
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()),
               force);
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("MALDICOM_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 42;
}

struct TrainOptions {
    std::string csv_path;
    std::string model = "rf";
    std::string model_out;
    std::string confusion_out;
    std::uint64_t seed = default_seed();
    int trees = 100;
    int k = 5;
    int max_depth = -1;
    bool category4 = false;
    bool no_smote = false;
    bool force = false;
};

triage::LabelMode mode_of(bool category4) {
    return category4 ? triage::LabelMode::Category4 : triage::LabelMode::Family16;
}

std::unique_ptr<triage::Model> train_model(const triage::Dataset& train,
                                           const TrainOptions& opt) {
    triage::Hyperparams hp;
    hp.n_trees = opt.trees;
    hp.k_neighbors = opt.k;
    hp.max_depth = opt.max_depth;
    triage::LabelMode mode = mode_of(opt.category4);
    if (opt.model == "dt") return triage::train_decision_tree(train, hp, mode);
    if (opt.model == "rf") return triage::train_random_forest(train, hp, opt.seed, mode);
    if (opt.model == "knn") return triage::train_knn(train, hp, mode);
    if (opt.model == "gnb") return triage::train_gaussian_nb(train, hp, mode);
    throw Error(ErrorCode::SchemaMismatch, "unknown model " + opt.model);
}

int run_scan(const std::vector<std::string>& inputs, detector::DetectorConfig cfg, bool json) {
    std::vector<std::string> files;
    for (const std::string& p : inputs) {
        if (fs::is_directory(p)) {
            for (const auto& entry : fs::recursive_directory_iterator(p)) {
                if (entry.is_regular_file() && entry.path().extension() == ".dcm") {
                    files.push_back(entry.path().string());
                }
            }
        } else {
            files.push_back(p);
        }
    }
    std::sort(files.begin(), files.end());

    bool any_suspicious = false, any_polyglot = false;
    for (const std::string& f : files) {
        detector::ScanReport report = detector::scan_path(f, cfg);
        any_suspicious |= report.verdict == detector::Verdict::Suspicious;
        any_polyglot |= report.verdict == detector::Verdict::Polyglot;
        if (json) {
            std::cout << report.to_json() << "\n";
        } else {
            std::cout << detector::verdict_name(report.verdict) << "\t" << report.path
                      << "\tentropy=" << report.entropy_bits
                      << "\tevidence=" << report.evidence.size() << "\n";
        }
    }
    if (any_polyglot) return kExitPolyglot;
    if (any_suspicious) return kExitSuspicious;
    return kExitOk;
}

int run_train_or_eval(const TrainOptions& opt, const std::string& eval_model_path,
                      bool full_eval) {
    triage::LabelMode mode = mode_of(opt.category4);
    triage::Dataset data = triage::load_malmem_csv(opt.csv_path);
    auto [train, test] = triage::stratified_split(data, 0.8, opt.seed, mode);

    std::unique_ptr<triage::Model> model;
    std::string model_name;
    if (eval_model_path.empty()) {
        triage::Dataset balanced =
            opt.no_smote ? train : triage::smote_oversample(train, 5, opt.seed, mode);
        model = train_model(balanced, opt);
        model_name = opt.model;
    } else {
        std::vector<std::uint8_t> text = read_file(eval_model_path);
        model = triage::Model::from_json(std::string(text.begin(), text.end()));
        model_name = triage::model_kind_name(model->kind());
    }

    const triage::Dataset& eval_set = full_eval ? data : test;
    triage::Metrics metrics = triage::evaluate(*model, eval_set, mode);
    std::cout << metrics.to_json(model_name);

    if (!opt.model_out.empty()) write_text(opt.model_out, model->to_json(), opt.force);
    if (!opt.confusion_out.empty()) {
        write_text(opt.confusion_out, metrics.confusion_csv(), opt.force);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"DICOM/PE polyglot construction, detection, and memory-dump triage"};
    app.require_subcommand(1);

    // scan ------------------------------------------------------------------
    auto* scan = app.add_subcommand("scan", "scan .dcm files for injected payloads");
    std::vector<std::string> scan_paths;
    bool scan_json = false, scan_fast = false;
    detector::DetectorConfig det_cfg;
    scan->add_option("paths", scan_paths, "files or directories")->required();
    scan->add_flag("--json", scan_json, "one JSON report per line");
    scan->add_flag("--fast", scan_fast, "preamble-only constant-read scan");
    scan->add_option("--entropy-threshold", det_cfg.entropy_threshold,
                     "preamble entropy alarm level, bits/byte");

    // inject ----------------------------------------------------------------
    std::string inj_pe, inj_dicom, inj_out, inj_tag = "0009,1001";
    bool inj_force = false, inj_ack = false;
#ifdef MALDICOM_ENABLE_INJECT
    auto* inject = app.add_subcommand("inject", "embed a PE into a DICOM (research corpus use)");
    inject->add_option("pe", inj_pe, "input PE file")->required();
    inject->add_option("dicom", inj_dicom, "input DICOM file")->required();
    inject->add_option("out", inj_out, "output polyglot path")->required();
    inject->add_option("--payload-tag", inj_tag, "private tag GGGG,EEEE");
    inject->add_flag("--force", inj_force, "overwrite existing output");
    inject->add_flag("--i-understand-research-use", inj_ack,
                     "required acknowledgement that outputs are for detector testing");
#else
    (void)inj_pe; (void)inj_dicom; (void)inj_out; (void)inj_tag; (void)inj_force; (void)inj_ack;
#endif

    // extract ---------------------------------------------------------------
    auto* extract = app.add_subcommand("extract", "recover the PE from a polyglot + record");
    std::string ext_poly, ext_record, ext_out;
    bool ext_force = false;
    extract->add_option("polyglot", ext_poly)->required();
    extract->add_option("record", ext_record, "sidecar record JSON")->required();
    extract->add_option("out", ext_out, "recovered PE path")->required();
    extract->add_flag("--force", ext_force);

    // train / eval ----------------------------------------------------------
    TrainOptions topt;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", topt.seed, "global deterministic seed");
        cmd->add_flag("--category4", topt.category4, "4-class task instead of 16 families");
    };
    auto* train = app.add_subcommand("train", "train a classifier on a CIC-MalMem style CSV");
    train->add_option("csv", topt.csv_path)->required();
    train->add_option("--model", topt.model, "dt|rf|knn|gnb");
    train->add_option("--trees", topt.trees, "forest size");
    train->add_option("--k", topt.k, "KNN neighbor count");
    train->add_option("--max-depth", topt.max_depth, "tree depth cap, -1 = unlimited");
    train->add_option("--out", topt.model_out, "save the model JSON here");
    train->add_option("--confusion-out", topt.confusion_out, "confusion matrix CSV path");
    train->add_flag("--no-smote", topt.no_smote, "skip minority oversampling");
    train->add_flag("--force", topt.force);
    add_common(train);

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved model");
    std::string eval_model;
    bool eval_full = false;
    eval_cmd->add_option("model", eval_model, "model JSON path")->required();
    eval_cmd->add_option("csv", topt.csv_path)->required();
    eval_cmd->add_flag("--full", eval_full, "evaluate on the whole CSV, not the 20% holdout");
    add_common(eval_cmd);

    // explain ---------------------------------------------------------------
    auto* explain = app.add_subcommand("explain", "Shapley attribution for one CSV row");
    std::string exp_model;
    int exp_row = 0, exp_exact_features = 8, exp_permutations = 200, exp_background = 100;
    int exp_topk = 10;
    std::string exp_out;
    bool exp_sampled = false, exp_force = false, exp_cat4 = false;
    std::uint64_t exp_seed = default_seed();
    explain->add_option("model", exp_model)->required();
    explain->add_option("csv", topt.csv_path)->required();
    explain->add_option("--row", exp_row, "instance index to explain");
    explain->add_option("--exact-features", exp_exact_features,
                        "exact mode explains the top-N important features");
    explain->add_flag("--sampled", exp_sampled, "permutation sampling over all features");
    explain->add_option("--permutations", exp_permutations);
    explain->add_option("--background", exp_background, "background row count");
    explain->add_option("--top", exp_topk, "features printed");
    explain->add_option("--out", exp_out, "write the full Shapley CSV here");
    explain->add_option("--seed", exp_seed);
    explain->add_flag("--category4", exp_cat4);
    explain->add_flag("--force", exp_force);

    CLI11_PARSE(app, argc, argv);

    try {
        if (scan->parsed()) {
            det_cfg.deep_scan = !scan_fast;
            return run_scan(scan_paths, det_cfg, scan_json);
        }
#ifdef MALDICOM_ENABLE_INJECT
        if (inject->parsed()) {
            if (!inj_ack) {
                std::cerr << "inject requires --i-understand-research-use\n";
                return kExitError;
            }
            auto tag = dicom::tag_from_string(inj_tag);
            if (!tag) {
                std::cerr << "bad --payload-tag, expected GGGG,EEEE\n";
                return kExitError;
            }
            auto pe_bytes = read_file(inj_pe);
            auto dicom_bytes = read_file(inj_dicom);
            auto [poly, record] = polyglot::create_pe_dicom(pe_bytes, dicom_bytes, *tag);
            write_file(inj_out, poly, inj_force);
            write_text(inj_out + ".record.json", polyglot::record_to_json(record), inj_force);
            std::cout << polyglot::record_to_json(record);
            return kExitOk;
        }
#endif
        if (extract->parsed()) {
            auto poly = read_file(ext_poly);
            auto record_text = read_file(ext_record);
            polyglot::InjectionRecord record = polyglot::record_from_json(
                std::string(record_text.begin(), record_text.end()));
            auto recovered = polyglot::extract_pe(poly, record);
            write_file(ext_out, recovered, ext_force);
            if (record.stub_truncated_bytes > 0) {
                std::cout << "warning: " << record.stub_truncated_bytes
                          << " DOS stub bytes were lost to preamble truncation\n";
            }
            return kExitOk;
        }
        if (train->parsed()) {
            return run_train_or_eval(topt, "", false);
        }
        if (eval_cmd->parsed()) {
            return run_train_or_eval(topt, eval_model, eval_full);
        }
        if (explain->parsed()) {
            triage::LabelMode mode = mode_of(exp_cat4);
            auto model_text = read_file(exp_model);
            auto model =
                triage::Model::from_json(std::string(model_text.begin(), model_text.end()));
            triage::Dataset data = triage::load_malmem_csv(topt.csv_path);
            if (exp_row < 0 || static_cast<std::size_t>(exp_row) >= data.size()) {
                std::cerr << "row " << exp_row << " out of range\n";
                return kExitError;
            }
            auto [train_part, test_part] = triage::stratified_split(data, 0.8, exp_seed, mode);
            triage::Dataset background;
            background.feature_names = data.feature_names;
            {
                triage::Dataset shuffled = train_part;
                std::mt19937_64 rng(exp_seed);
                std::shuffle(shuffled.samples.begin(), shuffled.samples.end(), rng);
                std::size_t n = std::min<std::size_t>(
                    static_cast<std::size_t>(exp_background), shuffled.size());
                background.samples.assign(shuffled.samples.begin(),
                                          shuffled.samples.begin() + static_cast<std::ptrdiff_t>(n));
            }

            triage::ShapleyConfig cfg;
            cfg.seed = exp_seed;
            if (exp_sampled) {
                cfg.mode = triage::ShapleyConfig::Mode::Sampled;
                cfg.n_permutations = exp_permutations;
            } else {
                cfg.mode = triage::ShapleyConfig::Mode::Exact;
                cfg.feature_subset = triage::top_features_by_importance(
                    train_part, exp_exact_features, exp_seed, mode);
            }
            auto explanation =
                triage::shapley_values(*model, data.samples[static_cast<std::size_t>(exp_row)].x,
                                       background, cfg);
            std::string csv = triage::shapley_csv(explanation, data.feature_names);
            if (!exp_out.empty()) write_text(exp_out, csv, exp_force);

            auto ranking = triage::feature_ranking({explanation}, data.width());
            std::cout << "top features by |phi| for row " << exp_row << ":\n";
            int printed = 0;
            for (int f : ranking) {
                auto it = std::find(explanation.features.begin(), explanation.features.end(), f);
                if (it == explanation.features.end()) continue;
                std::size_t i =
                    static_cast<std::size_t>(it - explanation.features.begin());
                std::cout << "  " << data.feature_names[static_cast<std::size_t>(f)] << " = "
                          << explanation.phi[i] << "\n";
                if (++printed >= exp_topk) break;
            }
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
