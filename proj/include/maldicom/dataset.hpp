#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maldicom/errors.hpp"

namespace maldicom::triage {

enum class Category { Benign, Ransomware, Spyware, Trojan };

const char* category_name(Category c);
Category category_from_token(const std::string& token); // throws UnknownCategoryToken

struct LabeledSample {
    std::vector<double> x;
    Category category = Category::Benign;
    std::string family; // empty for Benign
};

enum class LabelMode {
    Family16,  // Benign + one class per malware family
    Category4, // Benign / Ransomware / Spyware / Trojan
};

struct Dataset {
    std::vector<std::string> feature_names;
    std::vector<LabeledSample> samples;

    std::size_t width() const { return feature_names.size(); }
    std::size_t size() const { return samples.size(); }

    // Class label of a sample under the given mode, e.g. "Trojan-Refroso".
    static std::string class_label(const LabeledSample& s, LabelMode mode);
};

// Distinct class labels in first-appearance-sorted order plus per-sample indices.
struct ClassIndex {
    std::vector<std::string> labels;       // sorted
    std::vector<int> sample_class;         // parallel to dataset samples
};

ClassIndex build_class_index(const Dataset& d, LabelMode mode);

// CIC-MalMem-2022 style CSV: header row, numeric feature columns, a Category
// column holding "Class-Family-hash" strings ("Benign" rows get empty family).
// A trailing non-numeric "Class" column, if present, is ignored.
Dataset load_malmem_csv(const std::string& path);

// Balances every class up to the majority count. Synthetics lie on segments
// between a minority point and one of its k nearest same-class neighbors
// (Euclidean). Deterministic for a fixed seed. Throws Error{ClassTooSmall}.
Dataset smote_oversample(const Dataset& d, int k, std::uint64_t seed,
                         LabelMode mode = LabelMode::Family16);

// Deterministic stratified split; fraction is the training share.
std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double train_fraction,
                                             std::uint64_t seed,
                                             LabelMode mode = LabelMode::Family16);

} // namespace maldicom::triage
