#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "maldicom/models.hpp"

namespace maldicom::triage {

// Exact coalition enumeration is capped at 2^15 subsets.
inline constexpr int kMaxExactFeatures = 15;

struct ShapleyExplanation {
    std::vector<double> phi;  // per explained feature
    double base_value = 0;    // empty-coalition marginal (background mean score)
    double fx = 0;            // full-coalition marginal
    std::vector<int> features; // indices explained, parallel to phi
};

struct ShapleyConfig {
    enum class Mode { Exact, Sampled };
    Mode mode = Mode::Exact;
    int n_permutations = 2048;   // Sampled mode
    std::uint64_t seed = 42;
    std::vector<int> feature_subset; // empty = all features
    int target_class = -1;           // -1 = model's predicted class at x
};

// Mean over background rows of the target-class score with coalition features
// taken from x and the rest from the background row. Throws Error{EmptyBackground}.
double marginal_prediction(const Model& m, std::span<const double> x,
                           std::span<const int> coalition, const Dataset& background,
                           int target_class);

// Exact mode: full coalition sum with |C|!(N-|C|-1)!/N! weights over
// marginal_prediction. Sampled mode: permutation estimator, deterministic per
// seed. Efficiency holds: sum(phi) + base_value == fx within 1e-9.
ShapleyExplanation shapley_values(const Model& m, std::span<const double> x,
                                  const Dataset& background, const ShapleyConfig& cfg);

// Feature indices ordered by descending mean |phi|; ties broken by index.
std::vector<int> feature_ranking(const std::vector<ShapleyExplanation>& explanations,
                                 std::size_t n_features);

// Impurity-based importances from a forest, used to pick the exact-mode subset.
std::vector<int> top_features_by_importance(const Dataset& d, int top_k,
                                            std::uint64_t seed,
                                            LabelMode mode = LabelMode::Family16);

std::string shapley_csv(const ShapleyExplanation& e,
                        const std::vector<std::string>& feature_names);

} // namespace maldicom::triage
