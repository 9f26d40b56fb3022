#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "maldicom/dataset.hpp"

namespace maldicom::triage {

enum class ModelKind { DecisionTree, RandomForest, Knn, GaussianNb };

const char* model_kind_name(ModelKind k);

struct Hyperparams {
    int max_depth = -1;        // -1 = unlimited
    int min_samples_split = 2;
    int n_trees = 100;
    int features_per_split = -1; // -1 = ceil(sqrt(width))
    int k_neighbors = 5;
    double variance_floor = 1e-9;
};

struct Prediction {
    std::string label;
    std::vector<double> scores; // per class, sums to 1
};

class Model {
public:
    virtual ~Model() = default;

    ModelKind kind() const { return kind_; }
    const std::vector<std::string>& class_labels() const { return class_labels_; }
    std::size_t width() const { return width_; }

    // Per-class scores for one instance; order matches class_labels().
    virtual std::vector<double> predict_scores(std::span<const double> x) const = 0;

    Prediction predict(std::span<const double> x) const;

    virtual std::string to_json() const = 0;
    static std::unique_ptr<Model> from_json(const std::string& json);

protected:
    Model(ModelKind kind, std::vector<std::string> labels, std::size_t width)
        : kind_(kind), class_labels_(std::move(labels)), width_(width) {}

    void check_width(std::span<const double> x) const;

    ModelKind kind_;
    std::vector<std::string> class_labels_;
    std::size_t width_;
};

// CART with Gini impurity, deterministic splits.
std::unique_ptr<Model> train_decision_tree(const Dataset& d, const Hyperparams& hp,
                                           LabelMode mode = LabelMode::Family16);

// Bagged CART trees with per-split random feature subsets; per-tree seeds are
// derived from the master seed, so results do not depend on scheduling.
std::unique_ptr<Model> train_random_forest(const Dataset& d, const Hyperparams& hp,
                                           std::uint64_t seed,
                                           LabelMode mode = LabelMode::Family16);

// Stores the z-scored training set; votes among the k nearest neighbors.
std::unique_ptr<Model> train_knn(const Dataset& d, const Hyperparams& hp,
                                 LabelMode mode = LabelMode::Family16);

// Per-class feature means and variances with a variance floor.
std::unique_ptr<Model> train_gaussian_nb(const Dataset& d, const Hyperparams& hp = {},
                                         LabelMode mode = LabelMode::Family16);

struct Metrics {
    double accuracy = 0;
    double precision_macro = 0;
    double recall_macro = 0;
    double f1_macro = 0;
    std::vector<std::string> labels;
    std::vector<double> per_class_f1;
    std::vector<std::vector<std::int64_t>> confusion; // [true][predicted]

    std::string to_json(const std::string& model_name) const;
    std::string confusion_csv() const;
};

Metrics evaluate(const Model& m, const Dataset& test, LabelMode mode = LabelMode::Family16);

struct BenchmarkResult {
    std::string model_name;
    double millis = 0; // median of 5 full-test-set passes
};

std::vector<BenchmarkResult> benchmark_inference(
    const std::vector<const Model*>& models, const Dataset& test);

// Total Gini decrease per feature over a bagged forest; feeds the
// exact-Shapley feature subset selection.
std::vector<double> forest_feature_importances(const Dataset& d, const Hyperparams& hp,
                                               std::uint64_t seed,
                                               LabelMode mode = LabelMode::Family16);

} // namespace maldicom::triage
