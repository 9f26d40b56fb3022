#include "maldicom/models.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace maldicom::triage {

namespace {

constexpr int kModelFormatVersion = 1;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

struct TrainingView {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    std::vector<std::string> labels;
    std::size_t n_classes() const { return labels.size(); }
};

TrainingView make_view(const Dataset& d, LabelMode mode) {
    if (d.size() == 0) {
        throw Error(ErrorCode::DegenerateData, "empty dataset");
    }
    ClassIndex idx = build_class_index(d, mode);
    if (idx.labels.size() < 2) {
        throw Error(ErrorCode::DegenerateData, "training needs at least 2 classes");
    }
    TrainingView v;
    v.labels = idx.labels;
    v.y = idx.sample_class;
    v.x.reserve(d.size());
    for (const LabeledSample& s : d.samples) v.x.push_back(s.x);
    return v;
}

// ---------------------------------------------------------------------------
// CART

struct TreeNode {
    int feature = -1; // -1 = leaf
    double threshold = 0;
    int left = -1;
    int right = -1;
    std::vector<double> probs; // leaf only
};

struct Split {
    int feature = -1;
    double threshold = 0;
    double impurity_decrease = 0;
};

double gini_from_counts(const std::vector<double>& counts, double total) {
    if (total <= 0) return 0;
    double g = 1.0;
    for (double c : counts) {
        double p = c / total;
        g -= p * p;
    }
    return g;
}

class TreeBuilder {
public:
    TreeBuilder(const TrainingView& view, const Hyperparams& hp, std::mt19937_64* rng,
                int features_per_split, std::vector<double>* importances)
        : view_(view), hp_(hp), rng_(rng), features_per_split_(features_per_split),
          importances_(importances) {}

    std::vector<TreeNode> build(std::vector<std::size_t> indices) {
        nodes_.clear();
        grow(std::move(indices), 0);
        return std::move(nodes_);
    }

private:
    int grow(std::vector<std::size_t> indices, int depth) {
        std::vector<double> counts(view_.n_classes(), 0.0);
        for (std::size_t i : indices) counts[static_cast<std::size_t>(view_.y[i])] += 1.0;
        double total = static_cast<double>(indices.size());
        double impurity = gini_from_counts(counts, total);

        bool stop = impurity == 0.0 ||
                    indices.size() < static_cast<std::size_t>(hp_.min_samples_split) ||
                    (hp_.max_depth >= 0 && depth >= hp_.max_depth);
        Split best;
        if (!stop) best = find_best_split(indices, counts, impurity);
        if (stop || best.feature < 0) {
            TreeNode leaf;
            leaf.probs.resize(counts.size());
            for (std::size_t c = 0; c < counts.size(); ++c) leaf.probs[c] = counts[c] / total;
            nodes_.push_back(std::move(leaf));
            return static_cast<int>(nodes_.size()) - 1;
        }

        if (importances_) {
            (*importances_)[static_cast<std::size_t>(best.feature)] +=
                total * best.impurity_decrease;
        }

        std::vector<std::size_t> left, right;
        for (std::size_t i : indices) {
            (view_.x[i][static_cast<std::size_t>(best.feature)] <= best.threshold ? left : right)
                .push_back(i);
        }
        indices.clear();
        indices.shrink_to_fit();

        int node_id = static_cast<int>(nodes_.size());
        TreeNode node;
        node.feature = best.feature;
        node.threshold = best.threshold;
        nodes_.push_back(std::move(node));
        int l = grow(std::move(left), depth + 1);
        int r = grow(std::move(right), depth + 1);
        nodes_[static_cast<std::size_t>(node_id)].left = l;
        nodes_[static_cast<std::size_t>(node_id)].right = r;
        return node_id;
    }

    Split find_best_split(const std::vector<std::size_t>& indices,
                          const std::vector<double>& total_counts, double impurity) {
        std::size_t width = view_.x[0].size();
        std::vector<int> features(width);
        std::iota(features.begin(), features.end(), 0);
        if (rng_ && features_per_split_ > 0 &&
            static_cast<std::size_t>(features_per_split_) < width) {
            // Fisher-Yates prefix; candidate order stays deterministic per rng state.
            for (int i = 0; i < features_per_split_; ++i) {
                std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i),
                                                                width - 1);
                std::swap(features[static_cast<std::size_t>(i)], features[pick(*rng_)]);
            }
            features.resize(static_cast<std::size_t>(features_per_split_));
            std::sort(features.begin(), features.end());
        }

        double total = static_cast<double>(indices.size());
        Split best;
        std::vector<std::pair<double, int>> column(indices.size());
        std::vector<double> left_counts(view_.n_classes());
        for (int f : features) {
            for (std::size_t i = 0; i < indices.size(); ++i) {
                column[i] = {view_.x[indices[i]][static_cast<std::size_t>(f)],
                             view_.y[indices[i]]};
            }
            std::sort(column.begin(), column.end());
            if (column.front().first == column.back().first) continue;

            std::fill(left_counts.begin(), left_counts.end(), 0.0);
            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                left_counts[static_cast<std::size_t>(column[i].second)] += 1.0;
                if (column[i].first == column[i + 1].first) continue;
                double n_left = static_cast<double>(i + 1);
                double n_right = total - n_left;
                double g_left = gini_from_counts(left_counts, n_left);
                double right_counts_total = 0;
                double g_right = 1.0;
                {
                    double acc = 0;
                    for (std::size_t c = 0; c < left_counts.size(); ++c) {
                        double rc = total_counts[c] - left_counts[c];
                        acc += (rc / n_right) * (rc / n_right);
                        right_counts_total += rc;
                    }
                    g_right = 1.0 - acc;
                }
                (void)right_counts_total;
                double decrease = impurity - (n_left / total) * g_left - (n_right / total) * g_right;
                double threshold = 0.5 * (column[i].first + column[i + 1].first);
                if (decrease > best.impurity_decrease + 1e-15 ||
                    (std::abs(decrease - best.impurity_decrease) <= 1e-15 && best.feature >= 0 &&
                     (f < best.feature || (f == best.feature && threshold < best.threshold)))) {
                    best = {f, threshold, decrease};
                }
            }
        }
        if (best.impurity_decrease <= 1e-12) best.feature = -1;
        return best;
    }

    const TrainingView& view_;
    const Hyperparams& hp_;
    std::mt19937_64* rng_;
    int features_per_split_;
    std::vector<double>* importances_;
    std::vector<TreeNode> nodes_;
};

std::vector<double> tree_scores(const std::vector<TreeNode>& nodes,
                                std::span<const double> x) {
    int cur = 0;
    while (nodes[static_cast<std::size_t>(cur)].feature >= 0) {
        const TreeNode& n = nodes[static_cast<std::size_t>(cur)];
        cur = (x[static_cast<std::size_t>(n.feature)] <= n.threshold) ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(cur)].probs;
}

nlohmann::json nodes_to_json(const std::vector<TreeNode>& nodes) {
    nlohmann::json arr = nlohmann::json::array();
    for (const TreeNode& n : nodes) {
        arr.push_back({{"f", n.feature},
                       {"t", n.threshold},
                       {"l", n.left},
                       {"r", n.right},
                       {"p", n.probs}});
    }
    return arr;
}

std::vector<TreeNode> nodes_from_json(const nlohmann::json& arr) {
    std::vector<TreeNode> nodes;
    nodes.reserve(arr.size());
    for (const auto& j : arr) {
        TreeNode n;
        n.feature = j.at("f").get<int>();
        n.threshold = j.at("t").get<double>();
        n.left = j.at("l").get<int>();
        n.right = j.at("r").get<int>();
        n.probs = j.at("p").get<std::vector<double>>();
        nodes.push_back(std::move(n));
    }
    return nodes;
}

nlohmann::json model_envelope(const Model& m) {
    return {{"format_version", kModelFormatVersion},
            {"kind", model_kind_name(m.kind())},
            {"class_labels", m.class_labels()},
            {"width", m.width()}};
}

// ---------------------------------------------------------------------------

class DecisionTreeModel : public Model {
public:
    DecisionTreeModel(std::vector<std::string> labels, std::size_t width,
                      std::vector<TreeNode> nodes)
        : Model(ModelKind::DecisionTree, std::move(labels), width), nodes_(std::move(nodes)) {}

    std::vector<double> predict_scores(std::span<const double> x) const override {
        check_width(x);
        return tree_scores(nodes_, x);
    }

    std::string to_json() const override {
        nlohmann::json j = model_envelope(*this);
        j["nodes"] = nodes_to_json(nodes_);
        return j.dump();
    }

    const std::vector<TreeNode>& nodes() const { return nodes_; }

private:
    std::vector<TreeNode> nodes_;
};

class RandomForestModel : public Model {
public:
    RandomForestModel(std::vector<std::string> labels, std::size_t width,
                      std::vector<std::vector<TreeNode>> trees)
        : Model(ModelKind::RandomForest, std::move(labels), width), trees_(std::move(trees)) {}

    std::vector<double> predict_scores(std::span<const double> x) const override {
        check_width(x);
        std::vector<double> scores(class_labels_.size(), 0.0);
        for (const auto& t : trees_) {
            std::vector<double> s = tree_scores(t, x);
            for (std::size_t c = 0; c < scores.size(); ++c) scores[c] += s[c];
        }
        for (double& s : scores) s /= static_cast<double>(trees_.size());
        return scores;
    }

    std::string to_json() const override {
        nlohmann::json j = model_envelope(*this);
        nlohmann::json trees = nlohmann::json::array();
        for (const auto& t : trees_) trees.push_back(nodes_to_json(t));
        j["trees"] = std::move(trees);
        return j.dump();
    }

private:
    std::vector<std::vector<TreeNode>> trees_;
};

class KnnModel : public Model {
public:
    KnnModel(std::vector<std::string> labels, std::size_t width, int k,
             std::vector<double> mean, std::vector<double> scale,
             std::vector<std::vector<double>> x, std::vector<int> y)
        : Model(ModelKind::Knn, std::move(labels), width), k_(k), mean_(std::move(mean)),
          scale_(std::move(scale)), x_(std::move(x)), y_(std::move(y)) {}

    std::vector<double> predict_scores(std::span<const double> x) const override {
        check_width(x);
        std::vector<double> z(width_);
        for (std::size_t f = 0; f < width_; ++f) z[f] = (x[f] - mean_[f]) / scale_[f];

        std::vector<std::pair<double, std::size_t>> dist(x_.size());
        for (std::size_t i = 0; i < x_.size(); ++i) {
            double d = 0;
            for (std::size_t f = 0; f < width_; ++f) {
                double diff = z[f] - x_[i][f];
                d += diff * diff;
            }
            dist[i] = {d, i};
        }
        std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), dist.size());
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        std::vector<double> scores(class_labels_.size(), 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            scores[static_cast<std::size_t>(y_[dist[i].second])] += 1.0 / static_cast<double>(k);
        }
        return scores;
    }

    std::string to_json() const override {
        nlohmann::json j = model_envelope(*this);
        j["k"] = k_;
        j["mean"] = mean_;
        j["scale"] = scale_;
        j["x"] = x_;
        j["y"] = y_;
        return j.dump();
    }

private:
    int k_;
    std::vector<double> mean_, scale_;
    std::vector<std::vector<double>> x_; // standardized
    std::vector<int> y_;
};

class GaussianNbModel : public Model {
public:
    GaussianNbModel(std::vector<std::string> labels, std::size_t width,
                    std::vector<double> log_priors, std::vector<std::vector<double>> means,
                    std::vector<std::vector<double>> vars)
        : Model(ModelKind::GaussianNb, std::move(labels), width),
          log_priors_(std::move(log_priors)), means_(std::move(means)), vars_(std::move(vars)) {}

    std::vector<double> predict_scores(std::span<const double> x) const override {
        check_width(x);
        std::size_t n = class_labels_.size();
        std::vector<double> log_post(n);
        for (std::size_t c = 0; c < n; ++c) {
            double lp = log_priors_[c];
            for (std::size_t f = 0; f < width_; ++f) {
                double var = vars_[c][f];
                double diff = x[f] - means_[c][f];
                lp -= 0.5 * (std::log(2.0 * M_PI * var) + diff * diff / var);
            }
            log_post[c] = lp;
        }
        double mx = *std::max_element(log_post.begin(), log_post.end());
        double sum = 0;
        std::vector<double> scores(n);
        for (std::size_t c = 0; c < n; ++c) {
            scores[c] = std::exp(log_post[c] - mx);
            sum += scores[c];
        }
        for (double& s : scores) s /= sum;
        return scores;
    }

    std::string to_json() const override {
        nlohmann::json j = model_envelope(*this);
        j["log_priors"] = log_priors_;
        j["means"] = means_;
        j["vars"] = vars_;
        return j.dump();
    }

private:
    std::vector<double> log_priors_;
    std::vector<std::vector<double>> means_, vars_;
};

} // namespace

const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::DecisionTree: return "decision_tree";
        case ModelKind::RandomForest: return "random_forest";
        case ModelKind::Knn: return "knn";
        case ModelKind::GaussianNb: return "gaussian_nb";
    }
    return "unknown";
}

void Model::check_width(std::span<const double> x) const {
    if (x.size() != width_) {
        throw Error(ErrorCode::WidthMismatch,
                    "expected " + std::to_string(width_) + " features, got " +
                        std::to_string(x.size()));
    }
}

Prediction Model::predict(std::span<const double> x) const {
    std::vector<double> scores = predict_scores(x);
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c) {
        if (scores[c] > scores[best]) best = c; // ties keep the lowest class index
    }
    return {class_labels_[best], std::move(scores)};
}

std::unique_ptr<Model> train_decision_tree(const Dataset& d, const Hyperparams& hp,
                                           LabelMode mode) {
    TrainingView view = make_view(d, mode);
    std::vector<std::size_t> all(view.x.size());
    std::iota(all.begin(), all.end(), 0);
    TreeBuilder builder(view, hp, nullptr, -1, nullptr);
    return std::make_unique<DecisionTreeModel>(view.labels, view.x[0].size(),
                                               builder.build(std::move(all)));
}

std::unique_ptr<Model> train_random_forest(const Dataset& d, const Hyperparams& hp,
                                           std::uint64_t seed, LabelMode mode) {
    TrainingView view = make_view(d, mode);
    std::size_t width = view.x[0].size();
    int per_split = hp.features_per_split > 0
                        ? hp.features_per_split
                        : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(width))));

    std::vector<std::vector<TreeNode>> trees(static_cast<std::size_t>(hp.n_trees));
    auto build_tree = [&](std::size_t t) {
        // Per-tree seed derived from the master seed, not from scheduling order.
        std::mt19937_64 rng(splitmix64(seed ^ (t + 1)));
        std::uniform_int_distribution<std::size_t> pick(0, view.x.size() - 1);
        std::vector<std::size_t> bootstrap(view.x.size());
        for (std::size_t& i : bootstrap) i = pick(rng);
        TreeBuilder builder(view, hp, &rng, per_split, nullptr);
        trees[t] = builder.build(std::move(bootstrap));
    };

    unsigned n_workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<void>> futures;
    std::size_t n_trees = trees.size();
    for (unsigned w = 0; w < n_workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t t = w; t < n_trees; t += n_workers) build_tree(t);
        }));
    }
    for (auto& f : futures) f.get();

    return std::make_unique<RandomForestModel>(view.labels, width, std::move(trees));
}

std::unique_ptr<Model> train_knn(const Dataset& d, const Hyperparams& hp, LabelMode mode) {
    TrainingView view = make_view(d, mode);
    std::size_t width = view.x[0].size();
    std::vector<double> mean(width, 0.0), scale(width, 0.0);
    for (const auto& row : view.x) {
        for (std::size_t f = 0; f < width; ++f) mean[f] += row[f];
    }
    for (double& m : mean) m /= static_cast<double>(view.x.size());
    for (const auto& row : view.x) {
        for (std::size_t f = 0; f < width; ++f) {
            double diff = row[f] - mean[f];
            scale[f] += diff * diff;
        }
    }
    for (double& s : scale) {
        s = std::sqrt(s / static_cast<double>(view.x.size()));
        if (s < 1e-12) s = 1.0; // constant feature, leave centered
    }
    std::vector<std::vector<double>> z = view.x;
    for (auto& row : z) {
        for (std::size_t f = 0; f < width; ++f) row[f] = (row[f] - mean[f]) / scale[f];
    }
    return std::make_unique<KnnModel>(view.labels, width, hp.k_neighbors, std::move(mean),
                                      std::move(scale), std::move(z), std::move(view.y));
}

std::unique_ptr<Model> train_gaussian_nb(const Dataset& d, const Hyperparams& hp,
                                         LabelMode mode) {
    TrainingView view = make_view(d, mode);
    std::size_t width = view.x[0].size();
    std::size_t n_classes = view.n_classes();
    std::vector<double> counts(n_classes, 0.0);
    std::vector<std::vector<double>> means(n_classes, std::vector<double>(width, 0.0));
    std::vector<std::vector<double>> vars(n_classes, std::vector<double>(width, 0.0));

    for (std::size_t i = 0; i < view.x.size(); ++i) {
        std::size_t c = static_cast<std::size_t>(view.y[i]);
        counts[c] += 1.0;
        for (std::size_t f = 0; f < width; ++f) means[c][f] += view.x[i][f];
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
        for (std::size_t f = 0; f < width; ++f) means[c][f] /= counts[c];
    }
    for (std::size_t i = 0; i < view.x.size(); ++i) {
        std::size_t c = static_cast<std::size_t>(view.y[i]);
        for (std::size_t f = 0; f < width; ++f) {
            double diff = view.x[i][f] - means[c][f];
            vars[c][f] += diff * diff;
        }
    }
    std::vector<double> log_priors(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
        for (std::size_t f = 0; f < width; ++f) {
            vars[c][f] = std::max(vars[c][f] / counts[c], hp.variance_floor);
        }
        log_priors[c] = std::log(counts[c] / static_cast<double>(view.x.size()));
    }
    return std::make_unique<GaussianNbModel>(view.labels, width, std::move(log_priors),
                                             std::move(means), std::move(vars));
}

std::unique_ptr<Model> Model::from_json(const std::string& json) {
    nlohmann::json j = nlohmann::json::parse(json);
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
        throw Error(ErrorCode::SchemaMismatch, "unsupported model format version");
    }
    std::string kind = j.at("kind").get<std::string>();
    auto labels = j.at("class_labels").get<std::vector<std::string>>();
    std::size_t width = j.at("width").get<std::size_t>();

    if (kind == "decision_tree") {
        return std::make_unique<DecisionTreeModel>(std::move(labels), width,
                                                   nodes_from_json(j.at("nodes")));
    }
    if (kind == "random_forest") {
        std::vector<std::vector<TreeNode>> trees;
        for (const auto& t : j.at("trees")) trees.push_back(nodes_from_json(t));
        return std::make_unique<RandomForestModel>(std::move(labels), width, std::move(trees));
    }
    if (kind == "knn") {
        return std::make_unique<KnnModel>(
            std::move(labels), width, j.at("k").get<int>(),
            j.at("mean").get<std::vector<double>>(), j.at("scale").get<std::vector<double>>(),
            j.at("x").get<std::vector<std::vector<double>>>(),
            j.at("y").get<std::vector<int>>());
    }
    if (kind == "gaussian_nb") {
        return std::make_unique<GaussianNbModel>(
            std::move(labels), width, j.at("log_priors").get<std::vector<double>>(),
            j.at("means").get<std::vector<std::vector<double>>>(),
            j.at("vars").get<std::vector<std::vector<double>>>());
    }
    throw Error(ErrorCode::SchemaMismatch, "unknown model kind " + kind);
}

Metrics evaluate(const Model& m, const Dataset& test, LabelMode mode) {
    Metrics out;
    out.labels = m.class_labels();
    auto label_index = [&](const std::string& l) -> std::size_t {
        for (std::size_t i = 0; i < out.labels.size(); ++i) {
            if (out.labels[i] == l) return i;
        }
        out.labels.push_back(l);
        return out.labels.size() - 1;
    };

    std::vector<std::pair<std::size_t, std::size_t>> pairs; // (true, predicted)
    pairs.reserve(test.size());
    for (const LabeledSample& s : test.samples) {
        std::size_t truth = label_index(Dataset::class_label(s, mode));
        std::size_t pred = label_index(m.predict(s.x).label);
        pairs.emplace_back(truth, pred);
    }

    std::size_t n = out.labels.size();
    out.confusion.assign(n, std::vector<std::int64_t>(n, 0));
    for (auto [t, p] : pairs) ++out.confusion[t][p];

    std::int64_t correct = 0, total = static_cast<std::int64_t>(pairs.size());
    std::vector<std::int64_t> tp(n, 0), fp(n, 0), fn(n, 0);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t p = 0; p < n; ++p) {
            std::int64_t c = out.confusion[t][p];
            if (t == p) {
                correct += c;
                tp[t] += c;
            } else {
                fn[t] += c;
                fp[p] += c;
            }
        }
    }
    out.accuracy = total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    out.per_class_f1.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        double prec = (tp[c] + fp[c]) > 0
                          ? static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fp[c])
                          : 0.0;
        double rec = (tp[c] + fn[c]) > 0
                         ? static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fn[c])
                         : 0.0;
        double f1 = (prec + rec) > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
        out.precision_macro += prec;
        out.recall_macro += rec;
        out.f1_macro += f1;
        out.per_class_f1[c] = f1;
    }
    out.precision_macro /= static_cast<double>(n);
    out.recall_macro /= static_cast<double>(n);
    out.f1_macro /= static_cast<double>(n);
    return out;
}

std::string Metrics::to_json(const std::string& model_name) const {
    nlohmann::json per_class = nlohmann::json::object();
    for (std::size_t c = 0; c < labels.size(); ++c) per_class[labels[c]] = per_class_f1[c];
    nlohmann::json j{
        {"model", model_name},
        {"accuracy", accuracy},
        {"precision_macro", precision_macro},
        {"recall_macro", recall_macro},
        {"f1_macro", f1_macro},
        {"per_class", per_class},
    };
    return j.dump(2) + "\n";
}

std::string Metrics::confusion_csv() const {
    std::ostringstream out;
    out << "true\\predicted";
    for (const std::string& l : labels) out << "," << l;
    out << "\n";
    for (std::size_t t = 0; t < labels.size(); ++t) {
        out << labels[t];
        for (std::size_t p = 0; p < labels.size(); ++p) out << "," << confusion[t][p];
        out << "\n";
    }
    return out.str();
}

std::vector<BenchmarkResult> benchmark_inference(const std::vector<const Model*>& models,
                                                 const Dataset& test) {
    std::vector<BenchmarkResult> out;
    for (const Model* m : models) {
        std::vector<double> times;
        for (int rep = 0; rep < 5; ++rep) {
            auto start = std::chrono::steady_clock::now();
            for (const LabeledSample& s : test.samples) {
                volatile double sink = m->predict_scores(s.x)[0];
                (void)sink;
            }
            auto end = std::chrono::steady_clock::now();
            times.push_back(std::chrono::duration<double, std::milli>(end - start).count());
        }
        std::sort(times.begin(), times.end());
        out.push_back({model_kind_name(m->kind()), times[times.size() / 2]});
    }
    return out;
}

std::vector<double> forest_feature_importances(const Dataset& d, const Hyperparams& hp,
                                               std::uint64_t seed, LabelMode mode) {
    TrainingView view = make_view(d, mode);
    std::size_t width = view.x[0].size();
    int per_split = hp.features_per_split > 0
                        ? hp.features_per_split
                        : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(width))));
    std::vector<double> importances(width, 0.0);
    for (std::size_t t = 0; t < static_cast<std::size_t>(hp.n_trees); ++t) {
        std::mt19937_64 rng(splitmix64(seed ^ (t + 1)));
        std::uniform_int_distribution<std::size_t> pick(0, view.x.size() - 1);
        std::vector<std::size_t> bootstrap(view.x.size());
        for (std::size_t& i : bootstrap) i = pick(rng);
        TreeBuilder builder(view, hp, &rng, per_split, &importances);
        builder.build(std::move(bootstrap));
    }
    return importances;
}

} // namespace maldicom::triage
