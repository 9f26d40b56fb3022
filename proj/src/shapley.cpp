#include "maldicom/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace maldicom::triage {

namespace {

int resolve_target_class(const Model& m, std::span<const double> x, int requested) {
    if (requested >= 0) return requested;
    std::vector<double> scores = m.predict_scores(x);
    return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

std::vector<int> resolve_features(const Model& m, const ShapleyConfig& cfg) {
    if (!cfg.feature_subset.empty()) return cfg.feature_subset;
    std::vector<int> all(m.width());
    std::iota(all.begin(), all.end(), 0);
    return all;
}

// Mean target-class score over background rows with `mask` of the explained
// features taken from x. Features outside the explained subset always come
// from the background row.
double subset_marginal(const Model& m, std::span<const double> x,
                       const std::vector<int>& features, const std::vector<char>& included,
                       const Dataset& background, int target_class) {
    double sum = 0;
    std::vector<double> hybrid;
    for (const LabeledSample& row : background.samples) {
        hybrid = row.x;
        for (std::size_t i = 0; i < features.size(); ++i) {
            if (included[i]) {
                hybrid[static_cast<std::size_t>(features[i])] =
                    x[static_cast<std::size_t>(features[i])];
            }
        }
        sum += m.predict_scores(hybrid)[static_cast<std::size_t>(target_class)];
    }
    return sum / static_cast<double>(background.size());
}

double masked_marginal(const Model& m, std::span<const double> x,
                       const std::vector<int>& features, std::uint32_t mask,
                       const Dataset& background, int target_class) {
    std::vector<char> included(features.size(), 0);
    for (std::size_t i = 0; i < features.size(); ++i) included[i] = (mask >> i) & 1u;
    return subset_marginal(m, x, features, included, background, target_class);
}

} // namespace

double marginal_prediction(const Model& m, std::span<const double> x,
                           std::span<const int> coalition, const Dataset& background,
                           int target_class) {
    if (background.size() == 0) {
        throw Error(ErrorCode::EmptyBackground, "marginalization needs background rows");
    }
    double sum = 0;
    std::vector<double> hybrid;
    for (const LabeledSample& row : background.samples) {
        hybrid = row.x;
        for (int f : coalition) hybrid[static_cast<std::size_t>(f)] = x[static_cast<std::size_t>(f)];
        sum += m.predict_scores(hybrid)[static_cast<std::size_t>(target_class)];
    }
    return sum / static_cast<double>(background.size());
}

ShapleyExplanation shapley_values(const Model& m, std::span<const double> x,
                                  const Dataset& background, const ShapleyConfig& cfg) {
    if (background.size() == 0) {
        throw Error(ErrorCode::EmptyBackground, "explanation needs background rows");
    }
    std::vector<int> features = resolve_features(m, cfg);
    int target = resolve_target_class(m, x, cfg.target_class);
    std::size_t n = features.size();

    ShapleyExplanation out;
    out.features = features;
    out.phi.assign(n, 0.0);

    if (cfg.mode == ShapleyConfig::Mode::Exact) {
        if (n > static_cast<std::size_t>(kMaxExactFeatures)) {
            throw Error(ErrorCode::TooManyFeaturesForExact,
                        std::to_string(n) + " features; exact mode caps at " +
                            std::to_string(kMaxExactFeatures));
        }
        std::uint32_t full = (1u << n) - 1u;

        // One marginal per coalition; phi assembled from the cached table.
        std::vector<double> v(full + 1u);
        for (std::uint32_t mask = 0; mask <= full; ++mask) {
            v[mask] = masked_marginal(m, x, features, mask, background, target);
        }

        std::vector<double> factorial(n + 1, 1.0);
        for (std::size_t i = 1; i <= n; ++i) {
            factorial[i] = factorial[i - 1] * static_cast<double>(i);
        }
        double n_fact = factorial[n];
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t bit = 1u << i;
            double phi = 0;
            for (std::uint32_t mask = 0; mask <= full; ++mask) {
                if (mask & bit) continue;
                int s = std::popcount(mask);
                double weight =
                    factorial[static_cast<std::size_t>(s)] * factorial[n - static_cast<std::size_t>(s) - 1] / n_fact;
                phi += weight * (v[mask | bit] - v[mask]);
            }
            out.phi[i] = phi;
        }
        out.base_value = v[0];
        out.fx = v[full];
        return out;
    }

    // Permutation estimator: walk each random order, attributing the marginal
    // gain of adding a feature to that feature. Telescoping keeps efficiency
    // exact for any permutation count.
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<char> included(n, 0);
    out.base_value = subset_marginal(m, x, features, included, background, target);
    std::fill(included.begin(), included.end(), 1);
    out.fx = subset_marginal(m, x, features, included, background, target);

    for (int p = 0; p < cfg.n_permutations; ++p) {
        std::shuffle(order.begin(), order.end(), rng);
        std::fill(included.begin(), included.end(), 0);
        double prev = out.base_value;
        for (std::size_t step = 0; step < n; ++step) {
            included[order[step]] = 1;
            double cur = (step + 1 == n)
                             ? out.fx
                             : subset_marginal(m, x, features, included, background, target);
            out.phi[order[step]] += cur - prev;
            prev = cur;
        }
    }
    for (double& phi : out.phi) phi /= static_cast<double>(cfg.n_permutations);
    return out;
}

std::vector<int> feature_ranking(const std::vector<ShapleyExplanation>& explanations,
                                 std::size_t n_features) {
    std::vector<double> mean_abs(n_features, 0.0);
    std::vector<double> counts(n_features, 0.0);
    for (const ShapleyExplanation& e : explanations) {
        for (std::size_t i = 0; i < e.features.size(); ++i) {
            std::size_t f = static_cast<std::size_t>(e.features[i]);
            mean_abs[f] += std::abs(e.phi[i]);
            counts[f] += 1.0;
        }
    }
    for (std::size_t f = 0; f < n_features; ++f) {
        if (counts[f] > 0) mean_abs[f] /= counts[f];
    }
    std::vector<int> order(n_features);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (mean_abs[static_cast<std::size_t>(a)] != mean_abs[static_cast<std::size_t>(b)]) {
            return mean_abs[static_cast<std::size_t>(a)] > mean_abs[static_cast<std::size_t>(b)];
        }
        return a < b;
    });
    return order;
}

std::vector<int> top_features_by_importance(const Dataset& d, int top_k, std::uint64_t seed,
                                            LabelMode mode) {
    Hyperparams hp;
    hp.n_trees = 20;
    std::vector<double> imp = forest_feature_importances(d, hp, seed, mode);
    std::vector<int> order(imp.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (imp[static_cast<std::size_t>(a)] != imp[static_cast<std::size_t>(b)]) {
            return imp[static_cast<std::size_t>(a)] > imp[static_cast<std::size_t>(b)];
        }
        return a < b;
    });
    order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(top_k)));
    std::sort(order.begin(), order.end());
    return order;
}

std::string shapley_csv(const ShapleyExplanation& e,
                        const std::vector<std::string>& feature_names) {
    std::ostringstream out;
    out << "feature,phi\n";
    out.setf(std::ios::fmtflags(0), std::ios::floatfield);
    out.precision(17);
    for (std::size_t i = 0; i < e.features.size(); ++i) {
        std::size_t f = static_cast<std::size_t>(e.features[i]);
        out << (f < feature_names.size() ? feature_names[f] : "f" + std::to_string(f)) << ","
            << e.phi[i] << "\n";
    }
    out << "__base_value__," << e.base_value << "\n";
    out << "__fx__," << e.fx << "\n";
    return out.str();
}

} // namespace maldicom::triage
