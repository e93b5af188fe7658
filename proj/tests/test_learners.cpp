#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "chartml/error.hpp"
#include "chartml/learners.hpp"
#include "support/oracles.hpp"

using namespace chartml;
using learn::ForestParams;
using learn::GbtParams;
using learn::KnnParams;
using learn::LearnerSpec;
using learn::LogRegParams;

namespace {

std::vector<std::string> column_names(std::size_t p) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < p; ++j) names.push_back("f" + std::to_string(j));
    return names;
}

struct Instance {
    Matrix x;
    std::vector<int> y;
    int k;
};

Instance random_instance(std::mt19937_64& rng, std::size_t n, std::size_t p, int k) {
    Instance inst;
    inst.x = Matrix(n, p);
    inst.y.resize(n);
    inst.k = k;
    std::normal_distribution<double> dist(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) inst.x(i, j) = dist(rng);
        inst.y[i] = static_cast<int>(rng() % static_cast<std::size_t>(k));
    }
    return inst;
}

// three well-separated Gaussian blobs
Instance blob_instance(std::mt19937_64& rng, std::size_t n_per_class, std::size_t p, double gap) {
    Instance inst;
    inst.k = 3;
    inst.x = Matrix(3 * n_per_class, p);
    inst.y.resize(3 * n_per_class);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < n_per_class; ++i) {
            std::size_t r = static_cast<std::size_t>(c) * n_per_class + i;
            for (std::size_t j = 0; j < p; ++j) {
                inst.x(r, j) = noise(rng) + (j % 3 == static_cast<std::size_t>(c) ? gap : 0.0);
            }
            inst.y[r] = c;
        }
    }
    return inst;
}

}  // namespace

TEST_CASE("logreg analytic gradient matches central finite differences") {
    std::mt19937_64 rng(17);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        std::size_t n = 4 + rng() % 12;
        std::size_t p = 1 + rng() % 4;
        int k = 2 + static_cast<int>(rng() % 2);
        auto inst = random_instance(rng, n, p, k);
        Matrix w(static_cast<std::size_t>(k), p);
        std::vector<double> b(static_cast<std::size_t>(k));
        std::normal_distribution<double> dist(0.0, 0.5);
        for (auto& v : w.data()) v = dist(rng);
        for (auto& v : b) v = dist(rng);
        double lambda = 1e-3;

        Matrix grad_w;
        std::vector<double> grad_b;
        learn::logreg_gradient(w, b, inst.x, inst.y, lambda, grad_w, grad_b);

        const double h = 1e-5;
        auto fd_check = [&](double analytic, double& slot) {
            double saved = slot;
            slot = saved + h;
            double up = learn::logreg_loss(w, b, inst.x, inst.y, lambda);
            slot = saved - h;
            double down = learn::logreg_loss(w, b, inst.x, inst.y, lambda);
            slot = saved;
            double fd = (up - down) / (2.0 * h);
            double rel = std::fabs(analytic - fd) / std::max(1.0, std::fabs(fd));
            worst = std::max(worst, rel);
        };
        for (std::size_t i = 0; i < w.data().size(); ++i) fd_check(grad_w.data()[i], w.data()[i]);
        for (std::size_t c = 0; c < b.size(); ++c) fd_check(grad_b[c], b[c]);
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("zero-iteration logreg predicts uniform probabilities") {
    std::mt19937_64 rng(5);
    auto inst = random_instance(rng, 9, 3, 3);
    LogRegParams params;
    params.max_iters = 0;
    auto model = learn::train(params, inst.x, inst.y, 3, column_names(3));
    auto proba = learn::predict_proba(model, inst.x);
    for (std::size_t i = 0; i < proba.rows(); ++i) {
        for (std::size_t c = 0; c < 3; ++c) CHECK(proba(i, c) == doctest::Approx(1.0 / 3.0));
    }
    auto labels = learn::predict(model, inst.x);
    for (int label : labels) CHECK(label == 0);  // uniform tie -> lowest ordinal
}

TEST_CASE("logreg learns separable blobs") {
    std::mt19937_64 rng(6);
    auto inst = blob_instance(rng, 30, 6, 4.0);
    auto model = learn::train(LogRegParams{}, inst.x, inst.y, 3, column_names(6));
    auto labels = learn::predict(model, inst.x);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        correct += labels[i] == inst.y[i] ? 1 : 0;
    }
    CHECK(static_cast<double>(correct) / static_cast<double>(labels.size()) > 0.95);
}

TEST_CASE("knn k=1 recalls its own training points") {
    std::mt19937_64 rng(8);
    auto inst = random_instance(rng, 12, 3, 3);
    KnnParams params;
    params.k = 1;
    auto model = learn::train(params, inst.x, inst.y, 3, column_names(3));
    auto proba = learn::predict_proba(model, inst.x);
    for (std::size_t i = 0; i < inst.x.rows(); ++i) {
        CHECK(proba(i, static_cast<std::size_t>(inst.y[i])) == doctest::Approx(1.0));
    }
}

TEST_CASE("knn k=3 matches a brute-force distance sort on a hand-built set") {
    Matrix x(5, 2);
    double coords[5][2] = {{0, 0}, {1, 0}, {2, 0}, {5, 5}, {5, 6}};
    std::vector<int> y{0, 0, 1, 1, 1};
    for (std::size_t i = 0; i < 5; ++i) {
        x(i, 0) = coords[i][0];
        x(i, 1) = coords[i][1];
    }
    KnnParams params;
    params.k = 3;
    auto model = learn::train(params, x, y, 2, column_names(2));

    Matrix query(1, 2);
    query(0, 0) = 0.6;
    query(0, 1) = 0.1;
    // brute force: sort all 5 training points by distance, vote top 3
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t i = 0; i < 5; ++i) {
        double dx = query(0, 0) - x(i, 0);
        double dy = query(0, 1) - x(i, 1);
        dist.push_back({dx * dx + dy * dy, i});
    }
    std::sort(dist.begin(), dist.end());
    std::array<int, 2> votes{};
    for (int j = 0; j < 3; ++j) ++votes[static_cast<std::size_t>(y[dist[j].second])];
    int expected = votes[1] > votes[0] ? 1 : 0;

    CHECK(learn::predict(model, query)[0] == expected);
    auto proba = learn::predict_proba(model, query);
    CHECK(proba(0, 0) == doctest::Approx(votes[0] / 3.0));
}

TEST_CASE("knn validates k against the training size") {
    std::mt19937_64 rng(4);
    auto inst = random_instance(rng, 5, 2, 2);
    KnnParams params;
    params.k = 6;
    CHECK_THROWS_AS(learn::train(params, inst.x, inst.y, 2, column_names(2)), ValueError);
}

TEST_CASE("single-tree forest without bootstrap fits a separable set exactly") {
    Matrix x(6, 2);
    double coords[6][2] = {{0, 0}, {0.5, 1}, {3, 3}, {3.5, 2.5}, {7, 0}, {7.5, 0.5}};
    std::vector<int> y{0, 0, 1, 1, 2, 2};
    for (std::size_t i = 0; i < 6; ++i) {
        x(i, 0) = coords[i][0];
        x(i, 1) = coords[i][1];
    }
    ForestParams params;
    params.n_estimators = 1;
    params.bootstrap = false;
    params.features_per_split = 2;  // consider every feature
    params.seed = 123;
    auto model = learn::train(params, x, y, 3, column_names(2));
    auto labels = learn::predict(model, x);
    for (std::size_t i = 0; i < 6; ++i) CHECK(labels[i] == y[i]);

    // and the tree agrees with the exhaustive oracle
    testsupport::OracleCart oracle(x, y, 3, std::nullopt, 2);
    for (std::size_t i = 0; i < 6; ++i) CHECK(labels[i] == oracle.predict(x.row(i)));
}

TEST_CASE("forest probability rows are normalized and ties go low") {
    std::mt19937_64 rng(10);
    auto inst = blob_instance(rng, 20, 4, 3.0);
    ForestParams params;
    params.n_estimators = 25;
    params.seed = 7;
    auto model = learn::train(params, inst.x, inst.y, 3, column_names(4));
    auto proba = learn::predict_proba(model, inst.x);
    auto labels = learn::predict(model, inst.x);
    for (std::size_t i = 0; i < proba.rows(); ++i) {
        double total = 0.0;
        for (std::size_t c = 0; c < proba.cols(); ++c) total += proba(i, c);
        CHECK(std::fabs(total - 1.0) < 1e-9);
        // argmax with lowest-ordinal ties
        int best = 0;
        for (int c = 1; c < 3; ++c) {
            if (proba(i, static_cast<std::size_t>(c)) > proba(i, static_cast<std::size_t>(best))) {
                best = c;
            }
        }
        CHECK(labels[i] == best);
    }
}

TEST_CASE("a two-tree vote tie resolves to the lower class ordinal") {
    // two stumps voting for opposite classes -> 0.5/0.5 everywhere
    learn::TrainedModel model;
    model.n_classes = 2;
    model.column_names = {"f0"};
    learn::ForestModel forest;
    forest.params.n_estimators = 2;
    learn::Tree for_zero;
    for_zero.nodes.push_back({-1, 0.0, -1, -1, 0.0, 4, {1.0, 0.0}});
    learn::Tree for_one;
    for_one.nodes.push_back({-1, 0.0, -1, -1, 0.0, 4, {0.0, 1.0}});
    forest.trees = {for_zero, for_one};
    model.model = std::move(forest);

    Matrix x(3, 1);
    x(0, 0) = -1.0;
    x(1, 0) = 0.0;
    x(2, 0) = 5.0;
    auto proba = learn::predict_proba(model, x);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(proba(i, 0) == doctest::Approx(0.5));
        CHECK(learn::predict(model, x)[i] == 0);
    }
}

TEST_CASE("gbt with eta 0 predicts the class priors everywhere") {
    std::mt19937_64 rng(11);
    auto inst = random_instance(rng, 30, 3, 3);
    GbtParams params;
    params.n_rounds = 10;
    params.learning_rate_eta = 0.0;
    auto model = learn::train(params, inst.x, inst.y, 3, column_names(3));
    auto proba = learn::predict_proba(model, inst.x);
    std::array<double, 3> prior{};
    for (int label : inst.y) prior[static_cast<std::size_t>(label)] += 1.0 / 30.0;
    for (std::size_t i = 0; i < proba.rows(); ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            CHECK(proba(i, c) == doctest::Approx(prior[c]).epsilon(1e-9));
        }
    }
}

TEST_CASE("gbt training loss is non-increasing") {
    std::mt19937_64 rng(12);
    for (double eta : {0.1, 0.5, 1.0}) {
        for (int rep = 0; rep < 8; ++rep) {
            std::size_t n = 10 + rng() % 40;
            auto inst = random_instance(rng, n, 3, 2 + static_cast<int>(rng() % 2));
            GbtParams params;
            params.n_rounds = 30;
            params.learning_rate_eta = eta;
            params.max_depth = 3;
            std::vector<double> trace;
            learn::train_gbt(params, inst.x, inst.y, inst.k, &trace);
            REQUIRE(trace.size() == 31);
            for (std::size_t r = 1; r < trace.size(); ++r) {
                CHECK(trace[r] <= trace[r - 1] + 1e-12);
            }
        }
    }
}

TEST_CASE("gbt fits separable blobs to high training accuracy") {
    std::mt19937_64 rng(13);
    auto inst = blob_instance(rng, 25, 6, 3.0);
    GbtParams params;
    params.n_rounds = 40;
    auto model = learn::train(params, inst.x, inst.y, 3, column_names(6));
    auto labels = learn::predict(model, inst.x);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) correct += labels[i] == inst.y[i] ? 1 : 0;
    CHECK(static_cast<double>(correct) / static_cast<double>(labels.size()) > 0.95);
}

TEST_CASE("feature importance ranks the determining column first") {
    std::mt19937_64 rng(14);
    std::size_t n = 200;
    Matrix x(n, 4);
    std::vector<int> y(n);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 4; ++j) x(i, j) = noise(rng);
        y[i] = x(i, 0) > 0.0 ? 1 : 0;  // column 0 alone determines y
    }
    for (const LearnerSpec& spec :
         {LearnerSpec(ForestParams{.n_estimators = 20, .seed = 3}),
          LearnerSpec(GbtParams{.n_rounds = 20, .seed = 3})}) {
        auto model = learn::train(spec, x, y, 2, column_names(4));
        auto ranked = learn::feature_importance(model);
        REQUIRE(ranked.size() == 4);
        CHECK(ranked[0].first == "f0");
        double total = 0.0;
        for (const auto& [name, value] : ranked) {
            CHECK(value >= 0.0);
            total += value;
        }
        CHECK(std::fabs(total - 1.0) < 1e-9);
        CHECK(std::is_sorted(ranked.begin(), ranked.end(),
                             [](const auto& a, const auto& b) { return a.second > b.second; }));
    }
}

TEST_CASE("single-split tree importance is one-hot") {
    Matrix x(4, 4);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) x(i, j) = j == 3 ? static_cast<double>(i) : 1.0;
    }
    std::vector<int> y{0, 0, 1, 1};
    ForestParams params;
    params.n_estimators = 1;
    params.bootstrap = false;
    params.features_per_split = 4;
    auto model = learn::train(params, x, y, 2, column_names(4));
    auto ranked = learn::feature_importance(model);
    CHECK(ranked[0].first == "f3");
    CHECK(ranked[0].second == doctest::Approx(1.0));
    for (std::size_t i = 1; i < 4; ++i) CHECK(ranked[i].second == 0.0);
}

TEST_CASE("importance is unsupported for logreg and knn") {
    std::mt19937_64 rng(15);
    auto inst = random_instance(rng, 10, 2, 2);
    auto lr = learn::train(LogRegParams{.max_iters = 5}, inst.x, inst.y, 2, column_names(2));
    CHECK_THROWS_AS(learn::feature_importance(lr), ValueError);
    auto knn = learn::train(KnnParams{.k = 5}, inst.x, inst.y, 2, column_names(2));
    CHECK_THROWS_AS(learn::feature_importance(knn), ValueError);
}

TEST_CASE("training is deterministic given the seed") {
    std::mt19937_64 rng(16);
    auto inst = blob_instance(rng, 15, 5, 2.0);
    Matrix probe(10, 5);
    std::normal_distribution<double> noise(0.0, 2.0);
    for (auto& v : probe.data()) v = noise(rng);

    for (const LearnerSpec& spec :
         {LearnerSpec(LogRegParams{.max_iters = 50}), LearnerSpec(KnnParams{}),
          LearnerSpec(ForestParams{.n_estimators = 10, .seed = 99}),
          LearnerSpec(GbtParams{.n_rounds = 10, .seed = 99})}) {
        auto a = learn::train(spec, inst.x, inst.y, 3, column_names(5));
        auto b = learn::train(spec, inst.x, inst.y, 3, column_names(5));
        auto pa = learn::predict_proba(a, probe);
        auto pb = learn::predict_proba(b, probe);
        CHECK(pa.data() == pb.data());  // bit-identical
    }

    // a different seed grows a different forest
    auto f1 = learn::train(ForestParams{.n_estimators = 10, .seed = 1}, inst.x, inst.y, 3,
                           column_names(5));
    auto f2 = learn::train(ForestParams{.n_estimators = 10, .seed = 2}, inst.x, inst.y, 3,
                           column_names(5));
    CHECK(learn::predict_proba(f1, probe).data() != learn::predict_proba(f2, probe).data());
}

TEST_CASE("column mismatch and bad labels are rejected") {
    std::mt19937_64 rng(18);
    auto inst = random_instance(rng, 8, 3, 2);
    auto model = learn::train(KnnParams{.k = 2}, inst.x, inst.y, 2, column_names(3));
    Matrix wrong(2, 4, 0.0);
    CHECK_THROWS_AS(learn::predict(model, wrong), ValueError);

    auto bad_y = inst.y;
    bad_y[0] = 7;
    CHECK_THROWS_AS(learn::train(KnnParams{}, inst.x, bad_y, 2, column_names(3)), ValueError);
    Matrix empty;
    CHECK_THROWS_AS(learn::train(KnnParams{}, empty, {}, 2, column_names(0)), ValueError);
}

TEST_CASE("serialization round-trips identical predictions for all variants") {
    std::mt19937_64 rng(19);
    auto inst = blob_instance(rng, 12, 4, 2.5);
    Matrix probe(50, 4);
    std::normal_distribution<double> noise(0.0, 2.0);
    for (auto& v : probe.data()) v = noise(rng);

    auto dir = std::filesystem::temp_directory_path();
    for (const LearnerSpec& spec :
         {LearnerSpec(LogRegParams{.max_iters = 60}), LearnerSpec(KnnParams{.k = 3}),
          LearnerSpec(ForestParams{.n_estimators = 8, .max_depth = 5, .seed = 21}),
          LearnerSpec(GbtParams{.n_rounds = 6, .seed = 21})}) {
        auto model = learn::train(spec, inst.x, inst.y, 3, column_names(4));
        auto path = dir / ("chartml_model_" + std::string(learn::variant_name(spec)) + ".json");
        learn::save_model(path, model);
        auto loaded = learn::load_model(path);
        CHECK(learn::predict_proba(model, probe).data() ==
              learn::predict_proba(loaded, probe).data());
        CHECK(learn::predict(model, probe) == learn::predict(loaded, probe));
        std::filesystem::remove(path);
    }
}
