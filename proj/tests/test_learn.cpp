#include "emorec/error.hpp"
#include "emorec/learn.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace emorec;

namespace {

constexpr auto A = EmotionLabel::NEUTRAL;
constexpr auto B = EmotionLabel::HPHA;
constexpr auto C = EmotionLabel::HNHA;

Instance inst(std::vector<double> f, EmotionLabel l) {
    Instance i;
    i.features = std::move(f);
    i.label = l;
    return i;
}

/// Random instances whose label follows a noisy rule, so trees have work to do.
std::vector<Instance> random_instances(std::mt19937_64& rng, std::size_t n, std::size_t d) {
    std::vector<Instance> out;
    std::uniform_int_distribution<int> flip(0, 9);
    for (std::size_t i = 0; i < n; ++i) {
        auto f = oracle::random_signal(rng, d);
        const int cls = (f[0] + 0.5 * f[d > 1 ? 1 : 0] > 3.0) ? 1 : (f[0] < -3.0 ? 2 : 0);
        out.push_back(inst(std::move(f), kAllEmotions[static_cast<std::size_t>(flip(rng) == 0 ? (cls + 1) % 3 : cls)]));
    }
    return out;
}

/// Oracle neighbours in independently standardized space.
EmotionLabel knn_oracle(const std::vector<Instance>& train, const std::vector<double>& q) {
    std::vector<std::vector<double>> raw;
    std::vector<EmotionLabel> labels;
    for (const auto& t : train) {
        raw.push_back(t.features);
        labels.push_back(t.label);
    }
    const oracle::ZScore z(raw);
    std::vector<std::vector<double>> rows;
    for (const auto& r : raw) rows.push_back(z(r));
    return oracle::knn(rows, labels, z(q), 3);
}

}  // namespace

TEST_SUITE("learn") {

TEST_CASE("standardizer examples") {
    const std::vector<Instance> train{inst({2, 7}, A), inst({4, 7}, B), inst({6, 7}, A)};
    const auto s = Standardizer::fit(train);
    const auto t0 = s.transform(train[0].features);
    const auto t2 = s.transform(train[2].features);
    CHECK(std::abs(t0[0] + 1.2247) <= 1e-4);
    CHECK(s.transform(train[1].features)[0] == 0.0);
    CHECK(std::abs(t2[0] - 1.2247) <= 1e-4);
    CHECK(t0[1] == 0.0);
    CHECK(t2[1] == 0.0);
    CHECK(std::abs(s.stddev()[0] - 1.633) <= 1e-3);
    CHECK(std::abs(s.transform(std::vector<double>{8, 100})[0] - 2.449) <= 1e-3);
    CHECK(s.transform(std::vector<double>{8, 100})[1] == 0.0);
    CHECK_THROWS_AS(Standardizer::fit(std::vector<Instance>{}), InvalidArgument);
    CHECK_THROWS_AS(Standardizer::fit(std::vector<Instance>{inst({1}, A), inst({1, 2}, A)}), InvalidArgument);
}

TEST_CASE("standardized training features have mean 0 and std 1") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 20; ++trial) {
        auto train = random_instances(rng, 30 + trial, 5);
        for (auto& t : train) t.features[3] = 2.5;
        const auto s = Standardizer::fit(train);
        for (std::size_t f = 0; f < 5; ++f) {
            double m = 0, v = 0;
            for (const auto& t : train) m += s.apply(t).features[f];
            m /= static_cast<double>(train.size());
            for (const auto& t : train) v += std::pow(s.apply(t).features[f] - m, 2);
            v /= static_cast<double>(train.size());
            CHECK(std::abs(m) <= 1e-9);
            CHECK(std::abs(v - (f == 3 ? 0.0 : 1.0)) <= 1e-9);
        }
    }
}

TEST_CASE("classifier names") {
    for (auto k : {ClassifierKind::KNN3, ClassifierKind::DT, ClassifierKind::RF})
        CHECK(parse_classifier(to_string(k)) == k);
    CHECK(parse_classifier("knn") == ClassifierKind::KNN3);
    CHECK_FALSE(parse_classifier("svm").has_value());
}

TEST_CASE("decision tree on separable 1-D data") {
    const std::vector<Instance> train{inst({0}, A), inst({1}, A), inst({10}, B), inst({11}, B)};
    const auto m = emorec::train(ClassifierKind::DT, train, 1);
    REQUIRE(m.trees().size() == 1);
    const auto& nodes = m.trees()[0].nodes;
    REQUIRE(nodes.size() == 3);
    CHECK(nodes[0].feature == 0);
    // thresholds live in standardized space; map back to raw units
    const double raw = nodes[0].threshold * m.standardizer().stddev()[0] + m.standardizer().mean()[0];
    CHECK(raw > 1.0);
    CHECK(raw < 10.0);
    for (const auto& t : train) CHECK(m.predict(t.features) == t.label);
}

TEST_CASE("decision tree fits any consistent training set") {
    std::mt19937_64 rng(73);
    for (int trial = 0; trial < 20; ++trial) {
        const auto train = random_instances(rng, 80, 4);
        const auto m = emorec::train(ClassifierKind::DT, train, 0);
        for (const auto& t : train) CHECK(m.predict(t.features) == t.label);
        for (const auto& node : m.trees()[0].nodes)
            if (!node.is_leaf()) CHECK(std::isfinite(node.threshold));
    }
}

TEST_CASE("training rejects degenerate sets") {
    CHECK_THROWS_AS(emorec::train(ClassifierKind::DT, std::vector<Instance>{}, 0), InvalidArgument);
    const std::vector<Instance> one{inst({0}, A), inst({1}, A)};
    for (auto k : {ClassifierKind::KNN3, ClassifierKind::DT, ClassifierKind::RF})
        CHECK_THROWS_AS(emorec::train(k, one, 0), InvalidArgument);
    const std::vector<Instance> two{inst({0}, A), inst({1}, B)};
    const auto m = emorec::train(ClassifierKind::KNN3, two, 0);
    CHECK_THROWS_AS(m.predict(std::vector<double>{1, 2}), InvalidArgument);
}

TEST_CASE("random forest is deterministic per seed") {
    std::mt19937_64 rng(79);
    const auto train = random_instances(rng, 120, 6);
    const auto test = random_instances(rng, 60, 6);
    const auto a = emorec::train(ClassifierKind::RF, train, 1234);
    const auto b = emorec::train(ClassifierKind::RF, train, 1234);
    CHECK(a.trees().size() == 100);
    CHECK(a.serialize() == b.serialize());
    for (const auto& t : test) CHECK(a.predict(t.features) == b.predict(t.features));
    const auto c = emorec::train(ClassifierKind::RF, train, 1235);
    CHECK(c.serialize() != a.serialize());
}

TEST_CASE("a one-tree forest without bootstrap or feature sampling is the tree") {
    std::mt19937_64 rng(83);
    TrainOptions opt;
    opt.rf_trees = 1;
    opt.rf_bootstrap = false;
    opt.rf_max_features = 5;
    for (int trial = 0; trial < 10; ++trial) {
        const auto train = random_instances(rng, 70, 5);
        const auto test = random_instances(rng, 50, 5);
        const auto rf = emorec::train(ClassifierKind::RF, train, static_cast<std::uint64_t>(trial), opt);
        const auto dt = emorec::train(ClassifierKind::DT, train, 0);
        for (const auto& t : test) CHECK(rf.predict(t.features) == dt.predict(t.features));
    }
}

TEST_CASE("knn examples") {
    SUBCASE("three nearest agree") {
        const std::vector<Instance> train{inst({0}, A), inst({0.1}, A), inst({5}, B), inst({5.1}, B), inst({5.2}, B)};
        CHECK(emorec::train(ClassifierKind::KNN3, train, 0).predict(std::vector<double>{4.9}) == B);
    }
    SUBCASE("three-way tie goes to the nearest") {
        const std::vector<double> rows{0.0, 1.0, 3.0};
        const std::vector<EmotionLabel> labels{A, B, C};
        CHECK(knn_vote(rows, labels, 1, std::vector<double>{0.9}, 3) == B);
        CHECK(knn_vote(rows, labels, 1, std::vector<double>{2.5}, 3) == C);
    }
    SUBCASE("distance tie goes to the lower row") {
        const std::vector<double> rows{-1.0, 1.0};
        const std::vector<EmotionLabel> labels{C, B};
        CHECK(knn_vote(rows, labels, 1, std::vector<double>{0.0}, 1) == C);
    }
    SUBCASE("every stored instance predicts its own label") {
        std::mt19937_64 rng(89);
        const auto train = random_instances(rng, 60, 3);
        const auto m = emorec::train(ClassifierKind::KNN3, train, 0);
        CHECK(m.stored_instances() == 60);
        // k = 3 includes the point itself; compare with the oracle on the same data
        for (const auto& t : train) CHECK(m.predict(t.features) == knn_oracle(train, t.features));
        const auto m1 = [&] {
            TrainOptions o;
            o.knn_k = 1;
            return emorec::train(ClassifierKind::KNN3, train, 0, o);
        }();
        for (const auto& t : train) CHECK(m1.predict(t.features) == t.label);
    }
}

TEST_CASE("knn matches exhaustive search") {
    std::mt19937_64 rng(97);
    const auto train = random_instances(rng, 200, 4);
    const auto test = random_instances(rng, 200, 4);
    const auto m = emorec::train(ClassifierKind::KNN3, train, 0);
    int agree = 0;
    for (const auto& t : test) agree += m.predict(t.features) == knn_oracle(train, t.features);
    CHECK(agree == 200);
}

TEST_CASE("knn ignores training order and a common rescale") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 10; ++trial) {
        const auto train = random_instances(rng, 50, 3);
        const auto test = random_instances(rng, 40, 3);
        auto shuffled = train;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        auto scaled = train;
        for (auto& t : scaled)
            for (auto& v : t.features) v *= 7.5;
        const auto m = emorec::train(ClassifierKind::KNN3, train, 0);
        const auto ms = emorec::train(ClassifierKind::KNN3, shuffled, 0);
        const auto mc = emorec::train(ClassifierKind::KNN3, scaled, 0);
        for (const auto& t : test) {
            CHECK(m.predict(t.features) == ms.predict(t.features));
            auto q = t.features;
            for (auto& v : q) v *= 7.5;
            CHECK(m.predict(t.features) == mc.predict(q));
        }
    }
}

TEST_CASE("models survive serialization") {
    std::mt19937_64 rng(103);
    const auto train = random_instances(rng, 90, 5);
    const auto test = random_instances(rng, 90, 5);
    for (auto k : {ClassifierKind::KNN3, ClassifierKind::DT, ClassifierKind::RF}) {
        const auto m = emorec::train(k, train, 5);
        const auto text = m.serialize();
        const auto back = TrainedModel::deserialize(text);
        CHECK(back.serialize() == text);
        CHECK(back.kind() == k);
        CHECK(back.options() == m.options());
        for (const auto& t : test) CHECK(back.predict(t.features) == m.predict(t.features));
    }
    CHECK_THROWS_AS(TrainedModel::deserialize("not a model"), Error);
}

TEST_CASE("evaluate examples") {
    SUBCASE("hand arithmetic") {
        const std::vector<std::pair<EmotionLabel, EmotionLabel>> p{{A, A}, {A, A}, {B, A}, {B, B}};
        const auto e = evaluate(p);
        CHECK(e.accuracy == 0.75);
        const auto& a = e.per_class[0];
        const auto& b = e.per_class[1];
        CHECK(std::abs(a.precision - 2.0 / 3.0) <= 1e-12);
        CHECK(a.recall == 1.0);
        CHECK(std::abs(a.f_measure - 0.8) <= 1e-12);
        CHECK(b.precision == 1.0);
        CHECK(b.recall == 0.5);
        CHECK(std::abs(b.f_measure - 2.0 / 3.0) <= 1e-12);
        CHECK_FALSE(e.per_class[2].present);
        CHECK(e.per_class[2].f_measure == 0.0);
        CHECK(std::abs(e.macro_f - (0.8 + 2.0 / 3.0) / 2.0) <= 1e-12);
        CHECK(e.total() == 4);
        CHECK(e.confusion[1][0] == 1);
    }
    SUBCASE("perfect predictions") {
        const std::vector<std::pair<EmotionLabel, EmotionLabel>> p{{A, A}, {B, B}, {C, C}, {C, C}};
        const auto e = evaluate(p);
        CHECK(e.accuracy == 1.0);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) CHECK(e.confusion[i][j] == (i == j ? (i == 2 ? 2u : 1u) : 0u));
        for (const auto& c : e.per_class) CHECK(c.f_measure == 1.0);
        CHECK(e.macro_f == 1.0);
    }
}

TEST_CASE("metrics invariants on random predictions") {
    std::mt19937_64 rng(107);
    std::uniform_int_distribution<int> lab(0, 2), len(1, 200);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::pair<EmotionLabel, EmotionLabel>> p(static_cast<std::size_t>(len(rng)));
        for (auto& [t, q] : p) {
            t = kAllEmotions[static_cast<std::size_t>(lab(rng))];
            q = kAllEmotions[static_cast<std::size_t>(lab(rng))];
        }
        const auto e = evaluate(p);
        CHECK(e.total() == p.size());
        CHECK(e.accuracy >= 0.0);
        CHECK(e.accuracy <= 1.0);
        for (const auto& c : e.per_class) {
            const double expect = c.precision + c.recall > 0 ? 2 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
            CHECK(std::abs(c.f_measure - expect) <= 1e-12);
        }
        CHECK(metrics_from_confusion(e.confusion) == e);
    }
}

}  // TEST_SUITE
