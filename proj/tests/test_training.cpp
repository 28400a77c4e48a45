#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <random>

#include "guardkit/training.hpp"

using namespace guardkit;
using Catch::Approx;

TEST_CASE("focal loss with gamma 0 and alpha 0.5 is half of BCE", "[training]") {
    std::mt19937 gen(13);
    std::uniform_real_distribution<double> p_dist(0.01, 0.99);
    std::bernoulli_distribution target_dist(0.5);
    FocalParams params{.alpha = 0.5, .gamma = 0.0, .reduction = Reduction::none};
    for (int trial = 0; trial < 200; ++trial) {
        const double p = p_dist(gen);
        const int t = target_dist(gen) ? 1 : 0;
        const auto loss = focal_loss_elements({p}, {t}, params);
        const double bce = t == 1 ? -std::log(p) : -std::log(1.0 - p);
        CHECK(loss[0] == Approx(0.5 * bce).margin(1e-10));
    }
}

TEST_CASE("hand-evaluated focal point with negative gamma", "[training]") {
    // target 1, p=0.5, alpha=0.7, gamma=-1:
    // -0.7 * (0.5)^-1 * ln(0.5) = 1.4 * ln 2
    FocalParams params{.alpha = 0.7, .gamma = -1.0, .reduction = Reduction::none};
    const auto loss = focal_loss_elements({0.5}, {1}, params);
    CHECK(loss[0] == Approx(1.4 * std::log(2.0)).epsilon(1e-12));
    CHECK(loss[0] == Approx(0.9704060527839234).epsilon(1e-12));
}

TEST_CASE("easy positives vanish under positive gamma", "[training]") {
    FocalParams params{.alpha = 0.5, .gamma = 2.0, .reduction = Reduction::none};
    const auto near = focal_loss_elements({0.999}, {1}, params);
    const auto far = focal_loss_elements({0.6}, {1}, params);
    CHECK(near[0] < 1e-5);
    CHECK(near[0] < far[0]);
}

TEST_CASE("the default parameterization is finite on saturated inputs",
          "[training]") {
    FocalParams params{.alpha = 0.7, .gamma = -1.0, .reduction = Reduction::none};
    const std::vector<double> probs = {0.0, 1.0, 1e-300, 1.0 - 1e-16, 0.5};
    const std::vector<int> ones(probs.size(), 1);
    const std::vector<int> zeros(probs.size(), 0);
    for (double v : focal_loss_elements(probs, ones, params))
        CHECK(std::isfinite(v));
    for (double v : focal_loss_elements(probs, zeros, params))
        CHECK(std::isfinite(v));
}

TEST_CASE("reductions", "[training]") {
    const std::vector<double> probs = {0.2, 0.7, 0.9};
    const std::vector<int> targets = {0, 1, 1};
    FocalParams params{.alpha = 0.5, .gamma = 0.0, .reduction = Reduction::sum};
    const auto elements = focal_loss_elements(probs, targets, params);
    const double sum = elements[0] + elements[1] + elements[2];
    CHECK(focal_loss(probs, targets, params) == Approx(sum).epsilon(1e-12));
    params.reduction = Reduction::mean;
    CHECK(focal_loss(probs, targets, params) == Approx(sum / 3.0).epsilon(1e-12));
    params.reduction = Reduction::none;
    CHECK_THROWS_AS(focal_loss(probs, targets, params), Error);
}

TEST_CASE("focal loss argument validation", "[training]") {
    CHECK_THROWS_AS(focal_loss_elements({0.5}, {1, 0}, {}), Error);
    FocalParams bad;
    bad.alpha = 1.5;
    CHECK_THROWS_AS(focal_loss_elements({0.5}, {1}, bad), Error);
}

TEST_CASE("analytic gradient matches central finite differences", "[training]") {
    std::mt19937 gen(77);
    std::uniform_real_distribution<double> p_dist(0.05, 0.95);
    std::bernoulli_distribution target_dist(0.5);
    const double h = 1e-5;
    for (const double gamma : {-1.0, 0.0, 0.5, 2.0}) {
        FocalParams params{.alpha = 0.7, .gamma = gamma,
                           .reduction = Reduction::none};
        for (int trial = 0; trial < 100; ++trial) {
            const double p = p_dist(gen);
            const int t = target_dist(gen) ? 1 : 0;
            const double up = focal_loss_elements({p + h}, {t}, params)[0];
            const double down = focal_loss_elements({p - h}, {t}, params)[0];
            const double numeric = (up - down) / (2.0 * h);
            const double analytic = focal_loss_grad({p}, {t}, params)[0];
            CHECK(analytic ==
                  Approx(numeric).epsilon(1e-4).margin(1e-7));
        }
    }
}

TEST_CASE("ewc penalty", "[training]") {
    SECTION("zero at the anchor") {
        EwcState state{.anchor_params = {0.5, -1.0, 2.0},
                       .fisher = {1.0, 2.0, 3.0}};
        CHECK(ewc_penalty({0.5, -1.0, 2.0}, state) == 0.0);
    }
    SECTION("hand-computed case") {
        EwcState state{.anchor_params = {0.0, 0.0},
                       .fisher = {1.0, 1.0},
                       .lambda = 100.0};
        // (100/2) * (1*1 + 1*1) = 100
        CHECK(ewc_penalty({1.0, -1.0}, state) == Approx(100.0).epsilon(1e-15));
    }
    SECTION("lambda zero disables the penalty") {
        EwcState state{.anchor_params = {0.0}, .fisher = {5.0}, .lambda = 0.0};
        CHECK(ewc_penalty({123.0}, state) == 0.0);
    }
    SECTION("nonnegative everywhere") {
        std::mt19937 gen(3);
        std::uniform_real_distribution<double> dist(-5.0, 5.0);
        EwcState state{.anchor_params = {dist(gen), dist(gen)},
                       .fisher = {0.3, 1.7},
                       .lambda = 10.0};
        for (int i = 0; i < 100; ++i)
            CHECK(ewc_penalty({dist(gen), dist(gen)}, state) >= 0.0);
    }
    SECTION("length mismatch") {
        EwcState state{.anchor_params = {0.0}, .fisher = {1.0}};
        CHECK_THROWS_AS(ewc_penalty({1.0, 2.0}, state), Error);
    }
}

TEST_CASE("fisher update", "[training]") {
    SECTION("hand-computed normalized case") {
        EwcState state{.anchor_params = {0.0, 0.0},
                       .fisher = {0.0, 0.0},
                       .decay = 0.95,
                       .normalize = true};
        const auto next = fisher_update(state, {1.0, 2.0});
        // (1-0.95) * (1, 4) = (0.05, 0.2); normalized by 0.2 -> (0.25, 1.0)
        CHECK(next.fisher[0] == Approx(0.25).epsilon(1e-12));
        CHECK(next.fisher[1] == Approx(1.0).epsilon(1e-15));
    }
    SECTION("pure decay when gradients vanish") {
        EwcState state{.anchor_params = {0.0, 0.0},
                       .fisher = {0.4, 0.8},
                       .decay = 0.95,
                       .normalize = false};
        const auto next = fisher_update(state, {0.0, 0.0});
        CHECK(next.fisher[0] == Approx(0.38).epsilon(1e-12));
        CHECK(next.fisher[1] == Approx(0.76).epsilon(1e-12));
    }
    SECTION("all-zero fisher and gradients stay zero") {
        EwcState state{.anchor_params = {0.0}, .fisher = {0.0},
                       .normalize = true};
        const auto next = fisher_update(state, {0.0});
        CHECK(next.fisher[0] == 0.0);
    }
    SECTION("normalization pins the max to exactly one") {
        std::mt19937 gen(9);
        std::uniform_real_distribution<double> dist(-3.0, 3.0);
        for (int trial = 0; trial < 100; ++trial) {
            EwcState state{.anchor_params = {0, 0, 0},
                           .fisher = {0.1, 0.2, 0.3},
                           .decay = 0.95,
                           .normalize = true};
            std::vector<double> grads = {dist(gen), dist(gen), dist(gen)};
            if (grads[0] == 0 && grads[1] == 0 && grads[2] == 0) continue;
            const auto next = fisher_update(state, grads);
            CHECK(*std::max_element(next.fisher.begin(), next.fisher.end()) ==
                  1.0);
        }
    }
}

TEST_CASE("train/eval split", "[training]") {
    std::vector<int> ten(10);
    for (int i = 0; i < 10; ++i) ten[i] = i;

    SECTION("ninety/ten on ten records") {
        const auto [train, eval] = split_train_eval(ten, 0.9, 4);
        CHECK(train.size() == 9);
        CHECK(eval.size() == 1);
    }
    SECTION("same seed, same split") {
        const auto a = split_train_eval(ten, 0.7, 21);
        const auto b = split_train_eval(ten, 0.7, 21);
        CHECK(a.first == b.first);
        CHECK(a.second == b.second);
    }
    SECTION("the halves partition the input") {
        std::mt19937 gen(1);
        std::uniform_int_distribution<int> size_dist(2, 50);
        std::uniform_real_distribution<double> frac_dist(0.1, 0.9);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<int> records(size_dist(gen));
            for (auto& r : records) r = static_cast<int>(gen());
            const auto [train, eval] =
                split_train_eval(records, frac_dist(gen), trial);
            std::vector<int> merged = train;
            merged.insert(merged.end(), eval.begin(), eval.end());
            std::sort(merged.begin(), merged.end());
            auto expected = records;
            std::sort(expected.begin(), expected.end());
            CHECK(merged == expected);
        }
    }
    SECTION("bad arguments") {
        CHECK_THROWS_AS(split_train_eval(std::vector<int>{}, 0.9, 1), Error);
        CHECK_THROWS_AS(split_train_eval(ten, 0.0, 1), Error);
        CHECK_THROWS_AS(split_train_eval(ten, 1.0, 1), Error);
    }
}

TEST_CASE("replay mixing", "[training]") {
    TrainingRecord a;
    a.text = "main one";
    a.all_labels = {"x"};
    TrainingRecord b = a;
    b.text = "main two";
    TrainingRecord c = a;
    c.text = "main three";
    TrainingRecord r1 = a;
    r1.text = "replay one";
    TrainingRecord r2 = a;
    r2.text = "replay two";

    SECTION("lengths add and provenance is tagged") {
        const auto mixed = mix_replay({a, b, c}, {r1, r2}, 8);
        REQUIRE(mixed.size() == 5);
        std::map<std::string, int> tags;
        for (const auto& rec : mixed) tags[rec.metadata.at(kSourceKey)]++;
        CHECK(tags["main"] == 3);
        CHECK(tags["replay"] == 2);
    }
    SECTION("empty replay is a tagged permutation of main") {
        const auto mixed = mix_replay({a, b, c}, {}, 8);
        REQUIRE(mixed.size() == 3);
        std::vector<std::string> texts;
        for (const auto& rec : mixed) {
            CHECK(rec.metadata.at(kSourceKey) == "main");
            texts.push_back(rec.text);
        }
        std::sort(texts.begin(), texts.end());
        CHECK(texts == std::vector<std::string>{"main one", "main three",
                                                "main two"});
    }
    SECTION("same seed, same order") {
        const auto m1 = mix_replay({a, b, c}, {r1, r2}, 5);
        const auto m2 = mix_replay({a, b, c}, {r1, r2}, 5);
        CHECK(m1 == m2);
    }
    SECTION("main must be non-empty") {
        CHECK_THROWS_AS(mix_replay({}, {r1}, 1), Error);
    }
}
