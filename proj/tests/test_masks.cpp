// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "distflow/masksynth.hpp"
#include "distflow/morphology.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace distflow;
using distflow::testing::tiny_arch;

namespace {

bool equal(const Matrix& a, const Matrix& b) { return (a.array() == b.array()).all(); }
bool subset(const Matrix& a, const Matrix& b) { return (a.array() <= b.array()).all(); }

Matrix random_mask(Rng& rng, int rows, int cols, double p = 0.5) {
    std::bernoulli_distribution on(p);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = on(rng) ? 1.0 : 0.0;
    }
    return m;
}

}  // namespace

TEST_CASE("threshold uses the >= rule") {
    Matrix img(1, 3);
    img << 0.6, 0.5, 0.49;
    const Matrix m = threshold_classes(img, 0.5);
    CHECK(m(0, 0) == 1.0);
    CHECK(m(0, 1) == 1.0);
    CHECK(m(0, 2) == 0.0);
    CHECK(threshold_classes(Matrix::Constant(4, 4, 0.2), 0.5).isZero(0.0));
    Rng rng(51);
    const Matrix x = standard_normal(rng, 5, 5);
    CHECK(equal(threshold_classes(threshold_classes(x, 0.3), 0.3), threshold_classes(x, 0.3)));
}

TEST_CASE("gaussian kernel and blur") {
    const Vector k = gaussian_kernel(1.0, 3);
    const double z = 1.0 + 2.0 * std::exp(-0.5);
    CHECK(k(0) == doctest::Approx(std::exp(-0.5) / z).epsilon(1e-15));
    CHECK(k(1) == doctest::Approx(1.0 / z).epsilon(1e-15));
    CHECK(k(0) == doctest::Approx(0.2741).epsilon(1e-3));
    CHECK(k(1) == doctest::Approx(0.4519).epsilon(1e-3));

    const Matrix flat = Matrix::Constant(6, 7, 0.37);
    CHECK((gaussian_blur(flat, 1.3, 5) - flat).cwiseAbs().maxCoeff() < 1e-15);

    Matrix impulse = Matrix::Zero(9, 9);
    impulse(4, 4) = 1.0;
    const Matrix response = gaussian_blur(impulse, 1.0, 5);
    const Vector k5 = gaussian_kernel(1.0, 5);
    CHECK((response.block(2, 2, 5, 5) - k5 * k5.transpose()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(std::abs(response.sum() - 1.0) < 1e-12);
    CHECK_THROWS_AS(gaussian_blur(impulse, 1.0, 4), std::invalid_argument);
}

TEST_CASE("opening removes speckles and closing fills holes") {
    Matrix speck = Matrix::Zero(7, 7);
    speck(3, 3) = 1.0;
    CHECK(morph_open(speck, 3).isZero(0.0));

    Matrix block = Matrix::Zero(9, 9);
    block.block(2, 2, 5, 5).setOnes();
    Matrix holed = block;
    holed(4, 4) = 0.0;
    CHECK(equal(morph_close(holed, 3), block));
    CHECK_THROWS_AS(morph_open(Matrix::Constant(3, 3, 0.5), 3), std::invalid_argument);
    CHECK_THROWS_AS(erode(block, 2), std::invalid_argument);
}

TEST_CASE("opening and closing laws over every 3x3 pattern in 7x7 padding") {
    for (int bits = 0; bits < 512; ++bits) {
        Matrix m = Matrix::Zero(7, 7);
        for (int k = 0; k < 9; ++k) {
            m(2 + k / 3, 2 + k % 3) = (bits >> k) & 1;
        }
        const Matrix open = morph_open(m, 3);
        const Matrix close = morph_close(m, 3);
        CHECK(subset(open, m));
        CHECK(subset(m, close));
        CHECK(equal(morph_open(open, 3), open));
        CHECK(equal(morph_close(close, 3), close));
    }
}

TEST_CASE("laws hold at image borders for random masks") {
    Rng rng(52);
    for (int trial = 0; trial < 200; ++trial) {
        const Matrix m = random_mask(rng, 8, 8);
        const Matrix open = morph_open(m, 3);
        const Matrix close = morph_close(m, 3);
        CHECK(subset(open, m));
        CHECK(subset(m, close));
        CHECK(equal(morph_open(open, 3), open));
        CHECK(equal(morph_close(close, 3), close));
    }
}

TEST_CASE("cosine similarity examples") {
    RowVector a(2), b(2), c(2);
    a << 1, 1;
    b << 1, 0;
    c << 0, 3;
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cosine_similarity(b, c) == 0.0);
    CHECK(cosine_similarity(a, b) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(cosine_similarity(a, RowVector::Zero(2)), std::invalid_argument);
}

TEST_CASE("best candidate selection") {
    const FeatureExtractor ex(FeatureExtractor::Shape{8, 4, 4, 16}, 5);
    Rng rng(53);
    const Matrix real = random_mask(rng, 8, 8, 0.4);

    SUBCASE("an exact copy wins") {
        const std::vector<Matrix> cands = {random_mask(rng, 8, 8), real, random_mask(rng, 8, 8)};
        CHECK(select_best_candidate(real, cands, ex).first == 1);
    }
    SUBCASE("a single candidate is returned") {
        CHECK(select_best_candidate(real, {random_mask(rng, 8, 8)}, ex).first == 0);
    }
    SUBCASE("agrees with an exhaustive scan, ties to the lowest index") {
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<Matrix> cands = {random_mask(rng, 8, 8), random_mask(rng, 8, 8), random_mask(rng, 8, 8)};
            if (trial % 5 == 0) {
                cands[2] = cands[0];
            }
            const RowVector fr = ex.extract(Matrix(flatten(real)));
            std::size_t best = 0;
            double best_sim = -2.0;
            for (std::size_t i = 0; i < cands.size(); ++i) {
                const RowVector fc = ex.extract(Matrix(flatten(cands[i])));
                const double sim = fr.dot(fc) / (fr.norm() * fc.norm());
                if (sim > best_sim + 1e-12) {
                    best_sim = sim;
                    best = i;
                }
            }
            const auto [index, mask] = select_best_candidate(real, cands, ex);
            CHECK(index == best);
            CHECK(equal(mask, cands[best]));
        }
    }
    SUBCASE("empty list is an error") {
        CHECK_THROWS_AS(select_best_candidate(real, {}, ex), std::invalid_argument);
    }
}

TEST_CASE("mask synthesis outputs binary, seeded masks") {
    NetArch arch = tiny_arch();
    arch.image_size = 8;
    const ControlledVectorFieldNet model = ControlledVectorFieldNet::make_base(arch, 61).frozen_copy();
    const FeatureExtractor ex(FeatureExtractor::Shape{8, 4, 4, 16}, 5);
    Rng rng(54);
    Matrix real(3, 64);
    for (int i = 0; i < 3; ++i) {
        real.row(i) = flatten(random_mask(rng, 8, 8, 0.3));
    }
    MaskPipelineConfig cfg;
    cfg.threshold = 0.1;
    const SamplerConfig sampler{6, 0.0, 1.0 / 20.0};

    const auto a = synthesize_masks(model, real, cfg, ex, 7, sampler);
    const auto b = synthesize_masks(model, real, cfg, ex, 7, sampler);
    REQUIRE(a.size() == 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(is_binary(a[i]));
        CHECK(equal(a[i], b[i]));
    }

    SUBCASE("K = 1 is the pipeline output of the single candidate") {
        cfg.k = 1;
        const auto one = synthesize_masks(model, real, cfg, ex, 7, sampler);
        for (Eigen::Index i = 0; i < 3; ++i) {
            Rng stream = derive_rng(7, static_cast<std::uint64_t>(i));
            const Matrix x0 = standard_normal(stream, 1, 64);
            const Matrix raw = sample(model, x0, Matrix::Zero(1, 64), sampler);
            CHECK(equal(one[static_cast<std::size_t>(i)], postprocess_mask(unflatten(raw.row(0), 8, 8), cfg)));
        }
    }
}

TEST_CASE("pipeline config validation") {
    MaskPipelineConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.blur_kernel = 4;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = MaskPipelineConfig{};
    cfg.k = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = MaskPipelineConfig{};
    cfg.threshold = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
