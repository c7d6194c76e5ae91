// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <limits>

#include "distflow/metrics.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace distflow;
using distflow::testing::mmd_reward_loop;

namespace {

Matrix random_rotation(Rng& rng, int d) {
    Eigen::HouseholderQR<Matrix> qr(standard_normal(rng, d, d));
    return qr.householderQ();
}

double pairwise_distance(const Matrix& m, Eigen::Index i, Eigen::Index j) { return (m.row(i) - m.row(j)).norm(); }

}  // namespace

TEST_CASE("eval_mmd reports the distance") {
    Rng rng(71);
    const Matrix a = standard_normal(rng, 6, 4);
    const Matrix b = standard_normal(rng, 5, 4);
    const KernelConfig k{1.0, 3, 4};
    CHECK(eval_mmd(a, b, k) == -mmd_reward(a, b, k));
    CHECK(std::abs(eval_mmd(a, b, k) + mmd_reward_loop(a, b, 1.0, 3, 4)) < 1e-10);
    const Matrix constant = Matrix::Constant(3, 4, 0.7);
    CHECK(std::abs(eval_mmd(constant, constant, k)) < 1e-14);
    CHECK_THROWS_AS(eval_mmd(a.topRows(1), b, k), std::invalid_argument);
}

TEST_CASE("eval_mmd of a set against itself is within resampling noise") {
    Rng rng(72);
    const Matrix f = standard_normal(rng, 32, 4);
    const KernelConfig k{1.0, 3, 4};
    const double value = eval_mmd(f.topRows(16), f.bottomRows(16), k);
    std::uniform_int_distribution<int> pick(0, 31);
    std::vector<double> resampled;
    for (int r = 0; r < 200; ++r) {
        Matrix a(16, 4), b(16, 4);
        for (int i = 0; i < 16; ++i) {
            a.row(i) = f.row(pick(rng));
            b.row(i) = f.row(pick(rng));
        }
        resampled.push_back(eval_mmd(a, b, k));
    }
    double mean = 0.0;
    for (double v : resampled) {
        mean += v / resampled.size();
    }
    double var = 0.0;
    for (double v : resampled) {
        var += (v - mean) * (v - mean) / (resampled.size() - 1);
    }
    CHECK(std::abs(value) < 5.0 * std::sqrt(var));
}

TEST_CASE("mini Frechet closed forms") {
    // 1-D: unit variance around 0 and around 1 (sample variance with n - 1).
    Matrix a(2, 1), b(2, 1);
    a << -std::sqrt(0.5), std::sqrt(0.5);
    b << 1.0 - std::sqrt(0.5), 1.0 + std::sqrt(0.5);
    CHECK(mini_frechet(a, b) == doctest::Approx(1.0).epsilon(1e-10));

    Rng rng(73);
    const Matrix x = standard_normal(rng, 20, 5);
    CHECK(std::abs(mini_frechet(x, x)) < 1e-8);

    // Diagonal Gaussians: (sigma_a - sigma_b)^2 per axis.
    Matrix c(2, 2), d(2, 2);
    c << 1, 0, -1, 0;
    d << 3, 0, -3, 0;
    const double ridge = 1e-6;
    const double expected =
        std::pow(std::sqrt(2.0 + ridge) - std::sqrt(18.0 + ridge), 2) + std::pow(std::sqrt(ridge) - std::sqrt(ridge), 2);
    CHECK(mini_frechet(c, d) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("mini Frechet is symmetric and rotation invariant") {
    Rng rng(74);
    const Matrix a = standard_normal(rng, 30, 6);
    const Matrix b = (standard_normal(rng, 25, 6).array() * 1.5 + 0.3).matrix();
    CHECK(std::abs(mini_frechet(a, b) - mini_frechet(b, a)) < 1e-8);
    const Matrix q = random_rotation(rng, 6);
    CHECK(std::abs(mini_frechet(a * q, b * q) - mini_frechet(a, b)) < 1e-8);
    CHECK_THROWS_AS(mini_frechet(a.topRows(1), b), std::invalid_argument);
}

TEST_CASE("matrix square root of a PSD matrix") {
    Rng rng(75);
    const Matrix g = standard_normal(rng, 5, 5);
    const Matrix psd = g * g.transpose();
    const Matrix root = sqrtm_psd(psd);
    CHECK((root * root - psd).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((root - root.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("PSNR examples") {
    const Matrix a = Matrix::Constant(4, 4, 0.2);
    CHECK(psnr(a, a) == std::numeric_limits<double>::infinity());
    CHECK(psnr(a, (a.array() + 0.1).matrix()) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(psnr(a, (a.array() + 0.5).matrix()) == doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-12));
    CHECK(psnr(a, (a.array() + 0.5).matrix()) == doctest::Approx(6.0206).epsilon(1e-5));
    CHECK_THROWS_AS(psnr(a, Matrix::Zero(4, 3)), std::invalid_argument);
}

TEST_CASE("PCA embedding") {
    Rng rng(76);
    Matrix features = standard_normal(rng, 12, 5);
    features.col(0) *= 4.0;
    features.col(1) *= 2.0;

    SUBCASE("rotation preserves pairwise distances of the embedding") {
        const Matrix e = pca_embed_2d(features);
        const Matrix er = pca_embed_2d(features * random_rotation(rng, 5));
        for (Eigen::Index i = 0; i < 12; ++i) {
            for (Eigen::Index j = i + 1; j < 12; ++j) {
                CHECK(std::abs(pairwise_distance(e, i, j) - pairwise_distance(er, i, j)) < 1e-8);
            }
        }
    }
    SUBCASE("axes follow descending variance with a fixed sign") {
        const Matrix e = pca_embed_2d(features);
        const Matrix centered = features.rowwise() - features.colwise().mean();
        Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeThinV);
        for (int k = 0; k < 2; ++k) {
            Vector axis = svd.matrixV().col(k);
            Eigen::Index arg = 0;
            axis.cwiseAbs().maxCoeff(&arg);
            if (axis(arg) < 0) {
                axis = -axis;
            }
            CHECK((e.col(k) - centered * axis).cwiseAbs().maxCoeff() < 1e-8);
        }
    }
    SUBCASE("duplicated rows map to identical coordinates") {
        Matrix dup = features;
        dup.row(3) = dup.row(7);
        const Matrix e = pca_embed_2d(dup);
        CHECK((e.row(3) - e.row(7)).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("rank-1 data is an error") {
        const RowVector direction = standard_normal(rng, 1, 5);
        Matrix line(6, 5);
        for (int i = 0; i < 6; ++i) {
            line.row(i) = i * direction;
        }
        CHECK_THROWS_AS(pca_embed_2d(line), std::invalid_argument);
        CHECK_THROWS_AS(pca_embed_2d(features.topRows(2)), std::invalid_argument);
    }
}

TEST_CASE("mask agreement IoU") {
    Matrix mask = Matrix::Zero(8, 8);
    mask.block(1, 1, 4, 4).setOnes();
    CHECK(mask_agreement_iou(mask, mask, 0.5) == 1.0);

    Matrix disjoint = Matrix::Zero(8, 8);
    disjoint.block(5, 5, 3, 3).setOnes();
    CHECK(mask_agreement_iou(disjoint, mask, 0.5) == 0.0);

    // 4x4 squares shifted by 2 columns overlap in 8 pixels: 8 / (16 + 16 - 8).
    Matrix shifted = Matrix::Zero(8, 8);
    shifted.block(1, 3, 4, 4).setOnes();
    CHECK(mask_agreement_iou(shifted, mask, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    CHECK(mask_agreement_iou(Matrix::Zero(3, 3), Matrix::Zero(3, 3), 0.5) == 1.0);
    CHECK_THROWS_AS(mask_agreement_iou(mask, Matrix::Zero(2, 2), 0.5), std::invalid_argument);
}
