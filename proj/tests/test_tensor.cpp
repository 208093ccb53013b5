#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "tdf/io.hpp"
#include "tdf/tensor.hpp"

using namespace tdf;

namespace {

Shape random_shape(std::mt19937_64& gen, int max_order, Index max_dim) {
    std::uniform_int_distribution<int> order(2, max_order);
    std::uniform_int_distribution<Index> dim(1, max_dim);
    std::vector<Index> d(static_cast<std::size_t>(order(gen)));
    for (auto& n : d)
        n = dim(gen);
    return Shape(d);
}

DenseTensor random_tensor(std::mt19937_64& gen, const Shape& s) {
    return DenseTensor(s, oracle::random_vector(gen, s.size()));
}

} // namespace

TEST(Shape, RejectsBadDims) {
    EXPECT_THROW(Shape({3}), DimensionError);
    EXPECT_THROW(Shape({2, 0}), DimensionError);
    EXPECT_EQ(Shape({2, 3, 4}).size(), 24);
}

TEST(Matricize, SingleNonzeroEntry) {
    DenseTensor t(Shape{2, 2, 2});
    t({0, 0, 0}) = 1.0;
    const Matrix m = matricize(t, 0);
    ASSERT_EQ(m.rows(), 2);
    ASSERT_EQ(m.cols(), 4);
    Matrix expected = Matrix::Zero(2, 4);
    expected(0, 0) = 1.0;
    EXPECT_EQ(m, expected);
}

TEST(Matricize, ElementaryTensorGivesOuterProduct) {
    const Vector v = Vector::LinSpaced(3, 1.0, 3.0);
    const Vector w = Vector::LinSpaced(4, -1.0, 2.0);
    const Matrix m = matricize(elementary_tensor({v, w}), 0);
    EXPECT_EQ(m, v * w.transpose());
}

TEST(Matricize, ColumnOrderIsRowMajorOverRemainingModes) {
    DenseTensor t(Shape{2, 3, 4});
    for (Index i = 0; i < t.size(); ++i)
        t.data()[i] = static_cast<double>(i);
    const Matrix m = matricize(t, 1);
    for (Index a = 0; a < 2; ++a)
        for (Index b = 0; b < 3; ++b)
            for (Index c = 0; c < 4; ++c)
                EXPECT_EQ(m(b, a * 4 + c), t({a, b, c}));
}

TEST(Matricize, RoundtripRandomShapes) {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Shape s = random_shape(gen, 4, 6);
        const DenseTensor t = random_tensor(gen, s);
        for (Index k = 0; k < s.order(); ++k)
            EXPECT_EQ(dematricize(matricize(t, k), k, s).data(), t.data());
    }
    const DenseTensor t = random_tensor(gen, Shape{3, 4, 5});
    EXPECT_EQ(dematricize(matricize(t, 1), 1, t.shape()).data(), t.data());
}

TEST(Matricize, ModeOutOfRange) {
    const DenseTensor t(Shape{2, 2});
    EXPECT_THROW(matricize(t, 2), DimensionError);
    EXPECT_THROW(matricize(t, -1), DimensionError);
}

TEST(ModeContract, IdentityLeavesTensorUnchanged) {
    std::mt19937_64 gen(3);
    const DenseTensor t = random_tensor(gen, Shape{2, 3, 4});
    EXPECT_EQ(mode_contract(t, 1, Matrix::Identity(3, 3)).data(), t.data());
}

TEST(ModeContract, ActsOnElementaryFactor) {
    std::mt19937_64 gen(4);
    const Vector v = oracle::random_vector(gen, 3);
    const Vector w = oracle::random_vector(gen, 2);
    const Matrix M = oracle::random_matrix(gen, 5, 3);
    const DenseTensor got = mode_contract(elementary_tensor({v, w}), 0, M);
    const DenseTensor want = elementary_tensor({Vector(M * v), w});
    EXPECT_EQ(got.shape(), want.shape());
    EXPECT_LT((got - want).frobenius_norm(), 1e-14);
}

TEST(ModeContract, DistinctModesCommute) {
    std::mt19937_64 gen(5);
    const DenseTensor t = random_tensor(gen, Shape{2, 3, 2});
    const Matrix A = oracle::random_matrix(gen, 4, 2);
    const Matrix B = oracle::random_matrix(gen, 3, 3);
    const DenseTensor ab = mode_contract(mode_contract(t, 0, A), 1, B);
    const DenseTensor ba = mode_contract(mode_contract(t, 1, B), 0, A);
    EXPECT_LT((ab - ba).data().cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ModeContract, Composition) {
    std::mt19937_64 gen(6);
    for (int trial = 0; trial < 30; ++trial) {
        const Shape s = random_shape(gen, 4, 5);
        const DenseTensor t = random_tensor(gen, s);
        const Index mu = std::uniform_int_distribution<Index>(0, s.order() - 1)(gen);
        const Matrix M = oracle::random_matrix(gen, 3, s[mu]);
        const Matrix N = oracle::random_matrix(gen, 2, 3);
        const DenseTensor twice = mode_contract(mode_contract(t, mu, M), mu, N);
        const DenseTensor once = mode_contract(t, mu, Matrix(N * M));
        EXPECT_LT((twice - once).data().cwiseAbs().maxCoeff(), 1e-13 * std::max(1.0, once.data().cwiseAbs().maxCoeff()));
    }
}

TEST(ModeContract, DimensionMismatch) {
    const DenseTensor t(Shape{2, 3});
    EXPECT_THROW(mode_contract(t, 0, Matrix::Identity(3, 3)), DimensionError);
}

TEST(ElementaryTensor, SmallExample) {
    const DenseTensor t = elementary_tensor({Vector{{3.0, 4.0}}, Vector{{1.0, 0.0}}});
    EXPECT_EQ(t({0, 0}), 3.0);
    EXPECT_EQ(t({0, 1}), 0.0);
    EXPECT_EQ(t({1, 0}), 4.0);
    EXPECT_EQ(t({1, 1}), 0.0);
}

TEST(ElementaryTensor, ZeroVectorGivesZeroTensor) {
    const DenseTensor t = elementary_tensor({Vector{{1.0, 2.0}}, Vector::Zero(3), Vector{{5.0}}});
    EXPECT_EQ(t.data().cwiseAbs().maxCoeff(), 0.0);
}

TEST(ElementaryTensor, NeedsTwoVectors) {
    EXPECT_THROW(elementary_tensor(std::vector<Vector>{}), DimensionError);
    EXPECT_THROW(elementary_tensor(std::vector<Vector>{Vector::Ones(2)}), DimensionError);
}

TEST(Inner, ProductFormula) {
    const Vector e1{{1.0, 0.0}}, e2{{0.0, 1.0}};
    EXPECT_EQ(inner(elementary_tensor({e1, e1}), elementary_tensor({e2, e2})), 0.0);
    EXPECT_EQ(inner(elementary_tensor({Vector{{1.0, 1.0}}, e1}), elementary_tensor({e1, e1})), 1.0);
}

TEST(Inner, MatchesFlatVectorDot) {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Shape s = random_shape(gen, 4, 4);
        const DenseTensor a = random_tensor(gen, s);
        const DenseTensor b = random_tensor(gen, s);
        double dot = 0.0;
        for (Index i = 0; i < s.size(); ++i)
            dot += a.data()[i] * b.data()[i];
        EXPECT_DOUBLE_EQ(inner(a, b), dot);
    }
}

TEST(Inner, SymmetricBilinearPositive) {
    std::mt19937_64 gen(8);
    for (int trial = 0; trial < 30; ++trial) {
        const Shape s = random_shape(gen, 3, 4);
        const DenseTensor a = random_tensor(gen, s);
        const DenseTensor b = random_tensor(gen, s);
        const DenseTensor c = random_tensor(gen, s);
        const double x = 0.7, y = -1.3;
        EXPECT_DOUBLE_EQ(inner(a, b), inner(b, a));
        EXPECT_NEAR(inner(x * a + y * b, c), x * inner(a, c) + y * inner(b, c), 1e-12);
        EXPECT_GT(inner(a, a), 0.0);
    }
}

TEST(Inner, ShapeMismatch) {
    EXPECT_THROW(inner(DenseTensor(Shape{2, 2}), DenseTensor(Shape{2, 3})), DimensionError);
}

TEST(AmbientNorm, ZeroTensor) { EXPECT_EQ(AmbientNorm::uniform(3.0)(DenseTensor(Shape{2, 2})), 0.0); }

TEST(AmbientNorm, EuclideanCase) {
    std::mt19937_64 gen(9);
    const DenseTensor t = random_tensor(gen, Shape{3, 2, 4});
    EXPECT_NEAR(AmbientNorm::uniform(2.0)(t), std::sqrt(inner(t, t)), 1e-14);
}

TEST(AmbientNorm, HandComputedP4) {
    const DenseTensor t = elementary_tensor({Vector::Ones(2), Vector::Ones(2)});
    // (4 * 1^4)^(1/4) = sqrt(2) = (2^(1/4))^2
    EXPECT_NEAR(AmbientNorm::uniform(4.0)(t), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(ModeNorm(4.0)(Vector::Ones(2)), std::pow(2.0, 0.25), 1e-15);
}

TEST(AmbientNorm, CrossnormOnElementaryTensors) {
    std::mt19937_64 gen(10);
    std::uniform_real_distribution<double> wdist(0.2, 3.0);
    for (double p : {1.5, 2.0, 3.0}) {
        for (int trial = 0; trial < 100; ++trial) {
            const Shape s = random_shape(gen, 4, 5);
            std::vector<Vector> vs;
            std::vector<ModeNorm> modes;
            for (Index k = 0; k < s.order(); ++k) {
                vs.push_back(oracle::random_vector(gen, s[k]));
                Vector w(s[k]);
                for (Index i = 0; i < w.size(); ++i)
                    w[i] = wdist(gen);
                modes.emplace_back(p, w);
            }
            const AmbientNorm nrm(modes);
            double prod = 1.0;
            for (Index k = 0; k < s.order(); ++k)
                prod *= modes[static_cast<std::size_t>(k)](vs[static_cast<std::size_t>(k)]);
            EXPECT_LE(std::abs(nrm(elementary_tensor(vs)) - prod), 1e-12 * prod) << "p = " << p;
        }
    }
}

TEST(AmbientNorm, RejectsInvalidExponentsAndWeights) {
    EXPECT_THROW(ModeNorm(1.0), InvalidArgument);
    EXPECT_THROW(ModeNorm(0.5), InvalidArgument);
    EXPECT_THROW(ModeNorm(std::numeric_limits<double>::infinity()), InvalidArgument);
    EXPECT_THROW(ModeNorm(2.0, Vector{{1.0, -1.0}}), InvalidArgument);
    EXPECT_THROW(AmbientNorm({ModeNorm(2.0), ModeNorm(3.0)}), InvalidArgument);
    EXPECT_THROW(AmbientNorm::uniform(1.0), InvalidArgument);
}

TEST(AmbientNorm, DualNormOfModeDualityMap) {
    const ModeNorm m(3.0, Vector{{1.0, 2.0, 0.5}});
    const Vector v{{1.0, -2.0, 0.25}};
    const Vector f = m.duality_map(v);
    EXPECT_NEAR(v.dot(f), m(v) * m(v), 1e-13);
    EXPECT_NEAR(m.dual(f), m(v), 1e-13);
}

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("tdf_test_" + name);
}

} // namespace

TEST(TensorIo, RoundtripIsBitIdentical) {
    std::mt19937_64 gen(12);
    const DenseTensor t = random_tensor(gen, Shape{3, 4, 2});
    const auto path = temp_file("roundtrip.json");
    write_tensor(t, path);
    const DenseTensor back = read_tensor(path);
    EXPECT_EQ(back.shape(), t.shape());
    for (Index i = 0; i < t.size(); ++i)
        EXPECT_EQ(std::bit_cast<std::uint64_t>(back.data()[i]), std::bit_cast<std::uint64_t>(t.data()[i]));
    std::filesystem::remove(path);
}

TEST(TensorIo, MalformedFiles) {
    const auto path = temp_file("bad.json");
    write_text(path, R"({"dims":[2,2],"data":[1,2,3]})");
    EXPECT_THROW(read_tensor(path), FormatError);
    write_text(path, R"({"dims":[],"data":[]})");
    EXPECT_THROW(read_tensor(path), FormatError);
    write_text(path, R"({"dims":[2,2],"data":[1,2,3,"x"]})");
    EXPECT_THROW(read_tensor(path), FormatError);
    write_text(path, R"({"dims":[2,2],)");
    EXPECT_THROW(read_tensor(path), FormatError);
    std::filesystem::remove(path);
    EXPECT_THROW(read_tensor(temp_file("does_not_exist.json")), IoError);
}
