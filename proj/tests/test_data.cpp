#include "lokal/data.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

using namespace lokal;

TEST(ParseLibsvm, FillsAbsentIndicesWithZero) {
    const Dataset ds = parse_libsvm("+1 1:0.5 3:1.0\n");
    ASSERT_EQ(ds.n(), 1);
    ASSERT_EQ(ds.d(), 3);
    EXPECT_DOUBLE_EQ(ds.features(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(ds.features(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(ds.features(0, 2), 1.0);
    EXPECT_EQ(ds.labels[0], 1.0);
}

TEST(ParseLibsvm, InfersWidthAcrossRows) {
    const Dataset ds = parse_libsvm("-1 2:2\n+1 1:1\n");
    ASSERT_EQ(ds.n(), 2);
    ASSERT_EQ(ds.d(), 2);
    EXPECT_EQ(ds.features(0, 0), 0.0);
    EXPECT_EQ(ds.features(0, 1), 2.0);
    EXPECT_EQ(ds.features(1, 0), 1.0);
    EXPECT_EQ(ds.features(1, 1), 0.0);
    EXPECT_EQ(ds.labels[0], -1.0);
    EXPECT_EQ(ds.labels[1], 1.0);
}

TEST(ParseLibsvm, RejectsNonIncreasingIndices) {
    EXPECT_THROW(parse_libsvm("+1 3:1 2:1\n"), parse_error);
    EXPECT_THROW(parse_libsvm("+1 2:1 2:1\n"), parse_error);
}

TEST(ParseLibsvm, ReportsLineNumber) {
    try {
        parse_libsvm("+1 1:1\n\n# comment\n-1 1:x\n");
        FAIL() << "expected parse_error";
    } catch (const parse_error& e) {
        EXPECT_EQ(e.line(), 4u);
    }
}

TEST(ParseLibsvm, SkipsCommentsAndBlankLines) {
    const Dataset ds = parse_libsvm("# header\n\n+1 1:1 # trailing\n   \n-1 2:3\n");
    EXPECT_EQ(ds.n(), 2);
    EXPECT_EQ(ds.d(), 2);
}

TEST(ParseLibsvm, EmptyInputIsAnError) {
    EXPECT_THROW(parse_libsvm(""), error);
    EXPECT_THROW(parse_libsvm("# only a comment\n\n"), error);
}

TEST(ParseLibsvm, RejectsOtherLabelsWithoutMap) {
    EXPECT_THROW(parse_libsvm("2 1:1\n"), parse_error);
    EXPECT_THROW(parse_libsvm("0 1:1\n"), parse_error);
    EXPECT_THROW(parse_libsvm("abc 1:1\n"), parse_error);
}

TEST(ParseLibsvm, AppliesLabelMap) {
    ParseOptions opts;
    opts.label_map = parse_label_map("2:-1,4:+1");
    const Dataset ds = parse_libsvm("2 1:1\n4 1:2\n", opts);
    EXPECT_EQ(ds.labels[0], -1.0);
    EXPECT_EQ(ds.labels[1], 1.0);
    EXPECT_THROW(parse_libsvm("3 1:1\n", opts), parse_error);
}

TEST(ParseLibsvm, RejectsMalformedEntries) {
    EXPECT_THROW(parse_libsvm("+1 0:1\n"), parse_error);
    EXPECT_THROW(parse_libsvm("+1 1-1\n"), parse_error);
    EXPECT_THROW(parse_libsvm("+1 1:nan\n"), parse_error);
}

TEST(ParseLibsvm, MinFeaturesWidensMatrix) {
    ParseOptions opts;
    opts.min_features = 5;
    EXPECT_EQ(parse_libsvm("+1 1:1\n-1 2:1\n", opts).d(), 5);
}

TEST(LabelMap, RejectsBadTargets) {
    EXPECT_THROW(parse_label_map("2:3"), error);
    EXPECT_THROW(parse_label_map("2"), error);
}

TEST(WriteLibsvm, RoundTripsExactly) {
    Rng rng(3);
    Matrix x(20, 6);
    Vector y(20);
    for (Index j = 0; j < 20; ++j) {
        y[j] = j % 3 == 0 ? -1.0 : 1.0;
        for (Index c = 0; c < 6; ++c) x(j, c) = rng.below(3) == 0 ? 0.0 : rng.normal() * 1e3;
    }
    x(0, 5) = 1.0; // keep the last column present
    const Dataset ds(x, y);
    std::ostringstream out;
    write_libsvm(out, ds);
    const Dataset back = parse_libsvm(out.str());
    EXPECT_EQ(back.features, ds.features);
    EXPECT_EQ(back.labels, ds.labels);
}

TEST(Scaling, MinmaxMapsRangeEndpoints) {
    Matrix x(2, 1);
    x << 0, 10;
    const Dataset ds = scale_features(Dataset(x, Vector::Ones(2)), ScaleMode::minmax);
    EXPECT_DOUBLE_EQ(ds.features(0, 0), -1.0);
    EXPECT_DOUBLE_EQ(ds.features(1, 0), 1.0);
}

TEST(Scaling, ConstantColumnMapsToZero) {
    Matrix x(3, 1);
    x << 5, 5, 5;
    for (auto mode : {ScaleMode::minmax, ScaleMode::zscore}) {
        const Dataset ds = scale_features(Dataset(x, Vector::Ones(3)), mode);
        EXPECT_EQ(ds.features, Matrix::Zero(3, 1));
    }
}

TEST(Scaling, ZscoreUsesPopulationDeviation) {
    Matrix x(2, 1);
    x << 1, 3;
    Vector y(2);
    y << 1, -1;
    const Dataset ds = scale_features(Dataset(x, y), ScaleMode::zscore);
    EXPECT_DOUBLE_EQ(ds.features(0, 0), -1.0);
    EXPECT_DOUBLE_EQ(ds.features(1, 0), 1.0);
    EXPECT_EQ(ds.labels, y);
}

TEST(Scaling, ZscoreNeedsTwoRows) {
    EXPECT_THROW(Scaler::fit(Matrix::Ones(1, 2), ScaleMode::zscore), error);
}

TEST(Scaling, NoneIsIdentity) {
    Rng rng(1);
    Matrix x(4, 3);
    for (Index j = 0; j < 4; ++j)
        for (Index c = 0; c < 3; ++c) x(j, c) = rng.normal();
    EXPECT_EQ(scale_features(Dataset(x, Vector::Ones(4)), ScaleMode::none).features, x);
}

TEST(Scaling, FitOnOneSetAppliesUnchangedToAnother) {
    Matrix train(2, 1), test(2, 1);
    train << 0, 2;
    test << 100, -100;
    const Scaler s = Scaler::fit(train, ScaleMode::minmax);
    const Matrix out = s.apply(test);
    EXPECT_DOUBLE_EQ(out(0, 0), 99.0);
    EXPECT_DOUBLE_EQ(out(1, 0), -101.0);
    EXPECT_DOUBLE_EQ(s.apply(train)(1, 0), 1.0);
}

TEST(ScaleMode, ParsesNames) {
    EXPECT_EQ(parse_scale_mode("minmax"), ScaleMode::minmax);
    EXPECT_EQ(parse_scale_mode("zscore"), ScaleMode::zscore);
    EXPECT_EQ(parse_scale_mode("none"), ScaleMode::none);
    EXPECT_THROW(parse_scale_mode("unit"), error);
}

namespace {

Dataset numbered(Index n) {
    Matrix x(n, 1);
    Vector y(n);
    for (Index j = 0; j < n; ++j) {
        x(j, 0) = static_cast<double>(j);
        y[j] = j % 2 == 0 ? 1.0 : -1.0;
    }
    return Dataset(x, y);
}

} // namespace

TEST(Split, SizesFollowFraction) {
    auto [train, test] = split(numbered(4), SplitSpec{0.75, 9});
    EXPECT_EQ(train.n(), 3);
    EXPECT_EQ(test.n(), 1);
}

TEST(Split, BreastCancerSizes) {
    auto idx = split_indices(683, SplitSpec{0.75, 1});
    EXPECT_EQ(idx.train.size(), 512u);
    EXPECT_EQ(idx.test.size(), 171u);
}

TEST(Split, SameSeedSamePartition) {
    const Dataset ds = numbered(50);
    auto a = split(ds, SplitSpec{0.75, 123});
    auto b = split(ds, SplitSpec{0.75, 123});
    EXPECT_EQ(a.first.features, b.first.features);
    EXPECT_EQ(a.second.features, b.second.features);
    auto c = split(ds, SplitSpec{0.75, 124});
    EXPECT_NE(a.first.features, c.first.features);
}

TEST(Split, PartsAreDisjointAndCover) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const Index n = 2 + static_cast<Index>(seed % 17);
        auto idx = split_indices(n, SplitSpec{0.6, seed});
        std::set<Index> all(idx.train.begin(), idx.train.end());
        all.insert(idx.test.begin(), idx.test.end());
        EXPECT_EQ(static_cast<Index>(all.size()), n);
        EXPECT_EQ(static_cast<Index>(idx.train.size() + idx.test.size()), n);
        EXPECT_EQ(*all.begin(), 0);
        EXPECT_EQ(*all.rbegin(), n - 1);
        EXPECT_FALSE(idx.train.empty());
        EXPECT_FALSE(idx.test.empty());
    }
}

TEST(Split, RowsFollowShuffledOrder) {
    const Dataset ds = numbered(10);
    const auto perm = shuffled_indices(10, 5);
    auto [train, test] = split(ds, SplitSpec{0.7, 5});
    for (Index r = 0; r < train.n(); ++r) EXPECT_EQ(train.features(r, 0), static_cast<double>(perm[static_cast<std::size_t>(r)]));
    for (Index r = 0; r < test.n(); ++r) EXPECT_EQ(test.features(r, 0), static_cast<double>(perm[static_cast<std::size_t>(7 + r)]));
}

TEST(Split, Errors) {
    EXPECT_THROW(split(numbered(1), SplitSpec{0.75, 0}), error);
    EXPECT_THROW(split(numbered(5), SplitSpec{1.0, 0}), error);
    EXPECT_THROW(split(numbered(5), SplitSpec{0.0, 0}), error);
}

TEST(Shuffle, MatchesIndependentFisherYates) {
    // Reference: the standard-specified mt19937_64 seeded with splitmix64(seed).
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xdeadbeefULL}) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        std::mt19937_64 eng(z ^ (z >> 31));
        std::vector<Index> expect(25);
        for (Index j = 0; j < 25; ++j) expect[static_cast<std::size_t>(j)] = j;
        for (Index i = 24; i > 0; --i) {
            const std::uint64_t bound = static_cast<std::uint64_t>(i) + 1;
            const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
            std::uint64_t r;
            do {
                r = eng();
            } while (r >= limit);
            std::swap(expect[static_cast<std::size_t>(i)], expect[r % bound]);
        }
        EXPECT_EQ(shuffled_indices(25, seed), expect);
    }
}

TEST(Shuffle, FrozenPermutation) {
    const std::vector<Index> frozen{9, 8, 6, 4, 7, 1, 3, 0, 2, 5};
    EXPECT_EQ(shuffled_indices(10, 2024), frozen);
}

TEST(Rng, DrawsStayInRange) {
    Rng rng(77);
    for (int k = 0; k < 2000; ++k) {
        EXPECT_LT(rng.below(7), 7u);
        const double u = rng.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
    EXPECT_EQ(rng.below(1), 0u);
}

TEST(Dataset, ValidatesLabelsAndShape) {
    EXPECT_THROW(Dataset(Matrix::Ones(2, 2), Vector::Constant(2, 0.5)), error);
    EXPECT_THROW(Dataset(Matrix::Ones(2, 2), Vector::Ones(3)), error);
    EXPECT_THROW(Dataset(Matrix(0, 2), Vector(0)), error);
    Vector y(2);
    y << 1, -1;
    EXPECT_TRUE(Dataset(Matrix::Ones(2, 1), y).has_both_classes());
    EXPECT_FALSE(Dataset(Matrix::Ones(2, 1), Vector::Ones(2)).has_both_classes());
}
