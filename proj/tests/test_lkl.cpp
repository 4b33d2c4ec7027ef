#include "lokal/lkl.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace lokal;

namespace {

Dataset random_problem(Rng& rng, Index n, Index d) {
    const Matrix x = oracle::random_points(rng, n, d);
    Vector y(n);
    for (Index j = 0; j < n; ++j) y[j] = x(j, 0) * x(j, 0) + 0.5 * x(j, 1) > 0.6 ? 1.0 : -1.0;
    y[0] = 1.0;
    y[n - 1] = -1.0;
    return Dataset(x, y);
}

TrainConfig tight_config() {
    TrainConfig cfg;
    cfg.svm.tol = 1e-8;
    cfg.gate.svr.tol = 1e-8;
    return cfg;
}

double max_abs_diff(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

} // namespace

TEST(Method, ParsesAndPrints) {
    for (Method m : {Method::uniform, Method::lmkl, Method::swmkl, Method::ldmkl, Method::clmkl}) EXPECT_EQ(parse_method(to_string(m)), m);
    EXPECT_THROW(parse_method("gmkl"), error);
    EXPECT_FALSE(is_localized(Method::uniform));
    EXPECT_TRUE(is_localized(Method::ldmkl));
}

TEST(LmklGradient, MatchesFiniteDifferences) {
    Rng rng(70);
    const std::vector<KernelSpec> specs{LinearKernel{}, PolynomialKernel{2, 1.0, 1.0}, GaussianKernel{0.7}};
    for (int t = 0; t < 6; ++t) {
        const Index n = 12, d = 3, m = 2 + t % 2;
        const Matrix x = oracle::random_points(rng, n, d);
        const Vector y = oracle::random_labels(rng, n);
        std::vector<GramMatrix> grams;
        for (Index i = 0; i < m; ++i) grams.push_back(gram(specs[static_cast<std::size_t>(i)], x));
        Vector a(n);
        for (Index j = 0; j < n; ++j) a[j] = y[j] * rng.uniform();
        SoftmaxLinearGating g{oracle::random_points(rng, d, m, 0.5), Vector::Zero(m)};
        for (Index i = 0; i < m; ++i) g.offsets[i] = 0.5 * rng.normal();

        const LmklGradient grad = lmkl_gradient(grams, a, x, g);
        const double h = 1e-5;
        auto check = [&](double analytic, double& entry) {
            const double saved = entry;
            entry = saved + h;
            const double up = lmkl_objective(grams, a, y, x, g);
            entry = saved - h;
            const double down = lmkl_objective(grams, a, y, x, g);
            entry = saved;
            const double numeric = (up - down) / (2.0 * h);
            EXPECT_LE(std::abs(analytic - numeric), 1e-4 * std::max(1.0, std::abs(numeric)));
        };
        for (Index c = 0; c < d; ++c)
            for (Index i = 0; i < m; ++i) check(grad.weights(c, i), g.weights(c, i));
        for (Index i = 0; i < m; ++i) check(grad.offsets[i], g.offsets[i]);
    }
}

TEST(SingleKernel, EveryMethodReducesToOneSvm) {
    Rng rng(71);
    for (int t = 0; t < 3; ++t) {
        const Dataset ds = random_problem(rng, 40, 2);
        const Matrix query = oracle::random_points(rng, 25, 2);
        const std::vector<KernelSpec> one{GaussianKernel{0.5 + rng.uniform()}};
        TrainConfig cfg = tight_config();
        cfg.clmkl.clusters = 1;
        const SvmModel svm = train_svc(gram(one[0], ds.features), ds.labels, cfg.svm);
        const Vector f = predict_decision(svm, gram_cross(one[0], ds.features, query));
        for (Method m : {Method::uniform, Method::lmkl, Method::swmkl, Method::clmkl}) {
            const Vector v = decision_values(train(m, ds, one, cfg), query);
            EXPECT_LE(max_abs_diff(v, f), 1e-6) << to_string(m);
        }
        const LklModel ld = train_ldmkl(ds, one, cfg);
        EXPECT_TRUE(ld.kept_stage1.empty());
        EXPECT_EQ(ld.subsets[0].size(), 40u);
        EXPECT_LE(max_abs_diff(decision_values(ld, query), f.array().tanh().matrix()), 1e-6);
        EXPECT_EQ(predict(ld, query), f.unaryExpr([](double v) { return sign_label(v); }));
    }
}

TEST(Uniform, DuplicatedKernelEqualsSingleKernel) {
    Rng rng(72);
    const Dataset train = random_problem(rng, 30, 2);
    const Matrix query = oracle::random_points(rng, 10, 2);
    const KernelSpec k = PolynomialKernel{2, 1.0, 1.0};
    const TrainConfig cfg = tight_config();
    EXPECT_LE(max_abs_diff(decision_values(train_uniform(train, {k, k}, cfg), query), decision_values(train_uniform(train, {k}, cfg), query)), 1e-6);
}

TEST(Lmkl, OneOuterIterationIsUniformEtaSvm) {
    Rng rng(73);
    const Dataset train = random_problem(rng, 30, 2);
    const std::vector<KernelSpec> specs{LinearKernel{}, GaussianKernel{1.0}};
    TrainConfig cfg = tight_config();
    cfg.lmkl.outer_iters = 1;
    const LklModel model = train_lmkl(train, specs, cfg);
    EXPECT_EQ(model.outer_iterations, 1);
    const KernelBank bank = KernelBank::build(specs, train.features);
    const EtaMatrix eta = EtaMatrix::Constant(30, 2, 0.5);
    const SvmModel svm = train_svc(combined_gram_separable(bank.grams, eta), train.labels, cfg.svm);
    const Matrix query = oracle::random_points(rng, 12, 2);
    const Vector expect = predict_decision(svm, combined_cross_separable(bank.crosses(train.features, query), eta, EtaMatrix::Constant(12, 2, 0.5)));
    EXPECT_LE(max_abs_diff(decision_values(model, query), expect), 1e-9);
}

TEST(Lmkl, GatesStayOnTheSimplex) {
    Rng rng(74);
    const Dataset train = random_problem(rng, 40, 2);
    TrainConfig cfg;
    cfg.lmkl.outer_iters = 15;
    const LklModel model = train_lmkl(train, {LinearKernel{}, GaussianKernel{1.0}}, cfg);
    const Matrix eta = eta_matrix(model.gating, oracle::random_points(rng, 20, 2));
    for (Index j = 0; j < 20; ++j) EXPECT_NEAR(eta.row(j).sum(), 1.0, 1e-12);
    EXPECT_EQ(static_cast<int>(model.objective_trace.size()), model.outer_iterations);
}

TEST(CorrectnessTargets, PerfectClassifierGivesAllOnes) {
    Matrix x(6, 1);
    x << -3, -2, -1, 1, 2, 3;
    Vector y(6);
    y << -1, -1, -1, 1, 1, 1;
    const GramMatrix k = gram(LinearKernel{}, x);
    SvmParams p;
    p.C = 100.0;
    EXPECT_EQ(correctness_targets(train_svc(k, y, p), k, y), Vector::Ones(6));
    SvmModel flipped = train_svc(k, y, p);
    flipped.dual_coef = -flipped.dual_coef;
    flipped.bias = -flipped.bias;
    EXPECT_EQ(correctness_targets(flipped, k, y), Vector::Zero(6));
}

TEST(MedianHeuristic, TwoPoints) {
    Matrix x(2, 1);
    x << 0, 2;
    EXPECT_DOUBLE_EQ(median_heuristic_gamma(x), 1.0 / 8.0);
    EXPECT_DOUBLE_EQ(median_heuristic_gamma(Matrix::Zero(3, 2)), 1.0);
}

TEST(Ldmkl, PredictionMatchesNaiveLoop) {
    Rng rng(75);
    const Dataset train = random_problem(rng, 50, 2);
    const std::vector<KernelSpec> specs{LinearKernel{}, PolynomialKernel{2, 1.0, 1.0}, GaussianKernel{1.0}};
    const LklModel model = train_ldmkl(train, specs, tight_config());
    const auto& gates = std::get<RegressorGating>(model.gating);
    const Matrix query = oracle::random_points(rng, 15, 2);
    const Vector got = decision_values(model, query);
    const Matrix& tx = train.features;
    const Index m = 3;
    for (Index q = 0; q < query.rows(); ++q) {
        const Vector z = query.row(q).transpose();
        Vector raw(m);
        for (Index i = 0; i < m; ++i) {
            const auto& r = gates.regressors[static_cast<std::size_t>(i)];
            double v = r.bias;
            for (Index j = 0; j < tx.rows(); ++j) v += r.dual_coef[j] * oracle::kernel_value(gates.kernels[static_cast<std::size_t>(i)], tx.row(j).transpose(), z);
            raw[i] = std::clamp(v, 1e-6, 1.0);
        }
        const Vector g = raw.array().exp() / raw.array().exp().sum();
        double vote = 0.0;
        for (Index i = 0; i < m; ++i) {
            const auto& f = model.components[static_cast<std::size_t>(i)];
            const auto& rows = model.subsets[static_cast<std::size_t>(i)];
            double mass = 0.0, weighted = 0.0;
            for (std::size_t s = 0; s < rows.size(); ++s) {
                if (std::abs(f.dual_coef[static_cast<Index>(s)]) <= 1e-8) continue;
                mass += std::abs(f.dual_coef[static_cast<Index>(s)]);
                weighted += std::abs(f.dual_coef[static_cast<Index>(s)]) * model.train_gates(rows[s], i);
            }
            const double gbar = weighted / mass;
            double fbar = f.bias;
            for (std::size_t s = 0; s < rows.size(); ++s) {
                const double a = f.dual_coef[static_cast<Index>(s)];
                if (std::abs(a) <= 1e-8) continue;
                fbar += a * model.train_gates(rows[s], i) / gbar * oracle::kernel_value(specs[static_cast<std::size_t>(i)], tx.row(rows[s]).transpose(), z);
            }
            vote += g[i] * std::tanh(fbar);
        }
        EXPECT_NEAR(got[q], vote, 1e-6);
        EXPECT_LE(std::abs(got[q]), 1.0);
    }
}

TEST(Ldmkl, SubsetsFollowGateThreshold) {
    Rng rng(76);
    const Dataset train = random_problem(rng, 60, 2);
    const LklModel model = train_ldmkl(train, {LinearKernel{}, GaussianKernel{2.0}}, TrainConfig{});
    for (Index i = 0; i < 2; ++i) {
        if (std::find(model.kept_stage1.begin(), model.kept_stage1.end(), i) != model.kept_stage1.end()) continue;
        std::vector<Index> expect;
        for (Index j = 0; j < 60; ++j)
            if (model.train_gates(j, i) >= 0.5 - 1e-12) expect.push_back(j);
        EXPECT_EQ(model.subsets[static_cast<std::size_t>(i)], expect);
    }
    for (Index j = 0; j < 60; ++j) EXPECT_NEAR(model.train_gates.row(j).sum(), 1.0, 1e-12);
}

TEST(Clmkl, BetaStaysOnSimplexAndObjectiveNeverDecreases) {
    Rng rng(77);
    for (int t = 0; t < 5; ++t) {
        const Dataset train = random_problem(rng, 16, 2);
        TrainConfig cfg = tight_config();
        cfg.clmkl.clusters = 3;
        cfg.clmkl.outer_iters = 20;
        cfg.clmkl.objective_tol = 1e-12;
        cfg.clmkl.seed = static_cast<std::uint64_t>(t);
        const LklModel model = train_clmkl(train, {LinearKernel{}, PolynomialKernel{2, 1.0, 1.0}, GaussianKernel{1.0}}, cfg);
        const Matrix& beta = std::get<ClusterGating>(model.gating).beta;
        EXPECT_GE(beta.minCoeff(), 0.0);
        for (Index r = 0; r < beta.cols(); ++r) EXPECT_NEAR(beta.col(r).sum(), 1.0, 1e-12);
        const auto& tr = model.objective_trace;
        for (std::size_t s = 1; s < tr.size(); ++s) EXPECT_GE(tr[s], tr[s - 1] - 1e-6);
    }
}

TEST(Clmkl, SingleClusterIsGlobalWeighting) {
    Rng rng(78);
    const Dataset train = random_problem(rng, 30, 2);
    const std::vector<KernelSpec> specs{LinearKernel{}, GaussianKernel{1.0}};
    TrainConfig cfg = tight_config();
    cfg.clmkl.clusters = 1;
    const LklModel model = train_clmkl(train, specs, cfg);
    const Vector w = std::get<ClusterGating>(model.gating).beta.col(0);
    const KernelBank bank = KernelBank::build(specs, train.features);
    const SvmModel svm = train_svc(weighted_gram(bank.grams, w), train.labels, cfg.svm);
    const Matrix query = oracle::random_points(rng, 10, 2);
    const Vector expect = predict_decision(svm, weighted_sum(bank.crosses(train.features, query), w));
    EXPECT_LE(max_abs_diff(decision_values(model, query), expect), 1e-6);
}

TEST(ExponentiatedGradient, MovesTowardLargerGradient) {
    Matrix beta(2, 1);
    beta << 0.5, 0.5;
    Matrix grad(2, 1);
    grad << -1.0, -3.0;
    const Matrix next = exponentiated_gradient_step(beta, grad, 0.5);
    EXPECT_GT(next(0, 0), 0.5);
    EXPECT_NEAR(next.col(0).sum(), 1.0, 1e-15);
    EXPECT_EQ(exponentiated_gradient_step(beta, Matrix::Zero(2, 1), 0.5), beta);
}

TEST(Predictions, MatchNaiveKernelSums) {
    Rng rng(79);
    const Dataset train = random_problem(rng, 30, 2);
    const std::vector<KernelSpec> specs{LinearKernel{}, GaussianKernel{1.0}};
    const Matrix query = oracle::random_points(rng, 8, 2);
    const LklModel model = train_lmkl(train, specs, TrainConfig{});
    const EtaMatrix eta_q = eta_matrix(model.gating, query);
    const auto& f = model.components[0];
    const Vector got = decision_values(model, query);
    for (Index q = 0; q < 8; ++q) {
        double v = f.bias;
        for (Index j = 0; j < 30; ++j)
            for (Index i = 0; i < 2; ++i)
                v += f.dual_coef[j] * model.train_gates(j, i) * eta_q(q, i) *
                     oracle::kernel_value(specs[static_cast<std::size_t>(i)], train.features.row(j).transpose(), query.row(q).transpose());
        EXPECT_NEAR(got[q], v, 1e-9);
    }
}

TEST(SupportFraction, CountsUnionOverComponents) {
    LklModel model;
    model.train_y = Vector::Ones(100);
    EXPECT_EQ(support_fraction(model), 0.0);
    SvmModel a, b;
    a.support_indices = {0, 1, 2};
    b.support_indices = {0, 1, 2, 3};
    model.components = {a, b};
    std::vector<Index> first(10), second(10);
    for (Index j = 0; j < 10; ++j) {
        first[static_cast<std::size_t>(j)] = j;
        second[static_cast<std::size_t>(j)] = 50 + j;
    }
    model.subsets = {first, second};
    EXPECT_DOUBLE_EQ(support_fraction(model), 0.07);
}

TEST(Training, LeavesDatasetUntouched) {
    Rng rng(80);
    const Dataset ds = random_problem(rng, 25, 2);
    const Dataset copy = ds;
    for (Method m : {Method::uniform, Method::lmkl, Method::swmkl, Method::ldmkl, Method::clmkl}) {
        train(m, ds, {LinearKernel{}, GaussianKernel{1.0}});
        EXPECT_EQ(ds.features, copy.features);
        EXPECT_EQ(ds.labels, copy.labels);
    }
}

TEST(Training, RejectsBadInputs) {
    Rng rng(81);
    const Dataset train = random_problem(rng, 10, 2);
    EXPECT_THROW(train_uniform(train, std::vector<KernelSpec>{}), error);
    const Dataset single(train.features, Vector::Ones(10));
    EXPECT_THROW(train_ldmkl(single, {LinearKernel{}}), error);
    const LklModel model = train_uniform(train, {LinearKernel{}});
    EXPECT_THROW(decision_values(model, Matrix::Zero(2, 3)), error);
    EXPECT_THROW(accuracy(Vector::Ones(2), Vector::Ones(3)), error);
    TrainConfig bad;
    bad.clmkl.tau = 0.0;
    EXPECT_THROW(train_clmkl(train, {LinearKernel{}}, bad), error);
}

TEST(Accuracy, CountsMatches) {
    Vector p(4), t(4);
    p << 1, -1, 1, 1;
    t << 1, 1, 1, -1;
    EXPECT_DOUBLE_EQ(accuracy(p, t), 0.5);
}
