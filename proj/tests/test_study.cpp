#include <gtest/gtest.h>

#include <cmath>

#include "logfem/study.hpp"

using namespace logfem;

namespace {

StudyConfig small(std::vector<int> ns, SolverPath path = SolverPath::SineFast) {
    StudyConfig c;
    c.n_list = std::move(ns);
    c.path = path;
    return c;
}

}  // namespace

TEST(Manufactured, DefaultValues) {
    const auto m = default_manufactured();
    EXPECT_NEAR(m.F(0.5, 0.5), 3.0 * kPi2, 1e-12);
    EXPECT_NEAR(m.F_tilde(0.5, 0.5), 2.0 * kPi2, 1e-12);
    EXPECT_NEAR(m.F_tilde(0.5, 0.5), 19.739, 1e-3);
    EXPECT_NEAR(3.0 * kPi2 / std::cosh(0.5 * kPi), 11.801, 1e-3);
    const auto hyp = check_hypotheses(m);
    EXPECT_TRUE(hyp.pass());
    EXPECT_LE(hyp.operator_defect, 1e-10);
    EXPECT_LE(hyp.pde_defect, 1e-10);
}

TEST(Manufactured, HypothesisViolationsDetected) {
    Manufactured bad{"shifted", [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y) + 1.0; },
                     [](double x, double y) { return 3.0 * kPi2 * std::sin(kPi * x) * std::sin(kPi * y); }};
    EXPECT_FALSE(check_hypotheses(bad).pass());
    EXPECT_THROW(run_lower_bound_study(bad, small({8})), std::invalid_argument);

    Manufactured off_centre{"off-centre max", [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); },
                            [](double x, double y) { return std::sin(kPi * x) * std::sin(2 * kPi * y); }};
    EXPECT_FALSE(check_hypotheses(off_centre).pass());
}

TEST(TildeF, BoundHoldsAnalyticallyAndDiscretely) {
    const auto t = check_tilde_F_bound(default_manufactured(), 64);
    EXPECT_TRUE(t.holds());
    EXPECT_NEAR(t.analytic, 2.0 * kPi2, 1e-12);
    EXPECT_LE(t.discrete_rel_diff, 1e-3);
}

TEST(Fit, RecoversExactLine) {
    const std::vector<int> ns{8, 16, 32, 64};
    std::vector<double> ys;
    for (int n : ns) ys.push_back(0.3 * std::log(double(n)) + 1.25);
    const auto f = fit_log(ns, ys);
    EXPECT_NEAR(f.a, 0.3, 1e-13);
    EXPECT_NEAR(f.b, 1.25, 1e-13);
    EXPECT_LE(f.max_rel_residual, 1e-13);
    EXPECT_THROW(fit_log({8}, {1.0}), std::invalid_argument);
}

TEST(Studies, RejectBadNList) {
    const auto m = default_manufactured();
    EXPECT_THROW(run_lower_bound_study(m, small({8, 7})), std::invalid_argument);
    EXPECT_THROW(run_lower_bound_study(m, small({16, 8})), std::invalid_argument);
    EXPECT_THROW(run_lower_bound_study(m, small({})), std::invalid_argument);
}

TEST(Studies, RecordsCarryResidualAndAreSorted) {
    const auto rep = run_lower_bound_study(default_manufactured(), small({8, 16, 32}));
    ASSERT_EQ(rep.records.size(), 3u);
    for (std::size_t a = 0; a < rep.records.size(); ++a) {
        const auto& r = rep.records[a];
        if (a) {
            EXPECT_GT(r.N, rep.records[a - 1].N);
        }
        EXPECT_GT(r.residual, 0.0);
        EXPECT_LE(r.residual, kStudyTol);
        EXPECT_DOUBLE_EQ(r.s, r.E / (r.h * r.h));
        EXPECT_DOUBLE_EQ(r.r, r.s / std::log(double(r.N)));
        EXPECT_LE(r.E_mid, r.E);
    }
    ASSERT_TRUE(rep.fit.has_value());
    ASSERT_TRUE(rep.c_star_estimate.has_value());
    EXPECT_FALSE(rep.provenance.config_hash.empty());
}

TEST(Studies, Deterministic) {
    const auto m = default_manufactured();
    const auto a = run_lower_bound_study(m, small({8, 16}));
    const auto b = run_lower_bound_study(m, small({8, 16}));
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_EQ(a.records[i].E, b.records[i].E);
        EXPECT_EQ(a.records[i].arg_i, b.records[i].arg_i);
    }
    EXPECT_EQ(a.provenance.config_hash, b.provenance.config_hash);
}

TEST(Studies, TighterToleranceChangesErrorByLessThanOnePercent) {
    // the iterative path is the one whose answer depends on tol
    const auto m = default_manufactured();
    auto cfg = small({8, 16}, SolverPath::Cg);
    cfg.tol = kCgTol;
    const auto base = run_lower_bound_study(m, cfg);
    cfg.tol = kCgTol * 1e-2;
    const auto tight = run_lower_bound_study(m, cfg);
    for (std::size_t i = 0; i < base.records.size(); ++i)
        EXPECT_LT(std::abs(base.records[i].E - tight.records[i].E), 0.01 * base.records[i].E);
}

TEST(Studies, FemPathMatchesFdPath) {
    const auto m = default_manufactured();
    const auto fd = run_lower_bound_study(m, small({4, 8, 16}));
    const auto direct = run_lower_bound_study(m, small({4, 8}, SolverPath::Direct));
    auto cg_cfg = small({16}, SolverPath::Cg);
    cg_cfg.tol = 1e-12;
    const auto cg = run_lower_bound_study(m, cg_cfg);
    EXPECT_NEAR(direct.records[0].E, fd.records[0].E, 1e-12);
    EXPECT_NEAR(direct.records[1].E, fd.records[1].E, 1e-12);
    EXPECT_NEAR(cg.records[0].E, fd.records[2].E, 1e-9);
}

TEST(Studies, NoQuadFastPathMatchesFemAssembly) {
    const auto m = default_manufactured();
    const auto fast = run_noquad_study(m, small({8}));
    const auto direct = run_noquad_study(m, small({8}, SolverPath::Direct));
    EXPECT_NEAR(fast.records[0].E, direct.records[0].E, 1e-12);
    EXPECT_EQ(fast.load, "exact");
    EXPECT_FALSE(fast.provenance.quadrature.empty());
}

TEST(Studies, ControlRequiresFdScheme) {
    EXPECT_THROW(run_control_study(default_manufactured(), small({8}, SolverPath::Cg)), std::invalid_argument);
}

TEST(Studies, ControlIsSecondOrder) {
    const auto rep = run_control_study(default_manufactured(), small({16, 32, 64}));
    EXPECT_NEAR(rep.records[1].E / rep.records[2].E, 4.0, 0.2);
    EXPECT_EQ(rep.weight, "unit");
}

TEST(Separability, DegenerateAndExactCases) {
    const auto m = default_manufactured();
    const auto rep = run_separability_check(m, small({2, 4, 8, 16}));
    ASSERT_EQ(rep.separability.size(), 4u);
    for (const auto& r : rep.separability) {
        EXPECT_LE(r.exact_discrepancy, 1e-9) << "N=" << r.N;
        EXPECT_GE(r.q, 0.0);
    }
}

TEST(Green, StudyFitPositive) {
    const auto rep = run_green_study(small({2, 8, 16, 32}));
    EXPECT_NEAR(rep.green.front().G_centre, 0.25, 1e-15);
    ASSERT_TRUE(rep.fit.has_value());
    EXPECT_GT(rep.fit->a, 0.0);
}

TEST(CentreTerm, IdentitiesAndPositiveRatios) {
    const auto rep = run_lemma3_check(default_manufactured(), small({8, 16, 32}));
    for (const auto& r : rep.lemma3) {
        EXPECT_LE(r.green_identity_defect, 1e-10);
        EXPECT_GT(r.ratio, 0.0);
        EXPECT_GT(r.iterm, 0.0);
    }
}
