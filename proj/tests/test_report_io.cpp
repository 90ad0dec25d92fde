#include <gtest/gtest.h>

#include <sstream>

#include "logfem/report_io.hpp"

using namespace logfem;

namespace {

StudyConfig cfg(std::vector<int> ns) {
    StudyConfig c;
    c.n_list = std::move(ns);
    return c;
}

void expect_same(const ErrorRecord& a, const ErrorRecord& b) {
    EXPECT_EQ(a.N, b.N);
    EXPECT_EQ(a.h, b.h);
    EXPECT_EQ(a.E, b.E);
    EXPECT_EQ(a.s, b.s);
    EXPECT_EQ(a.r, b.r);
    EXPECT_EQ(a.residual, b.residual);
    EXPECT_EQ(a.E_mid, b.E_mid);
    EXPECT_EQ(a.arg_i, b.arg_i);
    EXPECT_EQ(a.arg_j, b.arg_j);
    EXPECT_EQ(a.arg_k, b.arg_k);
}

void expect_same(const StudyReport& a, const StudyReport& b) {
    EXPECT_EQ(a.schema_version, b.schema_version);
    EXPECT_EQ(a.study, b.study);
    EXPECT_EQ(a.manufactured, b.manufactured);
    EXPECT_EQ(a.weight, b.weight);
    EXPECT_EQ(a.load, b.load);
    EXPECT_EQ(a.solver, b.solver);
    EXPECT_EQ(a.tol, b.tol);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) expect_same(a.records[i], b.records[i]);
    ASSERT_EQ(a.green.size(), b.green.size());
    for (std::size_t i = 0; i < a.green.size(); ++i) {
        EXPECT_EQ(a.green[i].N, b.green[i].N);
        EXPECT_EQ(a.green[i].G_centre, b.green[i].G_centre);
        EXPECT_EQ(a.green[i].residual, b.green[i].residual);
    }
    ASSERT_EQ(a.separability.size(), b.separability.size());
    for (std::size_t i = 0; i < a.separability.size(); ++i) {
        EXPECT_EQ(a.separability[i].q, b.separability[i].q);
        EXPECT_EQ(a.separability[i].exact_discrepancy, b.separability[i].exact_discrepancy);
    }
    ASSERT_EQ(a.lemma3.size(), b.lemma3.size());
    for (std::size_t i = 0; i < a.lemma3.size(); ++i) {
        EXPECT_EQ(a.lemma3[i].max_err, b.lemma3[i].max_err);
        EXPECT_EQ(a.lemma3[i].iterm_ratio, b.lemma3[i].iterm_ratio);
        EXPECT_EQ(a.lemma3[i].barrier_excess, b.lemma3[i].barrier_excess);
    }
    ASSERT_EQ(a.fit.has_value(), b.fit.has_value());
    if (a.fit) {
        EXPECT_EQ(a.fit->a, b.fit->a);
        EXPECT_EQ(a.fit->b, b.fit->b);
        EXPECT_EQ(a.fit->max_rel_residual, b.fit->max_rel_residual);
    }
    EXPECT_EQ(a.c_star_estimate, b.c_star_estimate);
    EXPECT_EQ(a.provenance.config_hash, b.provenance.config_hash);
    EXPECT_EQ(a.provenance.timestamp, b.provenance.timestamp);
    EXPECT_EQ(a.provenance.quadrature, b.provenance.quadrature);
}

StudyReport json_round_trip(const StudyReport& r) {
    std::stringstream ss;
    write_json(ss, r);
    return read_json(ss);
}

StudyReport csv_round_trip(const StudyReport& r) {
    std::stringstream ss;
    write_csv(ss, r);
    StudyReport back = r;
    read_csv(ss, back);
    return back;
}

}  // namespace

TEST(Json, RoundTripEveryStudyKind) {
    const auto m = default_manufactured();
    for (const auto& r : {run_lower_bound_study(m, cfg({8, 16})), run_noquad_study(m, cfg({8})),
                          run_green_study(cfg({2, 8, 16})), run_separability_check(m, cfg({4, 8})),
                          run_lemma3_check(m, cfg({8, 16}))}) {
        SCOPED_TRACE(r.study);
        const auto back = json_round_trip(r);
        expect_same(r, back);
    }
}

TEST(Json, SchemaVersionChecked) {
    auto r = run_green_study(cfg({4}));
    nlohmann::json j = r;
    EXPECT_EQ(j.at("schema_version"), kReportSchemaVersion);
    j["schema_version"] = 99;
    std::stringstream ss(j.dump());
    EXPECT_THROW(read_json(ss), std::runtime_error);
}

TEST(Csv, RoundTripEveryStudyKind) {
    const auto m = default_manufactured();
    for (const auto& r : {run_control_study(m, cfg({8, 16})), run_green_study(cfg({2, 8})),
                          run_separability_check(m, cfg({4, 8})), run_lemma3_check(m, cfg({8}))}) {
        SCOPED_TRACE(r.study);
        expect_same(r, csv_round_trip(r));
    }
}

TEST(Csv, ErrorStudyColumns) {
    const auto r = run_lower_bound_study(default_manufactured(), cfg({8}));
    std::stringstream ss;
    write_csv(ss, r);
    std::string header;
    std::getline(ss, header);
    EXPECT_EQ(header.rfind("N,h,E,s,r,residual", 0), 0u);
}

TEST(Csv, HeaderMismatchRejected) {
    StudyReport r;
    r.study = "green";
    std::stringstream ss("N,h,E\n8,0.125,1\n");
    EXPECT_THROW(read_csv(ss, r), std::runtime_error);
}

TEST(Svg, ContainsPlot) {
    const auto r = run_green_study(cfg({4, 8, 16}));
    std::stringstream ss;
    write_svg(ss, r);
    const auto s = ss.str();
    EXPECT_NE(s.find("<svg"), std::string::npos);
    EXPECT_NE(s.find("<polyline"), std::string::npos);
    EXPECT_NE(s.find("</svg>"), std::string::npos);
}

TEST(Format, SeventeenDigits) {
    EXPECT_EQ(std::stod(fmt17(0.1)), 0.1);
    EXPECT_EQ(fmt17(0.1), "0.10000000000000001");
}
