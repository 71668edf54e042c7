// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#include "essaylens/error.hpp"
#include "essaylens/stats.hpp"

#include "f_oracle.hpp"

#include <doctest.h>

#include <random>

using namespace essaylens;

namespace {

StatRecord rec(double y, std::string a, std::string b = "H", std::string c = "m1", std::string s = "", double d = 1.0) {
    StatRecord r;
    r.y = y;
    r.genre = std::move(a);
    r.respondent = std::move(b);
    r.model = std::move(c);
    r.prompt = s.empty() ? r.genre + "_p" : std::move(s);
    r.word_count = d;
    r.testbed = "t";
    return r;
}

const AnovaRow& row(const AnovaTable& t, const std::string& term) {
    for (const auto& r : t.rows) {
        if (r.term == term) return r;
    }
    FAIL("missing term " << term);
    throw;
}

std::vector<StatRecord> balanced_2x2(std::uint64_t seed, int reps) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<StatRecord> out;
    for (const char* a : {"arg", "narr"})
        for (const char* b : {"H", "M"})
            for (int i = 0; i < reps; ++i) {
                const double mu = (std::string(a) == "arg" ? 1.0 : 0.0) + (std::string(b) == "M" ? 0.5 : 0.0);
                out.push_back(rec(mu + noise(rng), a, b));
            }
    return out;
}

} // namespace

TEST_CASE("one-way ANOVA closed form") {
    std::vector<StatRecord> r{rec(1, "g1"), rec(2, "g1"), rec(3, "g1"), rec(3, "g2"), rec(4, "g2"), rec(5, "g2")};
    const auto f = ModelFormula::parse("A");
    const auto d = build_design_matrix(r, f);
    const auto t = anova_type3(d, response_vector(r));
    const auto& a = row(t, "A");
    CHECK(a.ss == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(a.num_df == 1);
    CHECK(a.den_df == 4);
    CHECK(a.f == doctest::Approx(6.0).epsilon(1e-12));
    REQUIRE(t.residual.has_value());
    CHECK(t.residual->ss == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(a.p == doctest::Approx(oracle::f_upper_tail(6.0, 1, 4)).epsilon(1e-6));
    CHECK(a.p == doctest::Approx(0.07048399691021996).epsilon(1e-10));
}

TEST_CASE("F upper tail agrees with quadrature and frozen reference values") {
    CHECK(f_distribution_sf(2.5, 3, 20) == doctest::Approx(0.0888437519376892).epsilon(1e-10));
    CHECK(f_distribution_sf(0.7, 5, 12) == doctest::Approx(0.6339620939846786).epsilon(1e-10));
    for (double f : {0.1, 0.9, 1.7, 4.2, 11.0}) {
        for (auto [d1, d2] : {std::pair{1.0, 4.0}, {2.0, 17.0}, {6.0, 40.0}, {3.0, 909.0}}) {
            CHECK(std::abs(f_distribution_sf(f, d1, d2) - oracle::f_upper_tail(f, d1, d2)) < 1e-6);
        }
    }
    double last = 1.0;
    for (double f = 0.0; f < 20.0; f += 0.5) {
        const double p = f_distribution_sf(f, 3, 30);
        CHECK(p <= last);
        last = p;
    }
}

TEST_CASE("balanced two-way layout: additivity and Type I equals Type III") {
    const auto r = balanced_2x2(4, 6);
    const auto d = build_design_matrix(r, ModelFormula::parse("A + B + A:B"));
    const auto y = response_vector(r);
    const auto t3 = anova_type3(d, y);
    const auto t1 = anova_type1(d, y);
    const double tss = (y.array() - y.mean()).square().sum();
    CHECK(row(t3, "A").ss + row(t3, "B").ss + row(t3, "A:B").ss + t3.residual->ss == doctest::Approx(tss).epsilon(1e-10));
    for (const char* term : {"A", "B", "A:B"}) {
        CHECK(row(t1, term).ss == doctest::Approx(row(t3, term).ss).epsilon(1e-10));
    }
    CHECK(t3.residual->num_df == 20);

    auto shifted = r;
    for (auto& s : shifted) s.y = 3.0 * s.y + 5.0;
    const auto ts = anova_type3(build_design_matrix(shifted, ModelFormula::parse("A + B + A:B")), response_vector(shifted));
    for (const char* term : {"A", "B", "A:B"}) CHECK(row(ts, term).f == doctest::Approx(row(t3, term).f).epsilon(1e-10));
}

TEST_CASE("effects coding") {
    std::vector<StatRecord> r{rec(1, "a"), rec(2, "b"), rec(3, "c")};
    const auto d = build_design_matrix(r, ModelFormula::parse("A"));
    REQUIRE(d.x.cols() == 3);
    Eigen::MatrixXd expected(3, 3);
    expected << 1, 1, 0, 1, 0, 1, 1, -1, -1;
    CHECK(d.x == expected);

    std::vector<StatRecord> r2{rec(1, "a", "H"), rec(2, "a", "M"), rec(3, "b", "H"), rec(4, "b", "M")};
    const auto d2 = build_design_matrix(r2, ModelFormula::parse("A + B + A:B"));
    REQUIRE(d2.x.cols() == 4);
    CHECK(d2.x.col(3) == (d2.x.col(1).array() * d2.x.col(2).array()).matrix());

    std::vector<StatRecord> r3{rec(1, "a", "H"), rec(2, "a", "M"), rec(3, "b", "H"), rec(3.5, "b", "H")};
    const auto d3 = build_design_matrix(r3, ModelFormula::parse("A + B + A:B"));
    REQUIRE(d3.warnings.size() == 1);
    CHECK(d3.warnings[0] == "rank deficiency: empty cell A=b,B=M in term A:B");

    CHECK_THROWS_AS(build_design_matrix({rec(1, "a"), rec(2, "a")}, ModelFormula::parse("A")), ValidationError);
}

TEST_CASE("formula parsing") {
    const auto f = ModelFormula::parse("B + A + A:B + D + (1|A/S)");
    CHECK(f.random_prompt);
    CHECK(f.str() == "Y ~ 1 + B + A + A:B + D + (1|A/S)");
    CHECK(ModelFormula::full().terms.size() == 9);
    CHECK_THROWS_AS(ModelFormula::parse("A:B"), ConfigError);
    CHECK_THROWS_AS(ModelFormula::parse("A + A"), ConfigError);
    CHECK_THROWS_AS(ModelFormula::parse("A + D + A:D"), ConfigError);
}

TEST_CASE("ordinary least squares") {
    Eigen::MatrixXd x(4, 2);
    x << 1, 0, 1, 1, 1, 2, 1, 3;
    Eigen::VectorXd y(4);
    y << 1, 3, 5, 7;
    const auto fit = fit_ols(x, y);
    CHECK(fit.coefficients(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.coefficients(1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.rss < 1e-24);
    CHECK(fit.df_residual == 2);

    y << 1, 2, 2, 5;
    const auto noisy = fit_ols(x, y);
    CHECK((x.transpose() * noisy.residuals).norm() < 1e-12);

    Eigen::MatrixXd dep(4, 3);
    dep << 1, 0, 0, 1, 1, 2, 1, 2, 4, 1, 3, 6;
    try {
        fit_ols(dep, y, {"(Intercept)", "u", "v"});
        FAIL("expected rank deficiency");
    } catch (const NumericError& e) {
        const std::string what = e.what();
        CHECK((what.find("u") != std::string::npos || what.find("v") != std::string::npos));
    }
}

TEST_CASE("REML on two small groups") {
    std::vector<StatRecord> r{rec(1, "a", "H", "m", "s1"), rec(3, "a", "H", "m", "s1"), rec(5, "a", "H", "m", "s2"),
                              rec(7, "a", "H", "m", "s2")};
    ModelFormula f;
    f.random_prompt = true;
    const auto fit = fit_random_intercept(r, f);
    CHECK(fit.variance.sigma2_residual == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(fit.variance.sigma2_group == doctest::Approx(7.0).epsilon(1e-6));
    CHECK_FALSE(fit.variance.boundary);
}

TEST_CASE("REML clamps to zero when groups are identical") {
    std::vector<StatRecord> r;
    for (const char* s : {"s1", "s2", "s3"})
        for (double v : {1.0, 2.0, 4.0}) r.push_back(rec(v, "a", "H", "m", s));
    ModelFormula f;
    f.random_prompt = true;
    const auto fit = fit_random_intercept(r, f);
    CHECK(fit.variance.boundary);
    CHECK(fit.variance.sigma2_group < 1e-8);
    CHECK(fit.variance.sigma2_residual == doctest::Approx(14.0 / 8.0).epsilon(1e-6));
}

TEST_CASE("REML matches the balanced moment estimator and recovers simulated variances") {
    std::mt19937_64 rng(2026);
    std::normal_distribution<double> z(0.0, 1.0);
    const int groups = 200, per = 50;
    const double s2g = 1.0, s2e = 4.0;
    std::vector<StatRecord> r;
    std::vector<double> means(groups, 0.0);
    double grand = 0.0;
    for (int g = 0; g < groups; ++g) {
        const double u = std::sqrt(s2g) * z(rng);
        for (int i = 0; i < per; ++i) {
            const double y = 0.5 + u + std::sqrt(s2e) * z(rng);
            r.push_back(rec(y, "a", "H", "m", "s" + std::to_string(g)));
            means[g] += y / per;
        }
    }
    for (double m : means) grand += m / groups;
    double ssw = 0.0, ssb = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) ssw += std::pow(r[i].y - means[i / per], 2);
    for (double m : means) ssb += per * std::pow(m - grand, 2);
    const double msw = ssw / (groups * (per - 1));
    const double msb = ssb / (groups - 1);

    ModelFormula f;
    f.random_prompt = true;
    const auto fit = fit_random_intercept(r, f);
    CHECK(fit.variance.sigma2_residual == doctest::Approx(msw).epsilon(1e-6));
    CHECK(fit.variance.sigma2_group == doctest::Approx((msb - msw) / per).epsilon(1e-6));
    CHECK(std::abs(fit.variance.sigma2_residual - s2e) < 0.1 * s2e);
    CHECK(std::abs(fit.variance.sigma2_group - s2g) < 0.1 * s2g);
}

TEST_CASE("between-prompt terms use the group-level denominator") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<StatRecord> r;
    for (int s = 0; s < 8; ++s) {
        const std::string genre = s < 4 ? "arg" : "narr";
        const double u = z(rng);
        for (const char* b : {"H", "M"})
            for (int i = 0; i < 5; ++i) r.push_back(rec(u + (b[0] == 'M' ? 0.7 : 0.0) + z(rng), genre, b, "m", "s" + std::to_string(s)));
    }
    const auto fit = fit_random_intercept(r, ModelFormula::parse("A + B + (1|S)"));
    CHECK(row(fit.anova, "A").den_df == 6);
    CHECK(row(fit.anova, "B").den_df == 80 - 9);
    CHECK_THROWS_AS(fit_random_intercept([&] {
                        auto bad = r;
                        bad[0].genre = "narr";
                        return bad;
                    }(), ModelFormula::parse("A + B + (1|S)")),
                    ValidationError);
}

TEST_CASE("cell means") {
    std::vector<StatRecord> r{rec(1, "a", "H"), rec(3, "a", "H"), rec(5, "a", "M"), rec(2, "b", "H")};
    const auto cells = interaction_cell_means(r, "AB");
    REQUIRE(cells.size() == 3);
    CHECK(cells[0].levels == std::vector<std::string>{"a", "H"});
    CHECK(cells[0].mean == 2.0);
    CHECK(cells[0].n == 2);
    CHECK(cells[0].stddev == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(cells[1].stddev == 0.0);
    const auto ba = interaction_cell_means(r, "BA");
    CHECK(ba.size() == 3);
}

TEST_CASE("record CSV round-trip and validation") {
    std::vector<StatRecord> r{rec(0.25, "arg", "H", "knn", "arg_1", 120), rec(0.5, "narr", "GPT-4", "bert", "narr_2", 80)};
    const auto back = parse_stat_records(stat_records_to_csv(r));
    REQUIRE(back.size() == 2);
    CHECK(back[1].respondent == "GPT-4");
    CHECK(back[0].word_count == 120);
    CHECK_THROWS_AS(parse_stat_records("Y,A,S,B,C,D\n1,a,s,b,c,3\n"), ValidationError);
    CHECK_THROWS_AS(parse_stat_records("Y,A,S,B,C,D,E\n1,a,s,b,c,0,t\n"), ValidationError);
}
