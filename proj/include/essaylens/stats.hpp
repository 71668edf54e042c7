// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace essaylens {

/// One (document x scoring model) observation.
struct StatRecord {
    double y = 0.0;          ///< predicted score
    std::string genre;       ///< A
    std::string prompt;      ///< S, nested in A
    std::string respondent;  ///< B
    std::string model;       ///< C
    double word_count = 1.0; ///< D
    std::string testbed;     ///< E
};

/// Columns Y, A, S, B, C, D, E.
std::vector<StatRecord> parse_stat_records(std::string_view csv, const std::string& source = "<memory>");
std::string stat_records_to_csv(const std::vector<StatRecord>& records);

/// A model term: a main effect or an interaction of categorical factors
/// among {A, B, C, E}, or the continuous covariate D on its own.
struct Term {
    std::string factors; ///< e.g. "A", "AB", "ABC", "D"

    std::string name() const; ///< "A", "A:B", ...
    friend bool operator==(const Term&, const Term&) = default;
};

struct ModelFormula {
    std::vector<Term> terms;
    bool random_prompt = false; ///< random intercept for S nested in A

    /// A + B + C + D + E + A:B + A:C + B:C + A:B:C with the random prompt intercept.
    static ModelFormula full();
    /// Parses e.g. "A + B + A:B + D"; "1" or "" means intercept only. "(1|S)" adds the random intercept.
    static ModelFormula parse(std::string_view text);
    std::string str() const;
};

struct TermBlock {
    Term term;
    Eigen::Index first_column = 0;
    Eigen::Index columns = 0;
};

struct DesignMatrix {
    Eigen::MatrixXd x; ///< column 0 is the intercept
    std::vector<std::string> column_names;
    std::vector<TermBlock> blocks;
    std::vector<std::string> warnings;
    double d_mean = 0.0;  ///< scaling constants of D (raw = mean + scale * standardized)
    double d_scale = 1.0;
};

/// Effects (sum-to-zero) coding: the last sorted level of each factor gets -1.
/// Interaction columns are products of the main-effect columns.
DesignMatrix build_design_matrix(const std::vector<StatRecord>& records, const ModelFormula& formula);

struct OlsFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd residuals;
    double rss = 0.0;
    Eigen::Index df_residual = 0;
};

/// Least squares by column-pivoted QR. Exact rank deficiency is an error that
/// lists the dependent columns.
OlsFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& column_names = {});

struct AnovaRow {
    std::string term;
    double ss = 0.0;
    double ms = 0.0;
    double num_df = 0.0;
    double den_df = 0.0;
    double f = 0.0;
    double p = 1.0;
};

struct AnovaTable {
    std::vector<AnovaRow> rows;
    std::optional<AnovaRow> residual;
    std::string method;
};

/// Upper tail of the F(d1, d2) distribution via the regularized incomplete beta.
double f_distribution_sf(double f, double d1, double d2);

AnovaTable anova_type3(const DesignMatrix& design, const Eigen::VectorXd& y);
/// Sequential sums of squares in formula order.
AnovaTable anova_type1(const DesignMatrix& design, const Eigen::VectorXd& y);

Eigen::VectorXd response_vector(const std::vector<StatRecord>& records);

struct VarianceComponents {
    double sigma2_group = 0.0;    ///< prompt intercept variance
    double sigma2_residual = 0.0;
    double gamma = 0.0;           ///< sigma2_group / sigma2_residual
    bool boundary = false;        ///< estimate sits on a search bound
    double reml_log_likelihood = 0.0;
    int evaluations = 0;
};

struct MixedFit {
    VarianceComponents variance;
    Eigen::VectorXd coefficients;
    std::vector<std::string> column_names;
    AnovaTable anova;
};

struct RemlOptions {
    double log_gamma_min = -12.0;
    double log_gamma_max = 12.0;
    int max_iterations = 200;
};

/// REML fit of y = X b + Z u + e with one random intercept per group, by a
/// bounded Brent search on log(gamma) with GLS solved in closed form per group.
MixedFit fit_random_intercept(const DesignMatrix& design, const Eigen::VectorXd& y,
                              const std::vector<std::string>& groups, const RemlOptions& options = {});

/// Uses S as the grouping factor; checks that each S belongs to a single A.
MixedFit fit_random_intercept(const std::vector<StatRecord>& records, const ModelFormula& formula,
                              const RemlOptions& options = {});

struct CellMean {
    std::vector<std::string> levels;
    double mean = 0.0;
    std::size_t n = 0;
    double stddev = 0.0; ///< sample standard deviation, 0 for single observations
};

/// `factors` is a non-empty subset of "ABC" in any order, e.g. "BC".
std::vector<CellMean> interaction_cell_means(const std::vector<StatRecord>& records, std::string_view factors);

std::string anova_to_csv(const AnovaTable& table);
std::string cell_means_to_csv(const std::vector<CellMean>& cells, std::string_view factors);
std::string variance_components_to_csv(const VarianceComponents& vc);

} // namespace essaylens
