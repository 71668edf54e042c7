// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#include "essaylens/stats.hpp"

#include "essaylens/error.hpp"
#include "essaylens/text_io.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace essaylens {

namespace {

const std::string& categorical(const StatRecord& r, char factor) {
    switch (factor) {
    case 'A': return r.genre;
    case 'B': return r.respondent;
    case 'C': return r.model;
    case 'E': return r.testbed;
    case 'S': return r.prompt;
    default: break;
    }
    throw ConfigError(std::string("unknown factor '") + factor + "'");
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace

// ---------------------------------------------------------------------------
// Records

std::vector<StatRecord> parse_stat_records(std::string_view csv, const std::string& source) {
    auto rows = parse_csv(csv);
    if (rows.empty()) throw ValidationError(source + ": missing header");
    const std::vector<std::string> expected{"Y", "A", "S", "B", "C", "D", "E"};
    std::vector<int> col(expected.size(), -1);
    for (std::size_t i = 0; i < rows[0].fields.size(); ++i) {
        auto it = std::find(expected.begin(), expected.end(), std::string(trim(rows[0].fields[i])));
        if (it != expected.end()) col[static_cast<std::size_t>(it - expected.begin())] = static_cast<int>(i);
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (col[i] < 0) throw ValidationError(source + ": missing column '" + expected[i] + "'");
    }
    std::vector<StatRecord> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        const auto where = source + ":" + std::to_string(rows[r].line);
        if (f.size() != rows[0].fields.size()) throw ValidationError(where + ": wrong field count");
        StatRecord rec;
        auto y = parse_double(f[col[0]]);
        auto d = parse_double(f[col[5]]);
        if (!y || !std::isfinite(*y)) throw ValidationError(where + ": field 'Y' is not a number");
        if (!d || !(*d >= 1.0)) throw ValidationError(where + ": field 'D' must be a number >= 1");
        rec.y = *y;
        rec.genre = f[col[1]];
        rec.prompt = f[col[2]];
        rec.respondent = f[col[3]];
        rec.model = f[col[4]];
        rec.word_count = *d;
        rec.testbed = f[col[6]];
        out.push_back(std::move(rec));
    }
    return out;
}

std::string stat_records_to_csv(const std::vector<StatRecord>& records) {
    CsvWriter w;
    w.row({"Y", "A", "S", "B", "C", "D", "E"});
    for (const auto& r : records) {
        w.row({format_double(r.y), r.genre, r.prompt, r.respondent, r.model, format_double(r.word_count), r.testbed});
    }
    return w.str();
}

// ---------------------------------------------------------------------------
// Formula

std::string Term::name() const {
    std::string out;
    for (char c : factors) {
        if (!out.empty()) out.push_back(':');
        out.push_back(c);
    }
    return out;
}

ModelFormula ModelFormula::full() {
    ModelFormula f;
    for (const char* t : {"A", "B", "C", "D", "E", "AB", "AC", "BC", "ABC"}) f.terms.push_back(Term{t});
    f.random_prompt = true;
    return f;
}

ModelFormula ModelFormula::parse(std::string_view text) {
    ModelFormula f;
    std::string s(text);
    std::string token;
    std::stringstream ss(s);
    std::set<std::string> seen;
    while (std::getline(ss, token, '+')) {
        std::string t;
        for (char c : token) {
            if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
        }
        if (t.empty() || t == "1") continue;
        if (t == "(1|S)" || t == "(1|A/S)" || t == "(1|S:A)" || t == "A/S") {
            f.random_prompt = true;
            continue;
        }
        std::string factors;
        for (char c : t) {
            if (c == ':' || c == '*') continue;
            if (std::string_view("ABCDE").find(c) == std::string_view::npos) {
                throw ConfigError("formula term '" + t + "' uses an unknown factor");
            }
            factors.push_back(c);
        }
        std::sort(factors.begin(), factors.end());
        if (std::adjacent_find(factors.begin(), factors.end()) != factors.end()) {
            throw ConfigError("formula term '" + t + "' repeats a factor");
        }
        if (factors.size() > 1 && factors.find('D') != std::string::npos) {
            throw ConfigError("the covariate D cannot enter an interaction");
        }
        if (!seen.insert(factors).second) throw ConfigError("formula term '" + t + "' appears twice");
        f.terms.push_back(Term{factors});
    }
    for (const auto& term : f.terms) {
        if (term.factors.size() < 2) continue;
        for (char c : term.factors) {
            if (!seen.count(std::string(1, c))) {
                throw ConfigError("interaction " + term.name() + " needs main effect " + std::string(1, c));
            }
        }
    }
    return f;
}

std::string ModelFormula::str() const {
    std::string out = "Y ~ 1";
    for (const auto& t : terms) out += " + " + t.name();
    if (random_prompt) out += " + (1|A/S)";
    return out;
}

// ---------------------------------------------------------------------------
// Design matrix

DesignMatrix build_design_matrix(const std::vector<StatRecord>& records, const ModelFormula& formula) {
    if (records.empty()) throw ValidationError("no records to fit");
    const auto n = static_cast<Eigen::Index>(records.size());

    std::set<char> main;
    for (const auto& t : formula.terms) {
        if (t.factors.size() == 1) main.insert(t.factors[0]);
    }
    for (const auto& t : formula.terms) {
        for (char c : t.factors) {
            if (!main.count(c)) throw ConfigError("interaction " + t.name() + " uses undeclared factor " + std::string(1, c));
        }
    }

    DesignMatrix dm;
    std::map<char, std::vector<std::string>> levels;
    std::map<char, Eigen::MatrixXd> coded;
    std::map<char, std::vector<std::string>> coded_names;
    for (char f : main) {
        if (f == 'D') continue;
        std::set<std::string> lv;
        for (const auto& r : records) lv.insert(categorical(r, f));
        if (lv.size() < 2) {
            throw ValidationError(std::string("factor ") + f + " has a single level; drop it from the formula");
        }
        levels[f].assign(lv.begin(), lv.end());
        const auto& L = levels[f];
        const auto k = static_cast<Eigen::Index>(L.size());
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, k - 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& v = categorical(records[static_cast<std::size_t>(i)], f);
            const auto idx = static_cast<Eigen::Index>(std::lower_bound(L.begin(), L.end(), v) - L.begin());
            if (idx == k - 1) m.row(i).setConstant(-1.0);
            else m(i, idx) = 1.0;
        }
        coded[f] = std::move(m);
        for (Eigen::Index j = 0; j < k - 1; ++j) {
            coded_names[f].push_back(std::string(1, f) + "[" + L[static_cast<std::size_t>(j)] + "]");
        }
    }

    std::vector<Eigen::MatrixXd> blocks;
    std::vector<std::vector<std::string>> block_names;
    for (const auto& term : formula.terms) {
        if (term.factors == "D") {
            double mean = 0.0;
            for (const auto& r : records) {
                if (!(r.word_count >= 1.0)) throw ValidationError("word count D must be >= 1");
                mean += r.word_count;
            }
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (const auto& r : records) var += (r.word_count - mean) * (r.word_count - mean);
            const double sd = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
            if (!(sd > 0.0)) throw ValidationError("covariate D is constant; drop it from the formula");
            dm.d_mean = mean;
            dm.d_scale = sd;
            Eigen::MatrixXd col(n, 1);
            for (Eigen::Index i = 0; i < n; ++i) col(i, 0) = (records[static_cast<std::size_t>(i)].word_count - mean) / sd;
            blocks.push_back(std::move(col));
            block_names.push_back({"D"});
            continue;
        }
        Eigen::MatrixXd cur = coded.at(term.factors[0]);
        std::vector<std::string> names = coded_names.at(term.factors[0]);
        for (std::size_t fi = 1; fi < term.factors.size(); ++fi) {
            const auto& next = coded.at(term.factors[fi]);
            const auto& next_names = coded_names.at(term.factors[fi]);
            Eigen::MatrixXd prod(n, cur.cols() * next.cols());
            std::vector<std::string> pn;
            for (Eigen::Index a = 0; a < cur.cols(); ++a) {
                for (Eigen::Index b = 0; b < next.cols(); ++b) {
                    prod.col(a * next.cols() + b) = cur.col(a).cwiseProduct(next.col(b));
                    pn.push_back(names[static_cast<std::size_t>(a)] + ":" + next_names[static_cast<std::size_t>(b)]);
                }
            }
            cur = std::move(prod);
            names = std::move(pn);
        }
        if (term.factors.size() > 1) {
            std::set<std::vector<std::string>> present;
            for (const auto& r : records) {
                std::vector<std::string> key;
                for (char c : term.factors) key.push_back(categorical(r, c));
                present.insert(std::move(key));
            }
            std::vector<std::size_t> pos(term.factors.size(), 0);
            for (;;) {
                std::vector<std::string> key;
                for (std::size_t i = 0; i < pos.size(); ++i) key.push_back(levels[term.factors[i]][pos[i]]);
                if (!present.count(key)) {
                    std::string cell;
                    for (std::size_t i = 0; i < key.size(); ++i) {
                        if (i) cell += ",";
                        cell += std::string(1, term.factors[i]) + "=" + key[i];
                    }
                    dm.warnings.push_back("rank deficiency: empty cell " + cell + " in term " + term.name());
                }
                std::size_t i = 0;
                while (i < pos.size() && ++pos[i] == levels[term.factors[i]].size()) pos[i++] = 0;
                if (i == pos.size()) break;
            }
        }
        blocks.push_back(std::move(cur));
        block_names.push_back(std::move(names));
    }

    Eigen::Index p = 1;
    for (const auto& b : blocks) p += b.cols();
    dm.x.resize(n, p);
    dm.x.col(0).setOnes();
    dm.column_names.push_back("(Intercept)");
    Eigen::Index at = 1;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        dm.x.middleCols(at, blocks[b].cols()) = blocks[b];
        dm.blocks.push_back({formula.terms[b], at, blocks[b].cols()});
        dm.column_names.insert(dm.column_names.end(), block_names[b].begin(), block_names[b].end());
        at += blocks[b].cols();
    }
    return dm;
}

Eigen::VectorXd response_vector(const std::vector<StatRecord>& records) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(records.size()));
    for (std::size_t i = 0; i < records.size(); ++i) y(static_cast<Eigen::Index>(i)) = records[i].y;
    return y;
}

// ---------------------------------------------------------------------------
// OLS and fixed-effects ANOVA

OlsFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& column_names) {
    if (x.rows() != y.size()) throw ValidationError("design and response lengths differ");
    if (x.rows() < x.cols()) {
        throw NumericError("design has " + std::to_string(x.rows()) + " rows but " + std::to_string(x.cols()) +
                           " columns");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < x.cols()) {
        std::string cols;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index i = qr.rank(); i < x.cols(); ++i) {
            const auto c = perm(i);
            if (!cols.empty()) cols += ", ";
            cols += static_cast<std::size_t>(c) < column_names.size() ? column_names[static_cast<std::size_t>(c)]
                                                                       : "column " + std::to_string(c);
        }
        throw NumericError("rank-deficient design; dependent columns: " + cols);
    }
    OlsFit fit;
    fit.coefficients = qr.solve(y);
    fit.residuals = y - x * fit.coefficients;
    fit.rss = fit.residuals.squaredNorm();
    fit.df_residual = x.rows() - x.cols();
    return fit;
}

double f_distribution_sf(double f, double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0) || std::isnan(f)) return kNaN;
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    return boost::math::ibeta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

namespace {

Eigen::MatrixXd drop_columns(const Eigen::MatrixXd& x, Eigen::Index first, Eigen::Index count) {
    Eigen::MatrixXd out(x.rows(), x.cols() - count);
    out.leftCols(first) = x.leftCols(first);
    out.rightCols(x.cols() - first - count) = x.rightCols(x.cols() - first - count);
    return out;
}

std::vector<std::string> drop_names(const std::vector<std::string>& names, Eigen::Index first, Eigen::Index count) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        if (c < first || c >= first + count) out.push_back(names[i]);
    }
    return out;
}

AnovaRow make_row(const std::string& term, double ss, double df, double den_df, double ms_residual) {
    AnovaRow row;
    row.term = term;
    row.ss = std::max(ss, 0.0);
    row.num_df = df;
    row.den_df = den_df;
    row.ms = row.ss / df;
    row.f = ms_residual > 0.0 ? row.ms / ms_residual : kNaN;
    row.p = f_distribution_sf(row.f, df, den_df);
    return row;
}

} // namespace

AnovaTable anova_type3(const DesignMatrix& design, const Eigen::VectorXd& y) {
    const auto full = fit_ols(design.x, y, design.column_names);
    if (full.df_residual <= 0) throw NumericError("zero residual degrees of freedom");
    const double df_res = static_cast<double>(full.df_residual);
    const double ms_res = full.rss / df_res;
    AnovaTable table;
    table.method = "OLS type III";
    for (const auto& b : design.blocks) {
        const auto reduced = fit_ols(drop_columns(design.x, b.first_column, b.columns), y,
                                     drop_names(design.column_names, b.first_column, b.columns));
        table.rows.push_back(make_row(b.term.name(), reduced.rss - full.rss, static_cast<double>(b.columns), df_res,
                                      ms_res));
    }
    AnovaRow resid;
    resid.term = "Residuals";
    resid.ss = full.rss;
    resid.num_df = df_res;
    resid.ms = ms_res;
    resid.f = kNaN;
    resid.p = kNaN;
    table.residual = resid;
    return table;
}

AnovaTable anova_type1(const DesignMatrix& design, const Eigen::VectorXd& y) {
    const auto full = fit_ols(design.x, y, design.column_names);
    if (full.df_residual <= 0) throw NumericError("zero residual degrees of freedom");
    const double df_res = static_cast<double>(full.df_residual);
    const double ms_res = full.rss / df_res;
    AnovaTable table;
    table.method = "OLS type I";
    Eigen::Index cols = 1;
    double prev = fit_ols(design.x.leftCols(1), y).rss;
    for (const auto& b : design.blocks) {
        cols += b.columns;
        const double cur = fit_ols(design.x.leftCols(cols), y, design.column_names).rss;
        table.rows.push_back(make_row(b.term.name(), prev - cur, static_cast<double>(b.columns), df_res, ms_res));
        prev = cur;
    }
    AnovaRow resid;
    resid.term = "Residuals";
    resid.ss = full.rss;
    resid.num_df = df_res;
    resid.ms = ms_res;
    resid.f = kNaN;
    resid.p = kNaN;
    table.residual = resid;
    return table;
}

// ---------------------------------------------------------------------------
// Random intercept REML

namespace {

struct RemlState {
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    Eigen::MatrixXd xtx;
    Eigen::VectorXd xty;
    double yty = 0.0;
    std::vector<double> group_n;
    std::vector<Eigen::VectorXd> group_sx;
    std::vector<double> group_sy;

    struct Eval {
        bool ok = false;
        double objective = 0.0; ///< REML log-likelihood up to a constant
        double quad = 0.0;      ///< r' H^-1 r
        Eigen::VectorXd beta;
        Eigen::MatrixXd a_inv;
    };

    Eval evaluate(double gamma, bool want_inverse = false) const {
        Eval e;
        Eigen::MatrixXd a = xtx;
        Eigen::VectorXd b = xty;
        double c = yty;
        double logdet_h = 0.0;
        for (std::size_t g = 0; g < group_n.size(); ++g) {
            const double w = gamma / (1.0 + gamma * group_n[g]);
            a.noalias() -= w * group_sx[g] * group_sx[g].transpose();
            b -= w * group_sy[g] * group_sx[g];
            c -= w * group_sy[g] * group_sy[g];
            logdet_h += std::log1p(gamma * group_n[g]);
        }
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() != Eigen::Success) return e;
        e.beta = llt.solve(b);
        e.quad = c - b.dot(e.beta);
        if (!(e.quad > 0.0)) return e;
        double logdet_a = 0.0;
        for (Eigen::Index i = 0; i < a.rows(); ++i) logdet_a += 2.0 * std::log(llt.matrixL()(i, i));
        e.objective = -0.5 * (logdet_h + logdet_a + static_cast<double>(n - p) * std::log(e.quad));
        if (want_inverse) e.a_inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
        e.ok = true;
        return e;
    }
};

Eigen::Index matrix_rank(const Eigen::MatrixXd& m) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
    qr.setThreshold(1e-10);
    return qr.rank();
}

} // namespace

MixedFit fit_random_intercept(const DesignMatrix& design, const Eigen::VectorXd& y,
                              const std::vector<std::string>& groups, const RemlOptions& options) {
    const Eigen::MatrixXd& x = design.x;
    const auto n = x.rows();
    const auto p = x.cols();
    if (static_cast<Eigen::Index>(groups.size()) != n || y.size() != n) {
        throw ValidationError("grouping vector is not aligned with the design");
    }
    std::vector<std::string> levels(groups.begin(), groups.end());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    if (levels.size() < 2) throw ValidationError("random intercept needs at least two groups");
    std::vector<std::size_t> gidx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        gidx[static_cast<std::size_t>(i)] = static_cast<std::size_t>(
            std::lower_bound(levels.begin(), levels.end(), groups[static_cast<std::size_t>(i)]) - levels.begin());
    }
    std::vector<std::size_t> sizes(levels.size(), 0);
    for (auto g : gidx) ++sizes[g];
    if (*std::max_element(sizes.begin(), sizes.end()) < 2) {
        throw ValidationError("random intercept needs a group with at least two observations");
    }

    // Rank check (and a readable error) before any search.
    const auto ols = fit_ols(x, y, design.column_names);
    if (ols.df_residual <= 0) throw NumericError("zero residual degrees of freedom");

    RemlState st;
    st.n = n;
    st.p = p;
    st.xtx = x.transpose() * x;
    st.xty = x.transpose() * y;
    st.yty = y.squaredNorm();
    st.group_n.assign(levels.size(), 0.0);
    st.group_sx.assign(levels.size(), Eigen::VectorXd::Zero(p));
    st.group_sy.assign(levels.size(), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto g = gidx[static_cast<std::size_t>(i)];
        st.group_n[g] += 1.0;
        st.group_sx[g] += x.row(i).transpose();
        st.group_sy[g] += y(i);
    }

    MixedFit fit;
    fit.column_names = design.column_names;
    auto& vc = fit.variance;

    const double scale = std::max(1.0, st.yty);
    double gamma = 0.0;
    if (ols.rss <= 1e-14 * scale) {
        // Data fitted exactly by the fixed effects: both components vanish.
        vc.boundary = true;
        gamma = 0.0;
    } else {
        std::vector<std::pair<double, double>> trace;
        auto neg = [&](double t) {
            const auto e = st.evaluate(std::exp(t));
            const double v = e.ok ? -e.objective : std::numeric_limits<double>::max();
            trace.emplace_back(t, e.ok ? e.objective : -std::numeric_limits<double>::infinity());
            return v;
        };
        std::uintmax_t iters = static_cast<std::uintmax_t>(options.max_iterations);
        const int bits = std::numeric_limits<double>::digits / 2;
        auto [t_best, f_best] = boost::math::tools::brent_find_minima(neg, options.log_gamma_min,
                                                                      options.log_gamma_max, bits, iters);
        vc.evaluations = static_cast<int>(trace.size());
        if (iters >= static_cast<std::uintmax_t>(options.max_iterations)) {
            std::ostringstream msg;
            msg << "REML search did not converge after " << iters << " iterations; trace (log_gamma, loglik):";
            for (auto [t, v] : trace) msg << " (" << t << ", " << v << ")";
            throw NumericError(msg.str());
        }
        const auto at_zero = st.evaluate(0.0);
        const double width = options.log_gamma_max - options.log_gamma_min;
        const bool lower = t_best - options.log_gamma_min < 1e-4 * width;
        const bool upper = options.log_gamma_max - t_best < 1e-4 * width;
        if (at_zero.ok && (lower || at_zero.objective >= -f_best)) {
            gamma = 0.0;
            vc.boundary = true;
        } else {
            gamma = std::exp(t_best);
            vc.boundary = upper;
        }
    }

    const auto e = st.evaluate(gamma, true);
    const double df_res = static_cast<double>(n - p);
    if (e.ok) {
        vc.sigma2_residual = e.quad / df_res;
        vc.reml_log_likelihood = e.objective;
        fit.coefficients = e.beta;
    } else {
        vc.sigma2_residual = 0.0;
        vc.reml_log_likelihood = kNaN;
        fit.coefficients = ols.coefficients;
    }
    vc.gamma = gamma;
    vc.sigma2_group = gamma * vc.sigma2_residual;

    // Containment degrees of freedom: terms whose columns are constant within
    // every group are tested against the group stratum, the rest against the
    // within-group residual.
    auto constant_within_groups = [&](const TermBlock& b) {
        for (Eigen::Index c = b.first_column; c < b.first_column + b.columns; ++c) {
            std::vector<double> first(levels.size(), kNaN);
            for (Eigen::Index i = 0; i < n; ++i) {
                auto& f = first[gidx[static_cast<std::size_t>(i)]];
                if (std::isnan(f)) f = x(i, c);
                else if (f != x(i, c)) return false;
            }
        }
        return true;
    };
    std::vector<bool> between(design.blocks.size(), false);
    Eigen::MatrixXd between_x = x.col(0);
    for (std::size_t b = 0; b < design.blocks.size(); ++b) {
        between[b] = constant_within_groups(design.blocks[b]);
        if (between[b]) {
            Eigen::MatrixXd grown(n, between_x.cols() + design.blocks[b].columns);
            grown << between_x, x.middleCols(design.blocks[b].first_column, design.blocks[b].columns);
            between_x = std::move(grown);
        }
    }
    const double between_df = static_cast<double>(levels.size()) - static_cast<double>(matrix_rank(between_x));
    Eigen::MatrixXd xz(n, p + static_cast<Eigen::Index>(levels.size()));
    xz.leftCols(p) = x;
    xz.rightCols(static_cast<Eigen::Index>(levels.size())).setZero();
    for (Eigen::Index i = 0; i < n; ++i) xz(i, p + static_cast<Eigen::Index>(gidx[static_cast<std::size_t>(i)])) = 1.0;
    const double within_df = static_cast<double>(n - matrix_rank(xz));

    fit.anova.method = "REML random intercept; Wald F; containment df";
    for (std::size_t bi = 0; bi < design.blocks.size(); ++bi) {
        const auto& b = design.blocks[bi];
        AnovaRow row;
        row.term = b.term.name();
        row.num_df = static_cast<double>(b.columns);
        row.den_df = between[bi] ? between_df : within_df;
        if (e.ok && vc.sigma2_residual > 0.0) {
            const Eigen::VectorXd beta_t = fit.coefficients.segment(b.first_column, b.columns);
            const Eigen::MatrixXd cov_t = e.a_inv.block(b.first_column, b.first_column, b.columns, b.columns);
            const double wald = beta_t.dot(cov_t.ldlt().solve(beta_t)) / vc.sigma2_residual;
            row.f = wald / row.num_df;
            row.ms = row.f * vc.sigma2_residual;
            row.ss = row.ms * row.num_df;
            row.p = row.den_df > 0.0 ? f_distribution_sf(row.f, row.num_df, row.den_df) : kNaN;
        } else {
            row.f = kNaN;
            row.p = kNaN;
        }
        fit.anova.rows.push_back(row);
    }
    AnovaRow resid;
    resid.term = "Residuals";
    resid.num_df = within_df;
    resid.ms = vc.sigma2_residual;
    resid.ss = vc.sigma2_residual * df_res;
    resid.f = kNaN;
    resid.p = kNaN;
    fit.anova.residual = resid;
    return fit;
}

MixedFit fit_random_intercept(const std::vector<StatRecord>& records, const ModelFormula& formula,
                              const RemlOptions& options) {
    std::map<std::string, std::string> prompt_genre;
    for (const auto& r : records) {
        auto [it, inserted] = prompt_genre.emplace(r.prompt, r.genre);
        if (!inserted && it->second != r.genre) {
            throw ValidationError("prompt " + r.prompt + " appears under genres " + it->second + " and " + r.genre +
                                  "; S must be nested in A");
        }
    }
    const auto design = build_design_matrix(records, formula);
    std::vector<std::string> groups;
    groups.reserve(records.size());
    // Prompt ids only need to be unique within a genre.
    for (const auto& r : records) groups.push_back(r.genre + "/" + r.prompt);
    return fit_random_intercept(design, response_vector(records), groups, options);
}

// ---------------------------------------------------------------------------
// Cell means

std::vector<CellMean> interaction_cell_means(const std::vector<StatRecord>& records, std::string_view factors) {
    if (factors.empty()) throw ConfigError("cell means need at least one factor");
    std::set<char> seen;
    for (char c : factors) {
        if (c != 'A' && c != 'B' && c != 'C') throw ConfigError(std::string("cell means factor must be A, B or C, got ") + c);
        if (!seen.insert(c).second) throw ConfigError("cell means factor repeated");
    }
    std::map<std::vector<std::string>, std::vector<double>> cells;
    for (const auto& r : records) {
        std::vector<std::string> key;
        for (char c : factors) key.push_back(categorical(r, c));
        cells[key].push_back(r.y);
    }
    std::vector<CellMean> out;
    for (const auto& [key, ys] : cells) {
        CellMean cm;
        cm.levels = key;
        cm.n = ys.size();
        double sum = 0.0;
        for (double v : ys) sum += v;
        cm.mean = sum / static_cast<double>(cm.n);
        if (cm.n > 1) {
            double ss = 0.0;
            for (double v : ys) ss += (v - cm.mean) * (v - cm.mean);
            cm.stddev = std::sqrt(ss / static_cast<double>(cm.n - 1));
        }
        out.push_back(std::move(cm));
    }
    return out;
}

std::string anova_to_csv(const AnovaTable& table) {
    CsvWriter w;
    w.row({"term", "SS", "MS", "NumDF", "DenDF", "F", "Pr(>F)", "method"});
    auto num = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
    for (const auto& r : table.rows) {
        w.row({r.term, num(r.ss), num(r.ms), num(r.num_df), num(r.den_df), num(r.f), num(r.p), table.method});
    }
    if (table.residual) {
        const auto& r = *table.residual;
        w.row({r.term, num(r.ss), num(r.ms), num(r.num_df), "", "", "", table.method});
    }
    return w.str();
}

std::string cell_means_to_csv(const std::vector<CellMean>& cells, std::string_view factors) {
    CsvWriter w;
    std::vector<std::string> header;
    for (char c : factors) header.emplace_back(1, c);
    header.insert(header.end(), {"mean", "n", "std"});
    w.row(header);
    for (const auto& c : cells) {
        std::vector<std::string> row = c.levels;
        row.push_back(format_double(c.mean));
        row.push_back(std::to_string(c.n));
        row.push_back(format_double(c.stddev));
        w.row(row);
    }
    return w.str();
}

std::string variance_components_to_csv(const VarianceComponents& vc) {
    CsvWriter w;
    w.row({"component", "variance"});
    w.row({"prompt(genre)", format_double(vc.sigma2_group)});
    w.row({"residual", format_double(vc.sigma2_residual)});
    w.row({"gamma", format_double(vc.gamma)});
    w.row({"boundary", vc.boundary ? "1" : "0"});
    w.row({"reml_loglik", format_double(vc.reml_log_likelihood)});
    return w.str();
}

} // namespace essaylens
