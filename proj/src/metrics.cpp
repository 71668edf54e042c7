// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#include "essaylens/metrics.hpp"

#include "essaylens/error.hpp"
#include "essaylens/text_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace essaylens {

void ScorePairs::validate() const {
    if (gold.size() != pred.size()) throw ValidationError("gold and predicted scores differ in length");
    if (!doc_ids.empty() && doc_ids.size() != gold.size()) throw ValidationError("doc ids differ in length");
    if (gold.size() < 2) throw ValidationError("need at least two score pairs");
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (!std::isfinite(gold[i]) || !std::isfinite(pred[i])) {
            throw ValidationError("non-finite score at position " + std::to_string(i));
        }
    }
}

QwkBinning QwkBinning::equal_width(int bins) {
    if (bins < 2) throw ConfigError("QWK needs at least two bins");
    QwkBinning b;
    b.kind = Kind::EqualWidth;
    b.bins = bins;
    return b;
}

QwkBinning QwkBinning::native(double min, double max) {
    if (!(max > min) || min != std::floor(min) || max != std::floor(max)) {
        throw ConfigError("native QWK scale needs integer bounds with min < max");
    }
    QwkBinning b;
    b.kind = Kind::Native;
    b.native_min = min;
    b.native_max = max;
    b.bins = static_cast<int>(max - min) + 1;
    return b;
}

int QwkBinning::bin_count() const { return bins; }

int QwkBinning::to_bin(double x) const {
    x = std::clamp(x, 0.0, 1.0);
    if (kind == Kind::Native) {
        return static_cast<int>(std::lround(x * (native_max - native_min)));
    }
    return std::min(static_cast<int>(std::floor(x * bins)), bins - 1);
}

std::string QwkBinning::describe() const {
    if (kind == Kind::Native) {
        return "native:" + format_double(native_min) + "-" + format_double(native_max);
    }
    return std::to_string(bins);
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) throw NumericError("correlation undefined for a zero-variance input");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(const std::vector<double>& x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(average_ranks(x), average_ranks(y));
}

double quadratic_weighted_kappa(const std::vector<int>& gold, const std::vector<int>& pred, int k) {
    if (k < 2) throw ConfigError("QWK needs at least two categories");
    if (gold.size() != pred.size() || gold.empty()) throw ValidationError("QWK inputs must be non-empty and aligned");
    const auto K = static_cast<std::size_t>(k);
    std::vector<double> observed(K * K, 0.0);
    std::vector<double> row(K, 0.0);
    std::vector<double> col(K, 0.0);
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (gold[i] < 0 || gold[i] >= k || pred[i] < 0 || pred[i] >= k) {
            throw ValidationError("QWK label out of range at position " + std::to_string(i));
        }
        observed[gold[i] * K + pred[i]] += 1.0;
        row[gold[i]] += 1.0;
        col[pred[i]] += 1.0;
    }
    const double n = static_cast<double>(gold.size());
    const double denom_w = static_cast<double>((k - 1) * (k - 1));
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = 0; j < K; ++j) {
            const double d = static_cast<double>(i) - static_cast<double>(j);
            const double w = d * d / denom_w;
            num += w * observed[i * K + j];
            den += w * row[i] * col[j] / n;
        }
    }
    if (den == 0.0) {
        if (num == 0.0) return 1.0;
        throw NumericError("QWK undefined: expected disagreement is zero");
    }
    return 1.0 - num / den;
}

MetricReport evaluate_scores(const ScorePairs& pairs, const QwkBinning& binning) {
    pairs.validate();
    MetricReport r;
    r.n = pairs.gold.size();
    r.bin_count = binning.bin_count();
    double se = 0.0;
    double ae = 0.0;
    for (std::size_t i = 0; i < r.n; ++i) {
        const double d = pairs.pred[i] - pairs.gold[i];
        se += d * d;
        ae += std::abs(d);
    }
    r.mse = se / static_cast<double>(r.n);
    r.mae = ae / static_cast<double>(r.n);

    std::vector<int> gb(r.n);
    std::vector<int> pb(r.n);
    for (std::size_t i = 0; i < r.n; ++i) {
        gb[i] = binning.to_bin(pairs.gold[i]);
        pb[i] = binning.to_bin(pairs.pred[i]);
    }
    try {
        r.qwk = quadratic_weighted_kappa(gb, pb, binning.bin_count());
    } catch (const NumericError&) {
        r.qwk = std::numeric_limits<double>::quiet_NaN();
        r.degenerate.push_back("QWK");
    }
    try {
        r.pcc = pearson(pairs.gold, pairs.pred);
    } catch (const NumericError&) {
        r.degenerate.push_back("PCC");
    }
    try {
        r.src = spearman(pairs.gold, pairs.pred);
    } catch (const NumericError&) {
        r.degenerate.push_back("SRC");
    }
    return r;
}

MetricReport evaluate_scores(const ScorePairs& pairs, int bins) {
    return evaluate_scores(pairs, QwkBinning::equal_width(bins));
}

std::vector<Prediction> parse_predictions(std::string_view jsonl, const std::string& source) {
    std::vector<Prediction> out;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < jsonl.size()) {
        auto nl = jsonl.find('\n', pos);
        if (nl == std::string_view::npos) nl = jsonl.size();
        auto line = trim(jsonl.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        const auto where = source + ":" + std::to_string(line_no);
        Prediction p;
        try {
            auto obj = nlohmann::json::parse(line);
            p.doc_id = obj.at("doc_id").get<std::string>();
            p.model_id = obj.at("model_id").get<std::string>();
            p.fold = obj.at("fold").get<int>();
            p.score = obj.at("score").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(where + ": " + e.what());
        }
        if (!std::isfinite(p.score)) throw ValidationError(where + ": score is not finite");
        if (p.fold < 0) throw ValidationError(where + ": negative fold");
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
    std::string content;
    try {
        content = read_file(path);
    } catch (const ValidationError&) {
        throw DependencyError("cannot read predictions " + path.string());
    }
    return parse_predictions(content, path.string());
}

std::string serialize_predictions(const std::vector<Prediction>& predictions) {
    std::string out;
    for (const auto& p : predictions) {
        nlohmann::ordered_json obj;
        obj["doc_id"] = p.doc_id;
        obj["model_id"] = p.model_id;
        obj["fold"] = p.fold;
        obj["score"] = p.score;
        out += obj.dump();
        out.push_back('\n');
    }
    return out;
}

std::string metrics_to_csv(const std::vector<NamedReport>& reports) {
    CsvWriter w;
    w.row({"model", "MSE", "MAE", "QWK", "PCC", "SRC", "n", "qwk_bins"});
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& [model, r] : reports) {
        w.row({model, format_double(r.mse), format_double(r.mae),
               std::isnan(r.qwk) ? std::string() : format_double(r.qwk), opt(r.pcc), opt(r.src),
               std::to_string(r.n), std::to_string(r.bin_count)});
    }
    return w.str();
}

} // namespace essaylens
