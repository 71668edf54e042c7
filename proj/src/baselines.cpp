// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#include "essaylens/baselines.hpp"

#include "essaylens/error.hpp"
#include "essaylens/parallel.hpp"
#include "essaylens/text_io.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <set>

namespace essaylens {

FeatureSpace FeatureSpace::fit(const std::vector<const LayerSet*>& training, const std::vector<std::string>& layers) {
    FeatureSpace fs;
    fs.layers_ = layers;
    std::set<std::string> keys;
    for (const auto* ls : training) {
        for (const auto& name : layers) {
            for (const auto& t : ls->get(name).tokens) keys.insert(name + "=" + t);
        }
    }
    fs.keys_.assign(keys.begin(), keys.end());
    for (std::size_t i = 0; i < fs.keys_.size(); ++i) fs.index_.emplace(fs.keys_[i], static_cast<std::uint32_t>(i));
    return fs;
}

std::optional<std::uint32_t> FeatureSpace::index_of(std::string_view key) const {
    auto it = index_.find(std::string(key));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

namespace {

bool is_terminator(std::string_view t) { return t == "." || t == "!" || t == "?"; }

} // namespace

std::vector<double> lexical_measures(const TokenLayer& word) {
    const double n = static_cast<double>(word.size());
    double chars = 0.0;
    double words = 0.0;
    double sentences = 0.0;
    bool open_sentence = false;
    for (const auto& t : word.tokens) {
        if (is_terminator(t)) {
            sentences += 1.0;
            open_sentence = false;
            continue;
        }
        if (!is_punctuation_token(t)) {
            chars += static_cast<double>(t.size());
            words += 1.0;
            open_sentence = true;
        }
    }
    if (open_sentence || sentences == 0.0) sentences += 1.0;
    return {n, words > 0 ? chars / words : 0.0, sentences, n / sentences};
}

FeatureVector featurize(const LayerSet& layers, const FeatureSpace& space) {
    FeatureVector fv;
    fv.doc_id = layers.doc_id();
    fv.dense = lexical_measures(layers.word());
    std::set<std::uint32_t> present;
    for (const auto& name : space.layers()) {
        for (const auto& t : layers.get(name).tokens) {
            if (auto idx = space.index_of(name + "=" + t)) present.insert(*idx);
        }
    }
    fv.sparse.assign(present.begin(), present.end());
    return fv;
}

ModelSpec::Kind parse_model_kind(std::string_view text) {
    const auto s = to_lower(trim(text));
    if (s == "knn") return ModelSpec::Kind::Knn;
    if (s == "ridge") return ModelSpec::Kind::Ridge;
    if (s == "mean") return ModelSpec::Kind::Mean;
    throw ConfigError("unknown model kind '" + std::string(text) + "'");
}

std::string to_string(ModelSpec::Kind kind) {
    switch (kind) {
    case ModelSpec::Kind::Knn: return "knn";
    case ModelSpec::Kind::Ridge: return "ridge";
    case ModelSpec::Kind::Mean: return "mean";
    }
    return "?";
}

DenseScaler DenseScaler::fit(const std::vector<FeatureVector>& rows) {
    DenseScaler s;
    const std::size_t d = rows.empty() ? 0 : rows.front().dense.size();
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 1.0);
    if (rows.empty()) return s;
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows) {
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += r.dense[j];
    }
    for (auto& m : s.mean) m /= n;
    std::vector<double> var(d, 0.0);
    for (const auto& r : rows) {
        for (std::size_t j = 0; j < d; ++j) var[j] += (r.dense[j] - s.mean[j]) * (r.dense[j] - s.mean[j]);
    }
    for (std::size_t j = 0; j < d; ++j) {
        const double sd = std::sqrt(var[j] / n);
        s.scale[j] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

std::vector<double> DenseScaler::apply(const std::vector<double>& dense) const {
    std::vector<double> out(dense.size());
    for (std::size_t j = 0; j < dense.size(); ++j) out[j] = (dense[j] - mean[j]) / scale[j];
    return out;
}

namespace {

std::size_t symmetric_difference_size(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    std::size_t diff = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) {
            ++diff;
            ++i;
        } else if (*j < *i) {
            ++diff;
            ++j;
        } else {
            ++i;
            ++j;
        }
    }
    return diff + static_cast<std::size_t>(a.end() - i) + static_cast<std::size_t>(b.end() - j);
}

} // namespace

KnnModel::KnnModel(std::vector<FeatureVector> train, std::vector<double> scores, int k)
    : train_(std::move(train)), scores_(std::move(scores)) {
    if (train_.empty()) throw ValidationError("KNN needs a non-empty training set");
    if (k < 1) throw ConfigError("KNN needs k >= 1");
    if (scores_.size() != train_.size()) throw ValidationError("KNN scores do not match training rows");
    scaler_ = DenseScaler::fit(train_);
    for (auto& r : train_) r.dense = scaler_.apply(r.dense);
    k_eff_ = std::min<int>(k, static_cast<int>(train_.size()));
}

double KnnModel::predict(const FeatureVector& x) const {
    const auto dense = scaler_.apply(x.dense);
    struct Candidate {
        double dist2;
        const std::string* id;
        double score;
    };
    std::vector<Candidate> c;
    c.reserve(train_.size());
    for (std::size_t i = 0; i < train_.size(); ++i) {
        double d2 = static_cast<double>(symmetric_difference_size(train_[i].sparse, x.sparse));
        for (std::size_t j = 0; j < dense.size(); ++j) {
            const double diff = train_[i].dense[j] - dense[j];
            d2 += diff * diff;
        }
        c.push_back({d2, &train_[i].doc_id, scores_[i]});
    }
    auto closer = [](const Candidate& a, const Candidate& b) {
        if (a.dist2 != b.dist2) return a.dist2 < b.dist2;
        return *a.id < *b.id;
    };
    std::partial_sort(c.begin(), c.begin() + k_eff_, c.end(), closer);
    double sum = 0.0;
    for (int i = 0; i < k_eff_; ++i) sum += c[i].score;
    return sum / static_cast<double>(k_eff_);
}

KnnModel knn_fit(std::vector<FeatureVector> train, std::vector<double> scores, int k) {
    return KnnModel(std::move(train), std::move(scores), k);
}

double knn_predict(const KnnModel& model, const FeatureVector& x) { return model.predict(x); }

RidgeModel::RidgeModel(const std::vector<FeatureVector>& train, const std::vector<double>& scores,
                       std::size_t sparse_dim, double lambda)
    : sparse_dim_(sparse_dim) {
    if (train.empty()) throw ValidationError("ridge needs a non-empty training set");
    if (!(lambda > 0.0)) throw ConfigError("ridge lambda must be positive");
    scaler_ = DenseScaler::fit(train);
    const auto n = static_cast<Eigen::Index>(train.size());
    const std::size_t dense_dim = train.front().dense.size();
    const auto p = static_cast<Eigen::Index>(dense_dim + sparse_dim);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto d = scaler_.apply(train[i].dense);
        for (std::size_t j = 0; j < dense_dim; ++j) x(i, static_cast<Eigen::Index>(j)) = d[j];
        for (auto s : train[i].sparse) x(i, static_cast<Eigen::Index>(dense_dim + s)) = 1.0;
        y(i) = scores[i];
    }
    const Eigen::RowVectorXd xmean = x.colwise().mean();
    const double ymean = y.mean();
    x.rowwise() -= xmean;
    y.array() -= ymean;
    Eigen::VectorXd beta;
    if (p <= n) {
        Eigen::MatrixXd gram = x.transpose() * x;
        gram.diagonal().array() += lambda;
        beta = gram.ldlt().solve(x.transpose() * y);
    } else {
        Eigen::MatrixXd gram = x * x.transpose();
        gram.diagonal().array() += lambda;
        beta = x.transpose() * gram.ldlt().solve(y);
    }
    coef_.assign(beta.data(), beta.data() + beta.size());
    intercept_ = ymean - xmean.dot(beta);
}

double RidgeModel::predict(const FeatureVector& x) const {
    const auto d = scaler_.apply(x.dense);
    double y = intercept_;
    for (std::size_t j = 0; j < d.size(); ++j) y += coef_[j] * d[j];
    for (auto s : x.sparse) {
        if (s < sparse_dim_) y += coef_[d.size() + s];
    }
    return y;
}

CvResult cross_validate(const Corpus& corpus, const std::vector<LayerSet>& layersets, const FoldPlan& plan,
                        const ModelSpec& spec, const QwkBinning& binning, std::size_t jobs) {
    if (layersets.size() != corpus.size()) throw ValidationError("layer sets are not aligned with the corpus");
    if (plan.k < 2) throw ConfigError("cross-validation needs at least two folds");
    for (const auto& [id, f] : plan.assignments) {
        if (!corpus.find(id)) throw ValidationError("fold plan references unknown document " + id);
    }

    struct FoldOutput {
        std::vector<Prediction> model;
        std::vector<Prediction> mean;
    };
    std::vector<FoldOutput> outputs(static_cast<std::size_t>(plan.k));

    parallel_for(outputs.size(), jobs, [&](std::size_t fi) {
        const int fold = static_cast<int>(fi);
        std::vector<std::size_t> train;
        std::vector<std::size_t> test;
        for (std::size_t d = 0; d < corpus.size(); ++d) {
            const auto& doc = corpus.at(d);
            auto f = plan.fold_of(doc.id);
            if (f && *f == fold) test.push_back(d);
            else if (!f) test.push_back(d);
            else if (doc.scored()) train.push_back(d);
        }
        for (auto d : train) {
            if (std::find(test.begin(), test.end(), d) != test.end()) {
                throw std::logic_error("cross-validation leaked document " + corpus.at(d).id + " into training");
            }
        }
        if (train.empty()) {
            throw ValidationError("fold " + std::to_string(fold) + " has no scored training documents");
        }

        std::vector<const LayerSet*> train_sets;
        std::vector<double> y;
        for (auto d : train) {
            train_sets.push_back(&layersets[d]);
            y.push_back(*corpus.at(d).gold_score);
        }
        const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
        const auto space = FeatureSpace::fit(train_sets, spec.features);
        std::vector<FeatureVector> train_x;
        for (const auto* ls : train_sets) train_x.push_back(featurize(*ls, space));

        std::function<double(const FeatureVector&)> predict;
        std::optional<KnnModel> knn;
        std::optional<RidgeModel> ridge;
        switch (spec.kind) {
        case ModelSpec::Kind::Knn:
            knn.emplace(train_x, y, spec.k);
            predict = [&](const FeatureVector& x) { return knn->predict(x); };
            break;
        case ModelSpec::Kind::Ridge:
            ridge.emplace(train_x, y, space.size(), spec.lambda);
            predict = [&](const FeatureVector& x) { return ridge->predict(x); };
            break;
        case ModelSpec::Kind::Mean:
            predict = [&](const FeatureVector&) { return mean; };
            break;
        }
        auto& out = outputs[fi];
        for (auto d : test) {
            const auto x = featurize(layersets[d], space);
            const double s = std::clamp(predict(x), 0.0, 1.0);
            out.model.push_back({corpus.at(d).id, spec.name, fold, s});
            out.mean.push_back({corpus.at(d).id, "mean", fold, std::clamp(mean, 0.0, 1.0)});
        }
    });

    CvResult result;
    for (auto& o : outputs) {
        result.predictions.insert(result.predictions.end(), o.model.begin(), o.model.end());
        result.reference.insert(result.reference.end(), o.mean.begin(), o.mean.end());
    }
    auto by_doc = [](const Prediction& a, const Prediction& b) {
        if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
        return a.fold < b.fold;
    };
    std::sort(result.predictions.begin(), result.predictions.end(), by_doc);
    std::sort(result.reference.begin(), result.reference.end(), by_doc);

    auto score = [&](const std::vector<Prediction>& preds) {
        ScorePairs pairs;
        for (const auto& p : preds) {
            const auto* doc = corpus.find(p.doc_id);
            auto f = plan.fold_of(p.doc_id);
            if (!doc->scored() || !f || *f != p.fold) continue;
            pairs.gold.push_back(*doc->gold_score);
            pairs.pred.push_back(p.score);
            pairs.doc_ids.push_back(p.doc_id);
        }
        return evaluate_scores(pairs, binning);
    };
    result.report = score(result.predictions);
    result.reference_report = score(result.reference);
    return result;
}

} // namespace essaylens
