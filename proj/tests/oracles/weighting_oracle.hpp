// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

// Brute-force reference for token weights, selection and expressive power.
// Shares no code with the library: plain loops over raw token lists.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct WeightingInput {
    std::vector<std::vector<std::vector<std::string>>> docs; ///< [doc][rep] -> tokens
    std::vector<std::string> labels;                         ///< class per doc
    double eps = 0.5;
    double t_w = 1e-5;
    double t_c = 0.95;
    bool all_other_reps = false;
    std::map<std::string, std::vector<std::pair<double, double>>> senses; ///< token -> (pos, neg) per sense
};

struct TokenResult {
    double weight = 0.0;
    bool selected = false;
    std::int64_t count = 0;
};

struct WeightingResult {
    std::vector<std::map<std::string, TokenResult>> reps;
    std::vector<double> e; ///< e[0] unused (word layer)
};

inline std::vector<int> presence(const WeightingInput& in, std::size_t rep, const std::string& token) {
    std::vector<int> v;
    for (const auto& doc : in.docs) {
        const auto& toks = doc[rep];
        v.push_back(std::find(toks.begin(), toks.end(), token) != toks.end() ? 1 : 0);
    }
    return v;
}

/// Pearson correlation from centered sums of n*x - sum(x); 0 when either side is constant.
inline double pearson(const std::vector<int>& x, const std::vector<int>& y) {
    const auto n = static_cast<std::int64_t>(x.size());
    std::int64_t sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    std::int64_t cxy = 0, cxx = 0, cyy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::int64_t dx = n * x[i] - sx;
        const std::int64_t dy = n * y[i] - sy;
        cxy += dx * dy;
        cxx += dx * dx;
        cyy += dy * dy;
    }
    if (cxx == 0 || cyy == 0) return 0.0;
    return static_cast<double>(cxy) / std::sqrt(static_cast<double>(cxx) * static_cast<double>(cyy));
}

inline WeightingResult run(const WeightingInput& in) {
    const std::size_t n_reps = in.docs.front().size();
    std::vector<std::string> classes(in.labels.begin(), in.labels.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

    std::vector<std::set<std::string>> vocab(n_reps);
    for (const auto& doc : in.docs) {
        for (std::size_t r = 0; r < n_reps; ++r) vocab[r].insert(doc[r].begin(), doc[r].end());
    }

    WeightingResult out;
    out.reps.resize(n_reps);
    for (std::size_t r = 0; r < n_reps; ++r) {
        for (const auto& f : vocab[r]) {
            TokenResult t;
            const auto pf = presence(in, r, f);
            std::vector<double> p;
            for (const auto& c : classes) {
                double df = 0.0, nc = 0.0;
                for (std::size_t d = 0; d < in.docs.size(); ++d) {
                    if (in.labels[d] != c) continue;
                    nc += 1.0;
                    df += pf[d];
                }
                p.push_back((df + in.eps) / (nc + 2.0 * in.eps));
            }
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < p.size(); ++a) {
                for (std::size_t b = 0; b < p.size(); ++b) {
                    if (a != b) best = std::max(best, p[a] * std::log(p[a] / p[b]));
                }
            }
            double s = 0.0;
            if (auto it = in.senses.find(f); it != in.senses.end() && !it->second.empty()) {
                for (const auto& [pos, neg] : it->second) s += pos - neg;
                s /= static_cast<double>(it->second.size());
            }
            t.weight = best + s;
            for (const auto& doc : in.docs) t.count += std::count(doc[r].begin(), doc[r].end(), f);

            if (r == 0) {
                t.selected = t.weight > in.t_w;
            } else {
                double max_rho = -std::numeric_limits<double>::infinity();
                for (std::size_t v = 0; v < n_reps; ++v) {
                    if (v == r || (!in.all_other_reps && v != 0)) continue;
                    for (const auto& g : vocab[v]) max_rho = std::max(max_rho, pearson(pf, presence(in, v, g)));
                }
                t.selected = t.weight > in.t_w && max_rho <= in.t_c;
            }
            out.reps[r][f] = t;
        }
    }
    out.e.assign(n_reps, 0.0);
    for (std::size_t r = 1; r < n_reps; ++r) {
        std::int64_t kept = 0, total = 0;
        for (const auto& [tok, t] : out.reps[r]) {
            total += t.count;
            if (t.selected) kept += t.count;
        }
        out.e[r] = total ? static_cast<double>(kept) / static_cast<double>(total) : 0.0;
    }
    return out;
}

} // namespace oracle
