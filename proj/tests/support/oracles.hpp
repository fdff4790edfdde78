// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

// Brute-force reference implementations. They share no code with the library
// and favour obviousness over speed; inputs must stay small.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;

inline std::vector<Tokens> ngrams(const Tokens& t, std::size_t n)
{
    std::vector<Tokens> out;
    for (std::size_t i = 0; i + n <= t.size(); ++i) {
        out.emplace_back(t.begin() + static_cast<long>(i), t.begin() + static_cast<long>(i + n));
    }
    return out;
}

inline std::size_t occurrences(const std::vector<Tokens>& grams, const Tokens& g)
{
    return static_cast<std::size_t>(std::count(grams.begin(), grams.end(), g));
}

/// Corpus BLEU as a product of precisions raised to 1/N.
inline double bleu(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs, int max_n, bool add_one = false)
{
    double c = 0;
    double r = 0;
    for (std::size_t i = 0; i < hyps.size(); ++i) {
        c += static_cast<double>(hyps[i].size());
        r += static_cast<double>(refs[i].size());
    }
    if (c == 0) {
        return 0.0;
    }
    double product = 1.0;
    for (int n = 1; n <= max_n; ++n) {
        double matched = 0;
        double total = 0;
        for (std::size_t i = 0; i < hyps.size(); ++i) {
            const auto hg = ngrams(hyps[i], static_cast<std::size_t>(n));
            const auto rg = ngrams(refs[i], static_cast<std::size_t>(n));
            std::set<Tokens> distinct(hg.begin(), hg.end());
            for (const auto& g : distinct) {
                matched += static_cast<double>(std::min(occurrences(hg, g), occurrences(rg, g)));
            }
            total += static_cast<double>(hg.size());
        }
        if (add_one && n >= 2) {
            matched += 1;
            total += 1;
        }
        if (matched == 0 || total == 0) {
            return 0.0;
        }
        product *= matched / total;
    }
    const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
    return bp * std::pow(product, 1.0 / max_n);
}

/// Longest common subsequence by memoized recursion.
inline std::size_t lcs(const Tokens& a, const Tokens& b)
{
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    std::function<std::size_t(std::size_t, std::size_t)> f = [&](std::size_t i, std::size_t j) -> std::size_t {
        if (i == a.size() || j == b.size()) {
            return 0;
        }
        const auto key = std::make_pair(i, j);
        if (auto it = memo.find(key); it != memo.end()) {
            return it->second;
        }
        const std::size_t v = a[i] == b[j] ? 1 + f(i + 1, j + 1) : std::max(f(i + 1, j), f(i, j + 1));
        memo[key] = v;
        return v;
    };
    return f(0, 0);
}

inline double rouge_l(const Tokens& h, const Tokens& r)
{
    if (h.empty() || r.empty()) {
        return 0.0;
    }
    const double l = static_cast<double>(lcs(h, r));
    if (l == 0) {
        return 0.0;
    }
    const double p = l / static_cast<double>(h.size());
    const double rc = l / static_cast<double>(r.size());
    return 2 * p * rc / (p + rc);
}

/// Enumerates every one-to-one exact-match alignment; returns (matches, chunks)
/// with the most matches and, among those, the fewest chunks.
inline std::pair<std::size_t, std::size_t> meteor_alignment(const Tokens& h, const Tokens& r)
{
    std::size_t best_m = 0;
    std::size_t best_chunks = 0;
    std::vector<bool> used(r.size(), false);
    std::function<void(std::size_t, long, std::size_t, std::size_t)> rec = [&](std::size_t i, long prev,
                                                                             std::size_t m, std::size_t links) {
        if (i == h.size()) {
            const std::size_t chunks = m - links;
            if (m > best_m || (m == best_m && chunks < best_chunks)) {
                best_m = m;
                best_chunks = chunks;
            }
            return;
        }
        rec(i + 1, -2, m, links);
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (!used[j] && r[j] == h[i]) {
                used[j] = true;
                rec(i + 1, static_cast<long>(j), m + 1, links + (static_cast<long>(j) == prev + 1 ? 1 : 0));
                used[j] = false;
            }
        }
    };
    rec(0, -2, 0, 0);
    return {best_m, best_chunks};
}

inline double meteor(const Tokens& h, const Tokens& r)
{
    const auto [m, chunks] = meteor_alignment(h, r);
    if (m == 0) {
        return 0.0;
    }
    const double md = static_cast<double>(m);
    const double p = md / static_cast<double>(h.size());
    const double rc = md / static_cast<double>(r.size());
    const double fmean = p * rc / (0.9 * p + 0.1 * rc);
    return fmean * (1 - 0.5 * std::pow(static_cast<double>(chunks) / md, 3.0));
}

/// Exhaustive ranking: 1-based rank of `gold` when every pool item is scored,
/// sorted by score descending then id ascending.
template <typename ScoreFn>
std::size_t full_rank(const std::vector<std::pair<std::string, std::string>>& pool, const std::string& gold,
                      ScoreFn&& score)
{
    std::vector<std::pair<double, std::string>> scored;
    for (const auto& [id, text] : pool) {
        scored.emplace_back(score(text), id);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::size_t i = 0; i < scored.size(); ++i) {
        if (scored[i].second == gold) {
            return i + 1;
        }
    }
    return 0;
}

}  // namespace oracle
