#include "fdc/hermite.hpp"

#include "fdc/errors.hpp"

#include <algorithm>
#include <functional>
#include <mutex>
#include <numeric>

namespace fdc {

UnivariatePolynomial hermite(int k, const Rational& sigma2) {
    if (k < 0) throw PreconditionError("hermite degree must be nonnegative");
    UnivariatePolynomial prev{{1}}, cur{{1}};
    if (k == 0) return cur;
    cur.c = {0, 1};
    for (int j = 1; j < k; ++j) {
        UnivariatePolynomial next;
        next.c.assign(j + 2, 0);
        for (int i = 0; i <= j; ++i) next.c[i + 1] += cur.c[i];
        for (int i = 0; i < int(prev.c.size()); ++i) next.c[i] -= prev.c[i] * j * sigma2;
        prev = std::move(cur);
        cur = std::move(next);
    }
    return cur;
}

UnivariatePolynomial hermite_from_matchings(int k, const Rational& sigma2) {
    UnivariatePolynomial p;
    p.c.assign(k + 1, 0);
    std::vector<int> ones(k, 1);
    for (int m = 0; 2 * m <= k; ++m) {
        Rational count(cross_matching_count(ones, m));
        Rational s = 1;
        for (int i = 0; i < m; ++i) s *= -sigma2;
        p.c[k - 2 * m] += count * s;
    }
    return p;
}

double hermite_value(int k, double sigma2, double x) {
    if (k == 0) return 1.0;
    double prev = 1.0, cur = x;
    for (int j = 1; j < k; ++j) {
        double next = x * cur - j * sigma2 * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

namespace {

std::mutex match_mu;
std::map<std::pair<std::vector<int>, int>, mpz_class> match_memo;

mpz_class count_rec(std::vector<int> parts, int pairs) {
    parts.erase(std::remove(parts.begin(), parts.end(), 0), parts.end());
    std::sort(parts.rbegin(), parts.rend());
    if (pairs == 0) return 1;
    int total = std::accumulate(parts.begin(), parts.end(), 0);
    if (total < 2 * pairs || parts.size() < 2) return 0;
    auto key = std::make_pair(parts, pairs);
    {
        std::lock_guard lock(match_mu);
        auto it = match_memo.find(key);
        if (it != match_memo.end()) return it->second;
    }
    // Take one element of the first block: leave it out or pair it elsewhere.
    std::vector<int> rest = parts;
    rest[0]--;
    mpz_class r = count_rec(rest, pairs);
    for (size_t j = 1; j < parts.size(); ++j) {
        std::vector<int> q = rest;
        q[j]--;
        r += mpz_class(parts[j]) * count_rec(q, pairs - 1);
    }
    std::lock_guard lock(match_mu);
    match_memo.emplace(key, r);
    return r;
}

}  // namespace

mpz_class cross_matching_count(std::vector<int> parts, int pairs) {
    for (int p : parts)
        if (p < 0) throw PreconditionError("negative block size");
    if (pairs < 0) return 0;
    return count_rec(std::move(parts), pairs);
}

std::map<int, Rational> hermite_product_expand(const std::vector<int>& ks, const Rational& sigma2) {
    int total = std::accumulate(ks.begin(), ks.end(), 0);
    std::map<int, Rational> out;
    Rational s = 1;
    for (int m = 0; 2 * m <= total; ++m) {
        mpz_class c = cross_matching_count(ks, m);
        if (c != 0) out[total - 2 * m] += Rational(c) * s;
        s *= sigma2;
    }
    return out;
}

}  // namespace fdc
