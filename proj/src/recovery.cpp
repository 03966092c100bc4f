#include "war/recovery.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace war {

namespace {

using u64 = std::uint64_t;

u64 pick_prime(u64 n, u64 entry_bound) {
    return next_prime_above(std::max(2 * entry_bound + 1, n));
}

void validate(const RecoveryParams& p) {
    if (p.k == 0) throw std::invalid_argument("recovery: k must be at least 1");
    if (p.n < 2) throw std::invalid_argument("recovery: n must be at least 2");
    if (2 * p.k > p.n) throw std::invalid_argument("recovery: need k <= n/2");
    if (!is_prime_u64(p.p.value())) throw std::invalid_argument("recovery: p must be prime");
    if (p.p.value() <= 2 * p.entry_bound) throw std::invalid_argument("recovery: need p > 2N");
    if (p.p.value() <= p.n) throw std::invalid_argument("recovery: need p > n");
}

} // namespace

RecoveryParams RecoveryParams::make(u64 n, u64 k, u64 entry_bound) {
    RecoveryParams p{n, k, entry_bound, Modulus(pick_prime(n, entry_bound))};
    validate(p);
    return p;
}

RecoveryParams RecoveryParams::with_prime(u64 n, u64 k, u64 entry_bound, u64 prime) {
    RecoveryParams p{n, k, entry_bound, Modulus(prime)};
    validate(p);
    return p;
}

SyndromeState::SyndromeState(const RecoveryParams& params)
    : params_(params), syndromes_(2 * params.k, 0) {
    buffer_.reserve(2 * params.k);
}

SyndromeState SyndromeState::from_syndromes(const RecoveryParams& params,
                                            std::vector<u64> syndromes) {
    if (syndromes.size() != 2 * params.k) {
        throw std::invalid_argument("from_syndromes: expected 2k residues");
    }
    SyndromeState s(params);
    for (u64& v : syndromes) v = params.p.reduce(v);
    s.syndromes_ = std::move(syndromes);
    return s;
}

void SyndromeState::update_naive(u64 i, std::int64_t delta) {
    if (i < 1 || i > params_.n) throw std::out_of_range("update: index out of range");
    flush(); // keep naive and batched interleavings consistent
    const Modulus& p = params_.p;
    const u64 d = p.reduce_signed(delta);
    if (d == 0) return;
    const u64 base = p.reduce(i);
    u64 pw = 1;
    for (std::size_t r = 0; r < syndromes_.size(); ++r) {
        syndromes_[r] = p.add(syndromes_[r], p.mul_c(d, pw));
        if (r + 1 < syndromes_.size()) pw = p.mul_c(pw, base);
    }
}

void SyndromeState::update_batched(u64 i, std::int64_t delta) {
    if (i < 1 || i > params_.n) throw std::out_of_range("update: index out of range");
    buffer_.emplace_back(i, delta);
    if (buffer_.size() >= 2 * params_.k) flush();
}

void SyndromeState::flush() {
    if (buffer_.empty()) return;
    const Modulus& p = params_.p;
    // Coalesce duplicate indices; weighted_power_sums needs distinct points.
    std::sort(buffer_.begin(), buffer_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<u64> points, weights;
    points.reserve(buffer_.size());
    weights.reserve(buffer_.size());
    std::size_t i = 0;
    while (i < buffer_.size()) {
        const u64 idx = buffer_[i].first;
        std::int64_t sum = 0;
        for (; i < buffer_.size() && buffer_[i].first == idx; ++i) sum += buffer_[i].second;
        const u64 w = p.reduce_signed(sum);
        if (w != 0) {
            points.push_back(p.reduce(idx));
            weights.push_back(w);
        }
    }
    buffer_.clear();
    if (points.empty()) return;
    const std::vector<u64> sums = weighted_power_sums(points, weights, syndromes_.size(), p);
    for (std::size_t r = 0; r < syndromes_.size(); ++r) {
        syndromes_[r] = p.add(syndromes_[r], sums[r]);
    }
}

std::span<const u64> SyndromeState::syndromes() {
    flush();
    return syndromes_;
}

void SyndromeState::add_syndromes(std::span<const u64> other) {
    if (other.size() != syndromes_.size()) {
        throw std::invalid_argument("add_syndromes: length mismatch");
    }
    flush();
    for (std::size_t r = 0; r < syndromes_.size(); ++r) {
        syndromes_[r] = params_.p.add(syndromes_[r], params_.p.reduce(other[r]));
    }
}

bool SyndromeState::operator==(const SyndromeState& o) const {
    return syndromes_ == o.syndromes_ && buffer_ == o.buffer_;
}

// ---------------------------------------------------------------------------
// Decoding.

namespace {

// Berlekamp-Massey over F_p: minimal connection polynomial Lambda with
// Lambda(0) = 1 for the sequence s. Returns (Lambda coefficients, length L).
std::pair<std::vector<u64>, std::size_t> berlekamp_massey(std::span<const u64> s,
                                                          const Modulus& p) {
    std::vector<u64> lambda{1}, prev{1};
    std::size_t ell = 0, m = 1;
    u64 b = 1;
    for (std::size_t i = 0; i < s.size(); ++i) {
        u64 delta = s[i];
        for (std::size_t j = 1; j <= ell && j < lambda.size() && j <= i; ++j) {
            delta = p.add(delta, p.mul_c(lambda[j], s[i - j]));
        }
        if (delta == 0) {
            ++m;
            continue;
        }
        const u64 coef = p.mul_c(delta, p.inv(b));
        if (2 * ell <= i) {
            std::vector<u64> tmp = lambda;
            if (lambda.size() < prev.size() + m) lambda.resize(prev.size() + m, 0);
            for (std::size_t j = 0; j < prev.size(); ++j) {
                lambda[j + m] = p.sub(lambda[j + m], p.mul_c(coef, prev[j]));
            }
            ell = i + 1 - ell;
            prev = std::move(tmp);
            b = delta;
            m = 1;
        } else {
            if (lambda.size() < prev.size() + m) lambda.resize(prev.size() + m, 0);
            for (std::size_t j = 0; j < prev.size(); ++j) {
                lambda[j + m] = p.sub(lambda[j + m], p.mul_c(coef, prev[j]));
            }
            ++m;
        }
    }
    lambda.resize(ell + 1, 0);
    return {std::move(lambda), ell};
}

// Solve the k' x k' transposed-Vandermonde system sum_c x_c * j_c^(r-1) = s_r
// by Gaussian elimination. Support indices must be distinct and nonzero.
std::vector<u64> solve_values(std::span<const u64> support, std::span<const u64> s,
                              const RecoveryParams& params) {
    const Modulus& p = params.p;
    const std::size_t m = support.size();
    std::vector<std::vector<u64>> a(m, std::vector<u64>(m + 1, 0));
    for (std::size_t c = 0; c < m; ++c) {
        u64 pw = 1;
        const u64 base = p.reduce(support[c]);
        for (std::size_t r = 0; r < m; ++r) {
            a[r][c] = pw;
            pw = p.mul_c(pw, base);
        }
    }
    for (std::size_t r = 0; r < m; ++r) a[r][m] = s[r];

    for (std::size_t col = 0; col < m; ++col) {
        std::size_t pivot = col;
        while (pivot < m && a[pivot][col] == 0) ++pivot;
        if (pivot == m) throw std::runtime_error("singular Vandermonde system");
        std::swap(a[pivot], a[col]);
        const u64 inv = p.inv(a[col][col]);
        for (std::size_t j = col; j <= m; ++j) a[col][j] = p.mul_c(a[col][j], inv);
        for (std::size_t r = 0; r < m; ++r) {
            if (r == col || a[r][col] == 0) continue;
            const u64 f = a[r][col];
            for (std::size_t j = col; j <= m; ++j) {
                a[r][j] = p.sub(a[r][j], p.mul_c(f, a[col][j]));
            }
        }
    }
    std::vector<u64> x(m);
    for (std::size_t r = 0; r < m; ++r) x[r] = a[r][m];
    return x;
}

} // namespace

std::optional<SparseVector> SyndromeState::report() {
    flush();
    const Modulus& p = params_.p;
    auto [lambda, k_loc] = berlekamp_massey(syndromes_, p);
    if (k_loc > params_.k) return std::nullopt;

    SparseVector candidate;
    if (k_loc > 0) {
        // Roots of Lambda are inverse support indices; the reciprocal
        // polynomial rev(y) = y^k' * Lambda(1/y) vanishes exactly at y = j.
        std::vector<u64> rev(lambda.rbegin(), lambda.rend());
        PolyP rev_poly(p, std::move(rev));

        std::vector<u64> support;
        const u64 n = params_.n;
        const u64 log_n = std::max<u64>(1, std::bit_width(n - 1));
        if (n <= 4 * params_.k * log_n) {
            // Full multipoint sweep over the universe.
            std::vector<u64> pts(n);
            for (u64 j = 0; j < n; ++j) pts[j] = p.reduce(j + 1);
            const std::vector<u64> vals = poly_multipoint_eval(rev_poly, pts);
            for (u64 j = 0; j < n; ++j) {
                if (vals[j] == 0) support.push_back(j + 1);
            }
        } else {
            for (u64 j = 1; j <= n; ++j) {
                if (rev_poly.eval_horner(p.reduce(j)) == 0) support.push_back(j);
            }
        }
        if (support.size() != k_loc) return std::nullopt; // locator does not split over [n]

        std::vector<u64> values;
        try {
            values = solve_values(support, std::span<const u64>(syndromes_).first(k_loc), params_);
        } catch (const std::runtime_error&) {
            return std::nullopt;
        }
        for (std::size_t c = 0; c < support.size(); ++c) {
            const std::int64_t v = centered(values[c], p);
            if (v == 0) continue;
            if (static_cast<u64>(v < 0 ? -v : v) > params_.entry_bound) return std::nullopt;
            candidate.entries.push_back(SparseEntry{support[c], v});
        }
    }

    // Self-verification: the candidate must reproduce every syndrome.
    const std::vector<u64> check = syndromes_of_sparse(params_, candidate);
    for (std::size_t r = 0; r < syndromes_.size(); ++r) {
        if (check[r] != syndromes_[r]) return std::nullopt;
    }
    return candidate;
}

std::vector<u64> syndromes_of(const RecoveryParams& params, std::span<const std::int64_t> dense) {
    if (dense.size() != params.n) throw std::invalid_argument("syndromes_of: wrong vector length");
    const Modulus& p = params.p;
    std::vector<u64> s(2 * params.k, 0);
    for (u64 j = 0; j < params.n; ++j) {
        if (dense[j] == 0) continue;
        const u64 w = p.reduce_signed(dense[j]);
        const u64 base = p.reduce(j + 1);
        u64 pw = 1;
        for (std::size_t r = 0; r < s.size(); ++r) {
            s[r] = p.add(s[r], p.mul_c(w, pw));
            pw = p.mul_c(pw, base);
        }
    }
    return s;
}

std::vector<u64> syndromes_of_sparse(const RecoveryParams& params, const SparseVector& v) {
    const Modulus& p = params.p;
    std::vector<u64> s(2 * params.k, 0);
    for (const SparseEntry& e : v.entries) {
        const u64 w = p.reduce_signed(e.value);
        const u64 base = p.reduce(e.index);
        u64 pw = 1;
        for (std::size_t r = 0; r < s.size(); ++r) {
            s[r] = p.add(s[r], p.mul_c(w, pw));
            pw = p.mul_c(pw, base);
        }
    }
    return s;
}

} // namespace war
