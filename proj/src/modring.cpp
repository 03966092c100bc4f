#include "war/modring.hpp"

#include "war/counters.hpp"

#include <algorithm>
#include <bit>
#include <memory>
#include <stdexcept>

namespace war {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 m) {
    return static_cast<u64>((static_cast<u128>(a) * b) % m);
}

u64 powmod(u64 base, u64 exp, u64 m) {
    u64 r = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1) r = mulmod(r, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return r;
}

} // namespace

Modulus::Modulus(u64 value) : value_(value) {
    if (value < 2) throw std::invalid_argument("modulus must be at least 2");
    if (value > (u64{1} << 63)) {
        throw std::invalid_argument("modulus must fit in 63 bits");
    }
    pow2_ = std::has_single_bit(value);
    mask_ = pow2_ ? value - 1 : 0;
    bits_ = static_cast<unsigned>(std::bit_width(value - 1));
    if (bits_ == 0) bits_ = 1;
}

u64 Modulus::reduce_signed(std::int64_t x) const {
    std::int64_t r = x % static_cast<std::int64_t>(value_);
    if (r < 0) r += static_cast<std::int64_t>(value_);
    return static_cast<u64>(r);
}

u64 Modulus::mul_c(u64 a, u64 b) const {
    ++counters().field_mults;
    return mul(a, b);
}

u64 Modulus::pow(u64 base, u64 exp) const {
    if (pow2_) {
        u64 r = 1 & mask_;
        base &= mask_;
        while (exp) {
            if (exp & 1) r = (r * base) & mask_;
            base = (base * base) & mask_;
            exp >>= 1;
        }
        return r;
    }
    return powmod(base, exp, value_);
}

u64 Modulus::inv(u64 a) const {
    if (a == 0) throw std::domain_error("inverse of zero");
    return pow(a, value_ - 2);
}

std::int64_t centered(u64 x, const Modulus& m) {
    if (x >= m.value()) throw std::out_of_range("residue not reduced");
    if (2 * x <= m.value()) return static_cast<std::int64_t>(x);
    return static_cast<std::int64_t>(x) - static_cast<std::int64_t>(m.value());
}

bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    // These witnesses are deterministic for all 64-bit integers.
    for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        u64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 0; i < s - 1; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) { composite = false; break; }
        }
        if (composite) return false;
    }
    return true;
}

u64 next_prime_above(u64 n) {
    u64 c = n + 1;
    if (c <= 2) return 2;
    if ((c & 1) == 0) ++c;
    for (;; c += 2) {
        if (c >= (u64{1} << 63)) throw std::overflow_error("no suitable prime below 2^63");
        if (is_prime_u64(c)) return c;
    }
}

// ---------------------------------------------------------------------------

ModMatrix::ModMatrix(std::size_t rows, std::size_t cols, Modulus mod)
    : rows_(rows), cols_(cols), mod_(mod), data_(rows * cols, 0) {}

ModMatrix ModMatrix::identity(std::size_t n, Modulus mod) {
    ModMatrix m(n, n, mod);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

bool ModMatrix::is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](u64 v) { return v == 0; });
}

ModMatrix ModMatrix::operator+(const ModMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_ || !(mod_ == o.mod_)) {
        throw std::invalid_argument("matrix shape or modulus mismatch");
    }
    ModMatrix r(rows_, cols_, mod_);
    for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] = mod_.add(data_[i], o.data_[i]);
    return r;
}

ModMatrix ModMatrix::operator-(const ModMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_ || !(mod_ == o.mod_)) {
        throw std::invalid_argument("matrix shape or modulus mismatch");
    }
    ModMatrix r(rows_, cols_, mod_);
    for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] = mod_.sub(data_[i], o.data_[i]);
    return r;
}

void ModMatrix::add_scaled(const ModMatrix& other, u64 coeff) {
    if (rows_ != other.rows_ || cols_ != other.cols_ || !(mod_ == other.mod_)) {
        throw std::invalid_argument("matrix shape or modulus mismatch");
    }
    if (mod_.is_power_of_two()) {
        const u64 mask = mod_.value() - 1;
        for (std::size_t i = 0; i < data_.size(); ++i) {
            data_[i] = (data_[i] + coeff * other.data_[i]) & mask;
        }
    } else {
        for (std::size_t i = 0; i < data_.size(); ++i) {
            data_[i] = mod_.add(data_[i], mod_.mul(coeff, other.data_[i]));
        }
    }
}

ModMatrix ModMatrix::scaled(u64 coeff) const {
    ModMatrix r(rows_, cols_, mod_);
    for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] = mod_.mul(data_[i], coeff);
    return r;
}

bool ModMatrix::operator==(const ModMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && mod_ == o.mod_ && data_ == o.data_;
}

ModMatrix mat_mul(const ModMatrix& a, const ModMatrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("mat_mul: inner dimension mismatch");
    if (!(a.modulus() == b.modulus())) throw std::invalid_argument("mat_mul: modulus mismatch");
    const Modulus& m = a.modulus();
    ModMatrix out(a.rows(), b.cols(), m);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t t = 0; t < a.cols(); ++t) {
            u64 v = a.at(i, t);
            if (v == 0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out.at(i, j) = m.add(out.at(i, j), m.mul(v, b.at(t, j)));
            }
        }
    }
    return out;
}

ModMatrix gadget_matrix(std::size_t g, Modulus q) {
    const unsigned L = q.bit_length();
    ModMatrix G(g + 1, (g + 1) * L, q);
    for (std::size_t r = 0; r <= g; ++r) {
        for (unsigned j = 0; j < L; ++j) {
            G.at(r, r * L + j) = q.reduce(u64{1} << j);
        }
    }
    return G;
}

ModMatrix bit_decompose(const ModMatrix& c) {
    const unsigned L = c.modulus().bit_length();
    ModMatrix d(c.rows() * L, c.cols(), c.modulus());
    for (std::size_t r = 0; r < c.rows(); ++r) {
        for (std::size_t j = 0; j < c.cols(); ++j) {
            u64 v = c.at(r, j);
            for (unsigned b = 0; b < L; ++b) {
                d.at(r * L + b, j) = (v >> b) & 1;
            }
        }
    }
    return d;
}

ModMatrix mul_binary(const ModMatrix& x, std::span<const std::uint8_t> d,
                     std::size_t d_rows, std::size_t d_cols) {
    if (x.cols() != d_rows) throw std::invalid_argument("mul_binary: inner dimension mismatch");
    if (d.size() != d_rows * d_cols) throw std::invalid_argument("mul_binary: byte buffer size");
    const Modulus& q = x.modulus();
    ModMatrix out(x.rows(), d_cols, q);
    const std::size_t n = d_cols;
    if (q.is_power_of_two()) {
        const u64 mask = q.value() - 1;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            u64* acc = &out.data()[i * n];
            for (std::size_t t = 0; t < d_rows; ++t) {
                const u64 a = x.at(i, t);
                if (a == 0) continue;
                const std::uint8_t* row = &d[t * n];
                for (std::size_t j = 0; j < n; ++j) {
                    acc[j] += a & (u64{0} - row[j]); // wraps mod 2^64
                }
            }
            for (std::size_t j = 0; j < n; ++j) acc[j] &= mask;
        }
    } else {
        std::vector<u128> acc(n);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            std::fill(acc.begin(), acc.end(), u128{0});
            for (std::size_t t = 0; t < d_rows; ++t) {
                const u64 a = x.at(i, t);
                if (a == 0) continue;
                const std::uint8_t* row = &d[t * n];
                for (std::size_t j = 0; j < n; ++j) {
                    acc[j] += a & (u64{0} - row[j]);
                }
            }
            for (std::size_t j = 0; j < n; ++j) {
                out.at(i, j) = static_cast<u64>(acc[j] % q.value());
            }
        }
    }
    return out;
}

ModMatrix gadget_product(const ModMatrix& x, const ModMatrix& y) {
    const Modulus& q = x.modulus();
    if (!(q == y.modulus())) throw std::invalid_argument("gadget_product: modulus mismatch");
    const unsigned L = q.bit_length();
    const std::size_t h = y.rows() * L;
    if (x.cols() != h) throw std::invalid_argument("gadget_product: shape mismatch");

    // Scratch byte buffer for the {0,1} decomposition; reused across calls.
    thread_local std::vector<std::uint8_t> d;
    d.assign(h * y.cols(), 0);
    for (std::size_t r = 0; r < y.rows(); ++r) {
        for (std::size_t j = 0; j < y.cols(); ++j) {
            u64 v = y.at(r, j);
            for (unsigned b = 0; b < L; ++b) {
                d[(r * L + b) * y.cols() + j] = static_cast<std::uint8_t>((v >> b) & 1);
            }
        }
    }
    return mul_binary(x, d, h, y.cols());
}

std::vector<u64> row_vec_mul(std::span<const u64> vec, const ModMatrix& m) {
    if (vec.size() != m.rows()) throw std::invalid_argument("row_vec_mul: dimension mismatch");
    const Modulus& q = m.modulus();
    std::vector<u64> out(m.cols(), 0);
    for (std::size_t j = 0; j < m.cols(); ++j) {
        u128 acc = 0;
        for (std::size_t r = 0; r < m.rows(); ++r) {
            acc += static_cast<u128>(vec[r]) * m.at(r, j);
        }
        out[j] = static_cast<u64>(acc % q.value());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Polynomial arithmetic.

namespace {

constexpr std::size_t kKaratsubaThreshold = 32;

// Schoolbook product of coefficient spans, optionally truncated to n terms.
std::vector<u64> school_mul(std::span<const u64> a, std::span<const u64> b,
                            std::size_t n, const Modulus& p) {
    std::vector<u64> r(std::min(n, a.size() + b.size() - 1), 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        const std::size_t jmax = std::min(b.size(), r.size() > i ? r.size() - i : 0);
        for (std::size_t j = 0; j < jmax; ++j) {
            r[i + j] = p.add(r[i + j], p.mul_c(a[i], b[j]));
        }
    }
    return r;
}

std::vector<u64> kara_mul(std::span<const u64> a, std::span<const u64> b, const Modulus& p);

std::vector<u64> mul_dispatch(std::span<const u64> a, std::span<const u64> b, const Modulus& p) {
    if (std::min(a.size(), b.size()) < kKaratsubaThreshold) {
        return school_mul(a, b, a.size() + b.size() - 1, p);
    }
    return kara_mul(a, b, p);
}

std::vector<u64> kara_mul(std::span<const u64> a, std::span<const u64> b, const Modulus& p) {
    const std::size_t m = (std::max(a.size(), b.size()) + 1) / 2;
    auto lo = [&](std::span<const u64> v) { return v.subspan(0, std::min(m, v.size())); };
    auto hi = [&](std::span<const u64> v) {
        return v.size() > m ? v.subspan(m) : std::span<const u64>{};
    };
    auto add_spans = [&](std::span<const u64> x, std::span<const u64> y) {
        std::vector<u64> s(std::max(x.size(), y.size()), 0);
        for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i];
        for (std::size_t i = 0; i < y.size(); ++i) s[i] = p.add(s[i], y[i]);
        return s;
    };

    std::span<const u64> a0 = lo(a), a1 = hi(a), b0 = lo(b), b1 = hi(b);
    std::vector<u64> p0 = mul_dispatch(a0, b0, p);
    std::vector<u64> out(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < p0.size(); ++i) out[i] = p.add(out[i], p0[i]);

    if (a1.empty() && b1.empty()) return out;

    std::vector<u64> p2;
    if (!a1.empty() && !b1.empty()) {
        p2 = mul_dispatch(a1, b1, p);
        for (std::size_t i = 0; i < p2.size(); ++i) {
            out[i + 2 * m] = p.add(out[i + 2 * m], p2[i]);
        }
    }

    std::vector<u64> sa = add_spans(a0, a1);
    std::vector<u64> sb = add_spans(b0, b1);
    std::vector<u64> p1 = mul_dispatch(sa, sb, p);
    for (std::size_t i = 0; i < p1.size(); ++i) {
        u64 v = p1[i];
        if (i < p0.size()) v = p.sub(v, p0[i]);
        if (i < p2.size()) v = p.sub(v, p2[i]);
        out[i + m] = p.add(out[i + m], v);
    }
    return out;
}

} // namespace

PolyP::PolyP(Modulus p, std::vector<u64> coeffs) : p_(p), c_(std::move(coeffs)) {
    for (u64& v : c_) v = p_.reduce(v);
    normalize();
}

void PolyP::normalize() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

PolyP PolyP::constant(Modulus p, u64 c) {
    return PolyP(p, std::vector<u64>{c});
}

u64 PolyP::eval_horner(u64 x) const {
    u64 acc = 0;
    for (std::size_t i = c_.size(); i-- > 0;) {
        acc = p_.add(p_.mul_c(acc, x), c_[i]);
    }
    return acc;
}

PolyP PolyP::operator+(const PolyP& o) const {
    std::vector<u64> r(std::max(c_.size(), o.c_.size()), 0);
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] = c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] = p_.add(r[i], o.c_[i]);
    return PolyP(p_, std::move(r));
}

PolyP PolyP::operator-(const PolyP& o) const {
    std::vector<u64> r(std::max(c_.size(), o.c_.size()), 0);
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] = c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] = p_.sub(r[i], o.c_[i]);
    return PolyP(p_, std::move(r));
}

PolyP PolyP::operator*(const PolyP& o) const {
    if (is_zero() || o.is_zero()) return PolyP(p_);
    return PolyP(p_, mul_dispatch(c_, o.c_, p_));
}

PolyP PolyP::mul_trunc(const PolyP& o, std::size_t n) const {
    if (is_zero() || o.is_zero() || n == 0) return PolyP(p_);
    if (std::min(c_.size(), o.c_.size()) < kKaratsubaThreshold) {
        return PolyP(p_, school_mul(c_, o.c_, n, p_));
    }
    std::vector<u64> full = mul_dispatch(c_, o.c_, p_);
    if (full.size() > n) full.resize(n);
    return PolyP(p_, std::move(full));
}

PolyP PolyP::rem_monic(const PolyP& divisor) const {
    if (divisor.is_zero()) throw std::invalid_argument("remainder by zero polynomial");
    if (divisor.c_.back() != 1) throw std::invalid_argument("divisor must be monic");
    const std::size_t d = divisor.c_.size() - 1;
    if (d == 0) return PolyP(p_); // division by a unit constant
    std::vector<u64> r = c_;
    for (std::size_t i = r.size(); i-- > d;) {
        const u64 c = r[i];
        if (c == 0) continue;
        r[i] = 0;
        for (std::size_t j = 0; j < d; ++j) {
            if (divisor.c_[j] == 0) continue;
            r[i - d + j] = p_.sub(r[i - d + j], p_.mul_c(c, divisor.c_[j]));
        }
    }
    r.resize(std::min(r.size(), d));
    return PolyP(p_, std::move(r));
}

PolyP PolyP::series_inverse(std::size_t n) const {
    if (is_zero() || c_[0] == 0) throw std::domain_error("series has no inverse");
    if (n == 0) return PolyP(p_);
    PolyP v = PolyP::constant(p_, p_.inv(c_[0]));
    std::size_t prec = 1;
    const PolyP two = PolyP::constant(p_, p_.reduce(2));
    while (prec < n) {
        prec = std::min(prec * 2, n);
        PolyP t = mul_trunc(v, prec);   // D * V
        t = two - t;                    // 2 - D*V
        v = v.mul_trunc(t, prec);
    }
    return v;
}

// ---------------------------------------------------------------------------
// Multipoint evaluation.

namespace {

struct SubproductNode {
    PolyP poly;
    std::unique_ptr<SubproductNode> left, right;
    std::size_t first = 0, count = 0; // indices into the point span
};

std::unique_ptr<SubproductNode> build_tree(std::span<const u64> pts, std::size_t first,
                                           std::size_t count, const Modulus& p) {
    auto node = std::make_unique<SubproductNode>(SubproductNode{PolyP(p), nullptr, nullptr, first, count});
    if (count == 1) {
        node->poly = PolyP(p, {p.neg(p.reduce(pts[first])), 1}); // z - x_i
        return node;
    }
    const std::size_t half = count / 2;
    node->left = build_tree(pts, first, half, p);
    node->right = build_tree(pts, first + half, count - half, p);
    node->poly = node->left->poly * node->right->poly;
    return node;
}

void descend(const PolyP& f, const SubproductNode& node, std::span<u64> out) {
    if (node.count == 1) {
        out[node.first] = f.coeff(0);
        return;
    }
    descend(f.rem_monic(node.left->poly), *node.left, out);
    descend(f.rem_monic(node.right->poly), *node.right, out);
}

} // namespace

std::vector<u64> poly_multipoint_eval(const PolyP& f, std::span<const u64> points) {
    const Modulus& p = f.modulus();
    std::vector<u64> out(points.size(), 0);
    if (points.empty()) return out;
    if (f.is_zero()) return out;
    if (f.degree() == 0) {
        std::fill(out.begin(), out.end(), f.coeff(0));
        return out;
    }
    // Chunk so each subproduct tree stays near the polynomial's degree.
    const std::size_t chunk =
        std::min<std::size_t>(std::max<std::size_t>(std::bit_ceil(static_cast<std::size_t>(f.degree()) + 1), 16),
                              1024);
    for (std::size_t start = 0; start < points.size(); start += chunk) {
        const std::size_t count = std::min(chunk, points.size() - start);
        auto tree = build_tree(points, start, count, p);
        descend(f.rem_monic(tree->poly), *tree, out);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Weighted power sums (transposed Vandermonde apply).

namespace {

// Returns (N, D) with N/D = sum over [first, first+count) of w_c / (1 - c z).
std::pair<PolyP, PolyP> rational_accumulate(std::span<const u64> pts, std::span<const u64> wts,
                                            std::size_t first, std::size_t count,
                                            const Modulus& p) {
    if (count == 1) {
        PolyP num(p, {p.reduce(wts[first])});
        PolyP den(p, {1, p.neg(p.reduce(pts[first]))});
        return {std::move(num), std::move(den)};
    }
    const std::size_t half = count / 2;
    auto [nl, dl] = rational_accumulate(pts, wts, first, half, p);
    auto [nr, dr] = rational_accumulate(pts, wts, first + half, count - half, p);
    return {nl * dr + nr * dl, dl * dr};
}

} // namespace

std::vector<u64> weighted_power_sums(std::span<const u64> points, std::span<const u64> weights,
                                     std::size_t count, Modulus p) {
    if (points.size() != weights.size()) {
        throw std::invalid_argument("weighted_power_sums: points/weights size mismatch");
    }
    if (points.size() > count) {
        throw std::invalid_argument("weighted_power_sums: more points than requested sums");
    }
    std::vector<u64> out(count, 0);
    if (points.empty()) return out;

    std::vector<u64> sorted(points.begin(), points.end());
    for (u64& v : sorted) v = p.reduce(v);
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == 0 || std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("weighted_power_sums: duplicate or zero point");
    }

    auto [num, den] = rational_accumulate(points, weights, 0, points.size(), p);
    // den(0) = 1, so the series inverse always exists.
    PolyP series = num.mul_trunc(den.series_inverse(count), count);
    for (std::size_t r = 0; r < count; ++r) out[r] = series.coeff(r);
    return out;
}

} // namespace war
