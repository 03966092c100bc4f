#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace war {

// A 64-bit modulus. Values are capped at 63 bits so that products of
// centered representatives always fit in a 128-bit intermediate.
// Powers of two get a mask-based reduction fast path.
class Modulus {
public:
    explicit Modulus(std::uint64_t value);

    std::uint64_t value() const { return value_; }
    bool is_power_of_two() const { return pow2_; }
    // Number of bits needed to address residues: smallest L with 2^L >= value.
    unsigned bit_length() const { return bits_; }

    std::uint64_t reduce(std::uint64_t x) const {
        return pow2_ ? (x & mask_) : (x % value_);
    }
    // Maps a signed integer to its residue in [0, value).
    std::uint64_t reduce_signed(std::int64_t x) const;

    std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
        std::uint64_t s = a + b; // a,b < 2^63, no overflow
        return s >= value_ ? s - value_ : s;
    }
    std::uint64_t sub(std::uint64_t a, std::uint64_t b) const {
        return a >= b ? a - b : a + value_ - b;
    }
    std::uint64_t neg(std::uint64_t a) const { return a == 0 ? 0 : value_ - a; }
    std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
        if (pow2_) return (a * b) & mask_;
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(a) * b) % value_);
    }
    // Same as mul but feeds the field-multiplication counter. The recovery
    // data path goes through this entry so the acceptance suite can meter it.
    std::uint64_t mul_c(std::uint64_t a, std::uint64_t b) const;

    std::uint64_t pow(std::uint64_t base, std::uint64_t exp) const;
    // Multiplicative inverse via Fermat; requires a prime modulus.
    std::uint64_t inv(std::uint64_t a) const;

    bool operator==(const Modulus& o) const { return value_ == o.value_; }

private:
    std::uint64_t value_;
    std::uint64_t mask_;
    bool pow2_;
    unsigned bits_;
};

// Representative of x in (-m/2, m/2].
std::int64_t centered(std::uint64_t x, const Modulus& m);

// Deterministic Miller-Rabin, valid for all 64-bit inputs.
bool is_prime_u64(std::uint64_t n);
// Smallest prime strictly greater than n. Throws if none fits in 63 bits.
std::uint64_t next_prime_above(std::uint64_t n);

// Dense row-major matrix of residues.
class ModMatrix {
public:
    ModMatrix(std::size_t rows, std::size_t cols, Modulus mod);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const Modulus& modulus() const { return mod_; }

    std::uint64_t& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    std::uint64_t at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<const std::uint64_t> data() const { return data_; }
    std::span<std::uint64_t> data() { return data_; }

    static ModMatrix identity(std::size_t n, Modulus mod);

    bool is_zero() const;
    ModMatrix operator+(const ModMatrix& o) const;
    ModMatrix operator-(const ModMatrix& o) const;
    // this += coeff * other (entrywise, mod m).
    void add_scaled(const ModMatrix& other, std::uint64_t coeff);
    ModMatrix scaled(std::uint64_t coeff) const;

    bool operator==(const ModMatrix& o) const;

private:
    std::size_t rows_, cols_;
    Modulus mod_;
    std::vector<std::uint64_t> data_;
};

// Exact product; throws on dimension or modulus mismatch.
ModMatrix mat_mul(const ModMatrix& a, const ModMatrix& b);

// Gadget matrix G of shape (g+1) x (g+1)*L, L = bit_length(q). Block r of
// row r holds (1, 2, 4, ..., 2^(L-1)).
ModMatrix gadget_matrix(std::size_t g, Modulus q);

// {0,1} matrix D of shape rows(c)*L x cols(c) with G * D = c (mod q).
ModMatrix bit_decompose(const ModMatrix& c);

// x times a {0,1} matrix given as row-major bytes (d_rows x d_cols).
ModMatrix mul_binary(const ModMatrix& x, std::span<const std::uint8_t> d,
                     std::size_t d_rows, std::size_t d_cols);

// Fused x * bit_decompose(y) without materializing a ModMatrix for D.
// This is the GSW ciphertext product kernel.
ModMatrix gadget_product(const ModMatrix& x, const ModMatrix& y);

// Row vector times matrix: returns vec * m (vec length = rows of m).
std::vector<std::uint64_t> row_vec_mul(std::span<const std::uint64_t> vec,
                                       const ModMatrix& m);

// ---------------------------------------------------------------------------
// Polynomials over F_p, coefficients lowest degree first, no trailing zeros.

class PolyP {
public:
    explicit PolyP(Modulus p) : p_(p) {}
    PolyP(Modulus p, std::vector<std::uint64_t> coeffs);

    const Modulus& modulus() const { return p_; }
    // -1 for the zero polynomial.
    std::ptrdiff_t degree() const { return static_cast<std::ptrdiff_t>(c_.size()) - 1; }
    std::span<const std::uint64_t> coeffs() const { return c_; }
    std::uint64_t coeff(std::size_t i) const { return i < c_.size() ? c_[i] : 0; }
    bool is_zero() const { return c_.empty(); }

    std::uint64_t eval_horner(std::uint64_t x) const;

    PolyP operator+(const PolyP& o) const;
    PolyP operator-(const PolyP& o) const;
    PolyP operator*(const PolyP& o) const;
    // Product truncated to the first n coefficients (mod z^n).
    PolyP mul_trunc(const PolyP& o, std::size_t n) const;
    // Remainder of this modulo a monic divisor.
    PolyP rem_monic(const PolyP& divisor) const;
    // Inverse power series mod z^n; requires a unit constant term.
    PolyP series_inverse(std::size_t n) const;

    static PolyP constant(Modulus p, std::uint64_t c);

private:
    void normalize();
    Modulus p_;
    std::vector<std::uint64_t> c_;
};

// f(x) for each point, by remainder-tree descent over the subproduct tree.
// Accepts any point count.
std::vector<std::uint64_t> poly_multipoint_eval(const PolyP& f,
                                                std::span<const std::uint64_t> points);

// s_r = sum_c weights[c] * points[c]^(r-1) for r = 1..count, via
// divide-and-conquer accumulation of sum_c w_c / (1 - points[c] z) followed
// by power-series inversion. Points must be distinct and nonzero mod p.
std::vector<std::uint64_t> weighted_power_sums(std::span<const std::uint64_t> points,
                                               std::span<const std::uint64_t> weights,
                                               std::size_t count, Modulus p);

} // namespace war
