#include "war/pfhe.hpp"

#include "war/counters.hpp"
#include "war/wire.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace war {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

// Seed-expander stream ids, fixed as part of the digest format.
constexpr u64 kStreamPk = 0;
constexpr u64 kStreamCtBase = 1; // ct_tilde[i] uses 1 + i
constexpr u64 kStreamSecret = 0x100;
constexpr u64 kStreamPkMatrix = 0x101;
constexpr u64 kStreamPkNoise = 0x102;
constexpr u64 kStreamEncBase = 0x200;

unsigned ceil_log2_u128(u128 v) {
    unsigned b = 0;
    while ((u128{1} << b) < v) ++b;
    return b;
}

ModMatrix uniform_matrix(std::size_t rows, std::size_t cols, const Modulus& q,
                         SeedExpander& rng) {
    ModMatrix m(rows, cols, q);
    for (u64& v : m.data()) v = rng.uniform_residue(q);
    return m;
}

} // namespace

PfheParams PfheParams::make(std::size_t g, Modulus q, std::size_t msg_bits, u64 beta,
                            double sigma, NoiseKind noise) {
    if (msg_bits == 0) throw std::invalid_argument("message bit count must be at least 1");
    PfheParams p{g, q, q.bit_length(), (g + 1) * q.bit_length(), beta, msg_bits,
                 sigma < 0 ? static_cast<double>(beta) / 6.0 : sigma, noise};
    return p;
}

u128 PfheParams::eval_noise_bound() const {
    return static_cast<u128>(msg_bits) * h * h * noise_bound;
}

u64 auto_modulus(u64 n, u64 k, u64 entry_bound, std::size_t g, u64 beta) {
    if (n < 2 || k == 0 || entry_bound == 0) {
        throw std::invalid_argument("auto_modulus: need n >= 2, k >= 1, N >= 1");
    }
    const std::size_t ell = std::max<std::size_t>(1, std::bit_width(n - 1));
    const u128 b_msg = static_cast<u128>(n) * entry_bound;
    unsigned bits = 16;
    for (int iter = 0; iter < 128; ++iter) {
        const u128 h = static_cast<u128>(g + 1) * bits;
        const u128 e_eval = static_cast<u128>(ell) * h * h * beta;
        u128 need = 16 * b_msg;
        if (e_eval > 0) {
            const u128 full = 8 * b_msg * e_eval * k * entry_bound;
            if (full > need) need = full;
        }
        const unsigned need_bits = ceil_log2_u128(need);
        if (need_bits > 62) throw std::domain_error("auto_modulus: no 63-bit modulus satisfies q >= 8*(n*N)*E_eval*k*N");
        if (need_bits == bits) return u64{1} << bits;
        bits = need_bits;
    }
    throw std::domain_error("auto_modulus: sizing did not converge");
}

PfheParams auto_params(u64 n, u64 k, u64 entry_bound, std::size_t g, u64 beta, double sigma,
                       NoiseKind noise) {
    const std::size_t ell = std::max<std::size_t>(1, std::bit_width(n - 1));
    return PfheParams::make(g, Modulus(auto_modulus(n, k, entry_bound, g, beta)), ell, beta,
                            sigma, noise);
}

std::int64_t sample_noise(const PfheParams& params, SeedExpander& rng) {
    const u64 beta = params.noise_bound;
    if (beta == 0) return 0;
    if (params.noise == NoiseKind::centered_binomial) {
        std::int64_t e = 0;
        for (u64 i = 0; i < beta; ++i) {
            const u64 bits = rng.next_u64();
            e += static_cast<std::int64_t>(bits & 1) - static_cast<std::int64_t>((bits >> 1) & 1);
        }
        return e;
    }
    // Discrete Gaussian by rejection with hard cutoff at beta.
    const double sigma = params.sigma > 0 ? params.sigma : static_cast<double>(beta) / 6.0;
    thread_local std::vector<u64> thresholds;
    thread_local double cached_sigma = -1.0;
    thread_local u64 cached_beta = 0;
    if (cached_sigma != sigma || cached_beta != beta) {
        thresholds.assign(beta + 1, 0);
        for (u64 x = 0; x <= beta; ++x) {
            const long double rho = expl(-static_cast<long double>(x) * x / (2.0L * sigma * sigma));
            const long double scaled = rho * 18446744073709551616.0L; // 2^64
            thresholds[x] = scaled >= 18446744073709551615.0L ? UINT64_MAX
                                                              : static_cast<u64>(scaled);
        }
        cached_sigma = sigma;
        cached_beta = beta;
    }
    for (;;) {
        const std::int64_t x =
            static_cast<std::int64_t>(rng.uniform_below(2 * beta + 1)) - static_cast<std::int64_t>(beta);
        const u64 r = rng.next_u64();
        if (r < thresholds[static_cast<u64>(x < 0 ? -x : x)]) return x;
    }
}

std::pair<PublicKey, SecretKey> keygen(const PfheParams& params, const Seed32& seed) {
    const Modulus& q = params.q;
    SecretKey sk;
    SeedExpander srng(seed, kStreamSecret);
    sk.s_bar.resize(params.g);
    for (u64& v : sk.s_bar) v = srng.uniform_residue(q);
    sk.sk.resize(params.g + 1);
    for (std::size_t i = 0; i < params.g; ++i) sk.sk[i] = q.neg(sk.s_bar[i]);
    sk.sk[params.g] = 1;

    SeedExpander arng(seed, kStreamPkMatrix);
    PublicKey pk{ModMatrix(params.g + 1, params.h, q)};
    for (std::size_t r = 0; r < params.g; ++r) {
        for (std::size_t j = 0; j < params.h; ++j) pk.a.at(r, j) = arng.uniform_residue(q);
    }
    SeedExpander erng(seed, kStreamPkNoise);
    for (std::size_t j = 0; j < params.h; ++j) {
        u128 acc = 0;
        for (std::size_t i = 0; i < params.g; ++i) {
            acc += static_cast<u128>(sk.s_bar[i]) * pk.a.at(i, j);
        }
        u64 alpha = static_cast<u64>(acc % q.value());
        alpha = q.add(alpha, q.reduce_signed(sample_noise(params, erng)));
        pk.a.at(params.g, j) = alpha;
    }
    return {std::move(pk), std::move(sk)};
}

Ciphertext encrypt(const PfheParams& params, const PublicKey& pk, int mu, SeedExpander& rng) {
    if (mu != 0 && mu != 1) throw std::invalid_argument("encrypt: message must be a bit");
    std::vector<std::uint8_t> r(params.h * params.h);
    for (std::uint8_t& b : r) b = static_cast<std::uint8_t>(rng.next_u64() & 1);
    ModMatrix c = mul_binary(pk.a, r, params.h, params.h);
    if (mu == 1) {
        c = c + gadget_matrix(params.g, params.q);
    }
    Ciphertext ct{std::move(c), CtTag{mu, static_cast<u128>(params.h) * params.noise_bound}};
    return ct;
}

// ---------------------------------------------------------------------------
// Digest.

namespace {

constexpr std::uint8_t kDigestVersion = 1;
constexpr char kDigestMagic[4] = {'W', 'A', 'R', 'H'};

} // namespace

std::vector<std::uint8_t> Digest::serialize() const {
    ByteWriter w;
    w.put_bytes(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(kDigestMagic), 4));
    w.put_u8(kDigestVersion);
    w.put_u8(explicit_matrices ? 1 : 0);
    w.put_u64(params.g);
    w.put_u64(params.q.value());
    w.put_u64(params.levels);
    w.put_u64(params.h);
    w.put_u64(params.msg_bits);
    w.put_u64(params.noise_bound);
    w.put_bytes(seed);
    if (explicit_matrices) {
        for (u64 v : pk_tilde.data()) w.put_u64(v);
        for (const Ciphertext& ct : ct_tilde) {
            for (u64 v : ct.c.data()) w.put_u64(v);
            w.put_u8(ct.tag ? 1 : 0);
            if (ct.tag) {
                w.put_i64(ct.tag->message);
                w.put_u128(ct.tag->noise_bound);
            }
        }
    }
    return std::move(w.bytes());
}

Digest Digest::deserialize(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    std::array<std::uint8_t, 4> magic{};
    r.get_bytes(magic);
    if (std::memcmp(magic.data(), kDigestMagic, 4) != 0) {
        throw bad_magic_error("digest: bad magic");
    }
    if (r.get_u8() != kDigestVersion) throw version_error("digest: unsupported version");
    const bool explicit_matrices = r.get_u8() != 0;
    const u64 g = r.get_u64();
    const u64 q = r.get_u64();
    const u64 levels = r.get_u64();
    const u64 h = r.get_u64();
    const u64 msg_bits = r.get_u64();
    const u64 beta = r.get_u64();
    Seed32 seed{};
    r.get_bytes(seed);

    PfheParams params = PfheParams::make(g, Modulus(q), msg_bits, beta);
    if (params.levels != levels || params.h != h) {
        throw codec_error("digest: inconsistent derived parameters");
    }
    if (!explicit_matrices) {
        r.expect_end();
        return sample_digest(params, seed);
    }
    Digest d{params, seed, true, ModMatrix(g + 1, h, params.q), {}};
    for (u64& v : d.pk_tilde.data()) v = params.q.reduce(r.get_u64());
    d.ct_tilde.reserve(msg_bits);
    for (u64 i = 0; i < msg_bits; ++i) {
        Ciphertext ct{ModMatrix(g + 1, h, params.q), std::nullopt};
        for (u64& v : ct.c.data()) v = params.q.reduce(r.get_u64());
        if (r.get_u8() != 0) {
            CtTag tag;
            tag.message = r.get_i64();
            tag.noise_bound = r.get_u128();
            ct.tag = tag;
        }
        d.ct_tilde.push_back(std::move(ct));
    }
    r.expect_end();
    return d;
}

Digest sample_digest(const PfheParams& params, const Seed32& seed) {
    Digest d{params, seed, false, ModMatrix(params.g + 1, params.h, params.q), {}};
    SeedExpander pk_rng(seed, kStreamPk);
    d.pk_tilde = uniform_matrix(params.g + 1, params.h, params.q, pk_rng);
    d.ct_tilde.reserve(params.msg_bits);
    for (std::size_t i = 0; i < params.msg_bits; ++i) {
        SeedExpander ct_rng(seed, kStreamCtBase + i);
        d.ct_tilde.push_back(
            Ciphertext{uniform_matrix(params.g + 1, params.h, params.q, ct_rng), std::nullopt});
    }
    return d;
}

Digest encrypted_digest(const PfheParams& params, const PublicKey& pk, u64 m, u64 n,
                        const Seed32& entropy) {
    if (m < 1 || m > n) throw std::out_of_range("encrypted_digest: index out of range");
    const std::size_t ell = params.msg_bits;
    const u64 idx = ell >= 64 ? m : (m & ((u64{1} << ell) - 1));
    Digest d{params, entropy, true, pk.a, {}};
    d.ct_tilde.reserve(ell);
    for (std::size_t b = 0; b < ell; ++b) {
        const int bit = static_cast<int>((idx >> (ell - 1 - b)) & 1); // MSB first
        SeedExpander rng(entropy, kStreamEncBase + b);
        d.ct_tilde.push_back(encrypt(params, pk, bit, rng));
    }
    return d;
}

// ---------------------------------------------------------------------------
// Point-circuit evaluation.

CtEvaluator::CtEvaluator(const Digest& digest, u64 n, std::size_t memo_capacity)
    : digest_(&digest),
      n_(n),
      gadget_(gadget_matrix(digest.params.g, digest.params.q)),
      memo_capacity_(memo_capacity),
      scratch_{ModMatrix(1, 1, digest.params.q), std::nullopt} {
    if (digest.ct_tilde.size() != digest.params.msg_bits) {
        throw std::invalid_argument("digest has wrong ciphertext count");
    }
    const std::size_t ell_needed = std::max<std::size_t>(1, std::bit_width(n - 1));
    if (n < 2 || digest.params.msg_bits != ell_needed) {
        throw std::invalid_argument("digest message bits do not match the universe size");
    }
    tags_ = true;
    for (const Ciphertext& ct : digest.ct_tilde) {
        if (!ct.tag) tags_ = false;
    }
}

Ciphertext CtEvaluator::eval_fresh(u64 i) const {
    const PfheParams& params = digest_->params;
    const std::size_t ell = params.msg_bits;
    const u64 idx = ell >= 64 ? i : (i & ((u64{1} << ell) - 1));

    // Fold literals most-significant bit first, fresh literal on the left:
    // acc <- lit_b * G^{-1}(acc). Seeding with G makes the first step the
    // identity and keeps the noise growth additive (h^2*beta per literal).
    Ciphertext acc{gadget_, tags_ ? std::optional<CtTag>(CtTag{1, 0}) : std::nullopt};
    const u128 fresh_noise = static_cast<u128>(params.h) * params.noise_bound;
    for (std::size_t b = 0; b < ell; ++b) {
        const int bit = static_cast<int>((idx >> (ell - 1 - b)) & 1);
        const Ciphertext& ct = digest_->ct_tilde[b];
        const ModMatrix& lit_c = bit ? ct.c : gadget_ - ct.c;
        acc.c = gadget_product(lit_c, acc.c);
        ++counters().cipher_mults;
        if (acc.tag) {
            const std::int64_t lit_msg = bit ? ct.tag->message : 1 - ct.tag->message;
            acc.tag = CtTag{lit_msg * acc.tag->message,
                            static_cast<u128>(params.h) * fresh_noise +
                                static_cast<u128>(lit_msg < 0 ? -lit_msg : lit_msg) *
                                    acc.tag->noise_bound};
        }
    }
    return acc;
}

const Ciphertext& CtEvaluator::eval_point_circuit(u64 i) {
    if (i < 1 || i > n_) throw std::out_of_range("eval_point_circuit: index out of range");
    ++counters().point_evals;
    if (memo_capacity_ == 0) {
        scratch_ = eval_fresh(i);
        return scratch_;
    }
    auto it = memo_.find(i);
    if (it != memo_.end()) {
        lru_.splice(lru_.begin(), lru_, it->second);
        return it->second->second;
    }
    lru_.emplace_front(i, eval_fresh(i));
    memo_[i] = lru_.begin();
    if (lru_.size() > memo_capacity_) {
        memo_.erase(lru_.back().first);
        lru_.pop_back();
    }
    return lru_.front().second;
}

void CtEvaluator::accumulate(ModMatrix& acc, u64 i, std::int64_t coeff, CtTag* combo) {
    const Ciphertext& ct = eval_point_circuit(i);
    acc.add_scaled(ct.c, digest_->params.q.reduce_signed(coeff));
    if (combo != nullptr && ct.tag) {
        combo->message += coeff * ct.tag->message;
        combo->noise_bound +=
            static_cast<u128>(coeff < 0 ? -coeff : coeff) * ct.tag->noise_bound;
    }
}

std::vector<u64> CtEvaluator::cached_indices() const {
    std::vector<u64> v;
    v.reserve(lru_.size());
    for (const auto& [idx, ct] : lru_) v.push_back(idx);
    return v;
}

// ---------------------------------------------------------------------------
// Linear decoding.

namespace {

// jstar = floor(log2(q / (4 * msg_bound)))
unsigned decode_shift(const Modulus& q, u64 msg_bound) {
    if (msg_bound == 0) throw std::invalid_argument("linear_dec: zero message bound");
    const u64 t = q.value() / (4 * msg_bound);
    if (t == 0) throw noise_budget_error("linear_dec: modulus below 4 * message bound");
    return static_cast<unsigned>(std::bit_width(t) - 1);
}

} // namespace

std::int64_t linear_dec(const PfheParams& params, const SecretKey& sk, const Ciphertext& m,
                        u64 msg_bound) {
    const Modulus& q = params.q;
    const unsigned jstar = decode_shift(q, msg_bound);
    if (m.tag) {
        const std::int64_t msg = m.tag->message;
        if (static_cast<u128>(msg < 0 ? -msg : msg) > msg_bound) {
            throw noise_budget_error("linear_dec: plaintext combination exceeds message bound");
        }
        // noise < 2^(jstar-1), i.e. 2*noise < 2^jstar
        if (2 * m.tag->noise_bound >= (u128{1} << jstar)) {
            throw noise_budget_error("linear_dec: combined noise exceeds 2^(jstar-1)");
        }
    }
    if (m.c.rows() != params.g + 1 || m.c.cols() != params.h) {
        throw std::invalid_argument("linear_dec: ciphertext shape mismatch");
    }
    const std::vector<u64> v = row_vec_mul(sk.sk, m.c);
    // Column of the last gadget block carrying coefficient 2^jstar.
    const std::size_t col = params.g * params.levels + jstar;
    const std::int64_t c = centered(v[col], q);
    if (jstar == 0) return c;
    return (c + (std::int64_t{1} << (jstar - 1))) >> jstar;
}

int decrypt_bit(const PfheParams& params, const SecretKey& sk, const Ciphertext& ct) {
    const std::int64_t v = linear_dec(params, sk, ct, 1);
    if (v != 0 && v != 1) throw std::runtime_error("decrypt_bit: non-binary plaintext");
    return static_cast<int>(v);
}

std::uint64_t measured_noise(const PfheParams& params, const SecretKey& sk, const ModMatrix& c,
                             std::int64_t message) {
    const Modulus& q = params.q;
    const std::vector<u64> v = row_vec_mul(sk.sk, c);
    const u64 msg_res = q.reduce_signed(message);
    u64 worst = 0;
    for (std::size_t r = 0; r <= params.g; ++r) {
        for (unsigned j = 0; j < params.levels; ++j) {
            const std::size_t colidx = r * params.levels + j;
            const u64 skg = q.mul(sk.sk[r], q.reduce(u64{1} << j));
            const u64 diff = q.sub(v[colidx], q.mul(msg_res, skg));
            const std::int64_t noise = centered(diff, q);
            const u64 mag = static_cast<u64>(noise < 0 ? -noise : noise);
            if (mag > worst) worst = mag;
        }
    }
    return worst;
}

} // namespace war
