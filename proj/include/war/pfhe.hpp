#pragma once

#include "war/modring.hpp"
#include "war/seed_expander.hpp"

#include <list>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

namespace war {

enum class NoiseKind : std::uint8_t { discrete_gaussian, centered_binomial };

struct PfheParams {
    std::size_t g;              // lattice dimension
    Modulus q;                  // ciphertext modulus
    unsigned levels;            // L = ceil(log2 q)
    std::size_t h;              // (g+1) * L
    std::uint64_t noise_bound;  // beta: hard cutoff on fresh noise magnitude
    std::size_t msg_bits;       // ell = ceil(log2 n)
    double sigma;               // noise width driving the sampler
    NoiseKind noise = NoiseKind::discrete_gaussian;

    // sigma < 0 picks beta/6 (so beta = ceil(6*sigma) holds).
    static PfheParams make(std::size_t g, Modulus q, std::size_t msg_bits,
                           std::uint64_t beta, double sigma = -1.0,
                           NoiseKind noise = NoiseKind::discrete_gaussian);

    // Noise bound for a fully evaluated point circuit: ell * h^2 * beta.
    unsigned __int128 eval_noise_bound() const;
};

// Smallest power-of-two q satisfying q >= 8*(n*N)*E_eval*k*N (and q >= 16*n*N),
// with E_eval = ell*h^2*beta and h self-consistently (g+1)*log2(q).
std::uint64_t auto_modulus(std::uint64_t n, std::uint64_t k, std::uint64_t entry_bound,
                           std::size_t g, std::uint64_t beta);
// Full parameter set for dimension n at the modulus above.
PfheParams auto_params(std::uint64_t n, std::uint64_t k, std::uint64_t entry_bound,
                       std::size_t g, std::uint64_t beta, double sigma = -1.0,
                       NoiseKind noise = NoiseKind::discrete_gaussian);

struct SecretKey {
    std::vector<std::uint64_t> s_bar; // length g
    std::vector<std::uint64_t> sk;    // [-s_bar | 1], length g+1
};

struct PublicKey {
    ModMatrix a; // (g+1) x h; sk * a = e with |centered(e_j)| <= beta
};

// Test-mode bookkeeping attached to ciphertexts: the plaintext the matrix is
// known to carry and an upper bound on its noise. Absent in production.
struct CtTag {
    std::int64_t message = 0;
    unsigned __int128 noise_bound = 0;
};

struct Ciphertext {
    ModMatrix c; // (g+1) x h
    std::optional<CtTag> tag;
};

struct noise_budget_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::pair<PublicKey, SecretKey> keygen(const PfheParams& params, const Seed32& seed);

// C = A*R + mu*G with R uniform in {0,1}^{h x h}. Tagged with noise bound h*beta.
Ciphertext encrypt(const PfheParams& params, const PublicKey& pk, int mu, SeedExpander& rng);

// Bounded noise sample, |e| <= beta.
std::int64_t sample_noise(const PfheParams& params, SeedExpander& rng);

// The WAR hash key: one pseudo-public-key matrix plus ell pseudo-ciphertexts.
struct Digest {
    PfheParams params;
    Seed32 seed{};
    bool explicit_matrices = false; // test mode: real encryptions, serialized in full
    ModMatrix pk_tilde;
    std::vector<Ciphertext> ct_tilde; // ell entries

    std::vector<std::uint8_t> serialize() const;
    static Digest deserialize(std::span<const std::uint8_t> bytes);
};

// Production digest: all ell+1 matrices uniform, expanded deterministically
// from the 32-byte seed. Re-expansion is bit-exact.
Digest sample_digest(const PfheParams& params, const Seed32& seed);

// TEST MODE ONLY: real public key, ciphertexts encrypting the bits of m
// (most significant first, reduced mod 2^ell). Requires 1 <= m <= n.
Digest encrypted_digest(const PfheParams& params, const PublicKey& pk, std::uint64_t m,
                        std::uint64_t n, const Seed32& entropy);

// Deterministic evaluation of the point circuits C_i over a digest, with an
// optional bounded LRU memo of evaluated ciphertexts.
class CtEvaluator {
public:
    CtEvaluator(const Digest& digest, std::uint64_t n, std::size_t memo_capacity = 0);

    // Evaluates C_i homomorphically. The reference stays valid until the next
    // call (non-memoized) or until eviction (memoized).
    const Ciphertext& eval_point_circuit(std::uint64_t i);

    // acc += coeff * eval(i) over Z_q; coeff is a signed stream value.
    // When combo is given and tags are available, accumulates the plaintext
    // combination and its noise bound.
    void accumulate(ModMatrix& acc, std::uint64_t i, std::int64_t coeff, CtTag* combo = nullptr);

    const Digest& digest() const { return *digest_; }
    std::uint64_t universe() const { return n_; }
    bool memoized() const { return memo_capacity_ > 0; }
    std::vector<std::uint64_t> cached_indices() const;

private:
    Ciphertext eval_fresh(std::uint64_t i) const;

    const Digest* digest_;
    std::uint64_t n_;
    ModMatrix gadget_;
    bool tags_;
    std::size_t memo_capacity_;
    std::list<std::pair<std::uint64_t, Ciphertext>> lru_;
    std::unordered_map<std::uint64_t, std::list<std::pair<std::uint64_t, Ciphertext>>::iterator> memo_;
    Ciphertext scratch_;
};

// Exact decode of an integer linear combination of ciphertexts.
// Requires |sum x_i mu_i| <= msg_bound and combined noise below 2^(jstar-1)
// where jstar = floor(log2(q / (4*msg_bound))). In test mode the tag is
// checked and violations throw noise_budget_error; never a silent wrong
// answer.
std::int64_t linear_dec(const PfheParams& params, const SecretKey& sk, const Ciphertext& m,
                        std::uint64_t msg_bound);

// Test diagnostics.
int decrypt_bit(const PfheParams& params, const SecretKey& sk, const Ciphertext& ct);
// max_j |centered((sk*C - message*sk*G)_j)| for a known plaintext.
std::uint64_t measured_noise(const PfheParams& params, const SecretKey& sk, const ModMatrix& c,
                             std::int64_t message);

} // namespace war
