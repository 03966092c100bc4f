#pragma once

#include "war/modring.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace war {

struct RecoveryParams {
    std::uint64_t n;           // universe size
    std::uint64_t k;           // sparsity
    std::uint64_t entry_bound; // N: magnitude bound on accumulated entries
    Modulus p;                 // syndrome prime, p > 2N and p > n

    // p = smallest prime exceeding max(2N+1, n).
    static RecoveryParams make(std::uint64_t n, std::uint64_t k, std::uint64_t entry_bound);
    // Validates an explicitly chosen prime.
    static RecoveryParams with_prime(std::uint64_t n, std::uint64_t k, std::uint64_t entry_bound,
                                     std::uint64_t p);
};

struct SparseEntry {
    std::uint64_t index; // in [1, n]
    std::int64_t value;  // nonzero, |value| <= N
    bool operator==(const SparseEntry&) const = default;
};

// Indices strictly increasing, no zero values.
struct SparseVector {
    std::vector<SparseEntry> entries;
    bool operator==(const SparseVector&) const = default;
    std::size_t support_size() const { return entries.size(); }
};

// The deterministic relaxed k-sparse recovery sketch: 2k Vandermonde
// syndromes s_r = sum_j x_j * j^(r-1) mod p, plus a batch update buffer.
class SyndromeState {
public:
    explicit SyndromeState(const RecoveryParams& params);
    // Coordinator path: adopt already-computed syndromes.
    static SyndromeState from_syndromes(const RecoveryParams& params,
                                        std::vector<std::uint64_t> syndromes);

    const RecoveryParams& params() const { return params_; }

    // Applies the update directly, powers computed incrementally.
    void update_naive(std::uint64_t i, std::int64_t delta);
    // Buffers the update; every 2k buffered updates are coalesced and applied
    // through the transposed-Vandermonde fast path.
    void update_batched(std::uint64_t i, std::int64_t delta);
    // Drains the buffer (no-op when empty).
    void flush();

    // Syndromes with the buffer drained first.
    std::span<const std::uint64_t> syndromes();
    std::span<const std::uint64_t> raw_syndromes() const { return syndromes_; }
    std::span<const std::pair<std::uint64_t, std::int64_t>> pending() const { return buffer_; }

    // Decode-or-fail: nullopt when the accumulated vector cannot be k-sparse.
    // If it is truly k-sparse with entries in [-N, N], returns it exactly.
    std::optional<SparseVector> report();

    void add_syndromes(std::span<const std::uint64_t> other);
    bool operator==(const SyndromeState& o) const;

private:
    RecoveryParams params_;
    std::vector<std::uint64_t> syndromes_; // 2k residues mod p
    std::vector<std::pair<std::uint64_t, std::int64_t>> buffer_;
};

// Test oracle: naive double loop over a dense vector (1-indexed coordinates).
std::vector<std::uint64_t> syndromes_of(const RecoveryParams& params,
                                        std::span<const std::int64_t> dense);

// Syndromes of a sparse candidate, used by report self-verification and the
// coordinator.
std::vector<std::uint64_t> syndromes_of_sparse(const RecoveryParams& params,
                                               const SparseVector& v);

} // namespace war
