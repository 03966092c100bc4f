#pragma once

#include "war/pfhe.hpp"
#include "war/recovery.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

namespace war {

struct StreamOptions {
    bool batched_updates = true;
    // 0 disables the evaluated-ciphertext memo (the default space profile);
    // nonzero bounds an LRU keyed by coordinate.
    std::size_t memo_capacity = 0;
};

// The WAR streaming algorithm: relaxed syndrome recovery produces a
// candidate, the FHE sketch verifies it.
class StreamState {
public:
    static StreamState setup(std::uint64_t n, std::uint64_t k, std::uint64_t entry_bound,
                             const PfheParams& pfhe, const Seed32& seed,
                             const StreamOptions& opts = {});
    // TEST MODE: real keys, digest ciphertexts encrypt the bits of planted_m.
    static StreamState setup_test_mode(std::uint64_t n, std::uint64_t k,
                                       std::uint64_t entry_bound, const PfheParams& pfhe,
                                       std::uint64_t planted_m, const Seed32& seed,
                                       const StreamOptions& opts = {});

    void update(std::uint64_t i, std::int64_t delta);

    // Candidate from the relaxed scheme, accepted only if its hash matches
    // the running sketch. nullopt is the rejection symbol.
    std::optional<SparseVector> report();
    // The relaxed scheme's answer without the hash check (ablation only).
    std::optional<SparseVector> report_unverified();

    // Hash over a candidate's support, plus its plaintext/noise tag in test
    // mode. Exposed for the adversarial harness.
    std::pair<ModMatrix, std::optional<CtTag>> compute_hash(const SparseVector& candidate);

    // Zeroes the sketch and recovery state; keeps the digest and memo.
    void reset();

    std::uint64_t n() const { return n_; }
    std::uint64_t k() const { return k_; }
    std::uint64_t entry_bound() const { return entry_bound_; }
    const Digest& digest() const { return *digest_; }
    const ModMatrix& sketch() const { return sketch_; }
    const std::optional<CtTag>& sketch_tag() const { return sketch_tag_; }
    SyndromeState& recovery() { return rec_; }
    CtEvaluator& evaluator() { return *eval_; }
    const RecoveryParams& recovery_params() const { return rec_.params(); }

    bool test_mode() const { return planted_m_ != 0; }
    std::uint64_t planted_index() const { return planted_m_; }
    const SecretKey* secret_key() const { return sk_ ? sk_.get() : nullptr; }

    // Full internal state, revealed to white-box adversaries: parameters,
    // digest bytes (the seed in production), sketch, syndromes, pending
    // buffer, memoized indices.
    std::vector<std::uint8_t> serialize_state() const;
    // In-memory footprint of the maintained state, in bytes.
    std::size_t memory_footprint() const;

private:
    StreamState(std::uint64_t n, std::uint64_t k, std::uint64_t entry_bound, Digest digest,
                const StreamOptions& opts, std::uint64_t planted_m,
                std::unique_ptr<SecretKey> sk);

    std::uint64_t n_, k_, entry_bound_;
    StreamOptions opts_;
    std::unique_ptr<Digest> digest_;
    std::unique_ptr<CtEvaluator> eval_;
    ModMatrix sketch_;
    SyndromeState rec_;
    std::uint64_t planted_m_ = 0;
    std::unique_ptr<SecretKey> sk_;
    std::optional<CtTag> sketch_tag_;
};

// Validates the Construction-1 parameter constraints; throws
// std::invalid_argument naming the violated inequality.
void validate_stream_params(std::uint64_t n, std::uint64_t k, std::uint64_t entry_bound,
                            const PfheParams& pfhe);

// ---------------------------------------------------------------------------
// Trace file format: "U <i> <delta>" per update, "Q" per query; blank lines
// and lines starting with '#' are ignored.

struct TraceEvent {
    bool is_query = false;
    std::uint64_t index = 0;
    std::int64_t delta = 0;
};

struct trace_parse_error : std::runtime_error {
    trace_parse_error(std::size_t line_no, const std::string& what)
        : std::runtime_error("trace parse error at line " + std::to_string(line_no) + ": " + what),
          line(line_no) {}
    std::size_t line;
};

std::vector<TraceEvent> parse_trace(std::istream& in);

// "BOT", or "<k'> <idx>:<val> ..." with indices ascending.
std::string format_report(const std::optional<SparseVector>& r);

} // namespace war
