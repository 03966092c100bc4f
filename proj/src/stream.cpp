#include "war/stream.hpp"

#include "war/wire.hpp"

#include <bit>
#include <istream>
#include <sstream>

namespace war {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

constexpr u64 kStreamKeygen = 0x300;
constexpr u64 kStreamEncrypt = 0x301;

Seed32 derive_seed(const Seed32& seed, u64 stream) {
    SeedExpander rng(seed, stream);
    Seed32 out{};
    rng.fill_bytes(out);
    return out;
}

} // namespace

void validate_stream_params(u64 n, u64 k, u64 entry_bound, const PfheParams& pfhe) {
    const std::size_t ell = std::max<std::size_t>(1, std::bit_width(n - 1));
    if (pfhe.msg_bits != ell) {
        throw std::invalid_argument("parameter violation: ell = ceil(log2 n) (digest has wrong message bit count)");
    }
    const u128 b_msg = static_cast<u128>(n) * entry_bound;
    if (static_cast<u128>(pfhe.q.value()) < 8 * b_msg) {
        throw std::invalid_argument("parameter violation: q >= 8*n*N");
    }
    const u128 rhs = 8 * b_msg * pfhe.eval_noise_bound() * k * entry_bound;
    if (static_cast<u128>(pfhe.q.value()) < rhs) {
        throw std::invalid_argument("parameter violation: q >= 8*(n*N)*E_eval*k*N");
    }
}

StreamState::StreamState(u64 n, u64 k, u64 entry_bound, Digest digest, const StreamOptions& opts,
                         u64 planted_m, std::unique_ptr<SecretKey> sk)
    : n_(n),
      k_(k),
      entry_bound_(entry_bound),
      opts_(opts),
      digest_(std::make_unique<Digest>(std::move(digest))),
      sketch_(digest_->params.g + 1, digest_->params.h, digest_->params.q),
      rec_(RecoveryParams::make(n, k, entry_bound)),
      planted_m_(planted_m),
      sk_(std::move(sk)) {
    eval_ = std::make_unique<CtEvaluator>(*digest_, n, opts.memo_capacity);
    if (planted_m_ != 0) sketch_tag_ = CtTag{};
}

StreamState StreamState::setup(u64 n, u64 k, u64 entry_bound, const PfheParams& pfhe,
                               const Seed32& seed, const StreamOptions& opts) {
    validate_stream_params(n, k, entry_bound, pfhe);
    return StreamState(n, k, entry_bound, sample_digest(pfhe, seed), opts, 0, nullptr);
}

StreamState StreamState::setup_test_mode(u64 n, u64 k, u64 entry_bound, const PfheParams& pfhe,
                                         u64 planted_m, const Seed32& seed,
                                         const StreamOptions& opts) {
    validate_stream_params(n, k, entry_bound, pfhe);
    auto [pk, sk] = keygen(pfhe, derive_seed(seed, kStreamKeygen));
    Digest digest = encrypted_digest(pfhe, pk, planted_m, n, derive_seed(seed, kStreamEncrypt));
    return StreamState(n, k, entry_bound, std::move(digest), opts, planted_m,
                       std::make_unique<SecretKey>(std::move(sk)));
}

void StreamState::update(u64 i, std::int64_t delta) {
    if (i < 1 || i > n_) throw std::out_of_range("update: index out of range");
    if (opts_.batched_updates) {
        rec_.update_batched(i, delta);
    } else {
        rec_.update_naive(i, delta);
    }
    eval_->accumulate(sketch_, i, delta, sketch_tag_ ? &*sketch_tag_ : nullptr);
}

std::optional<SparseVector> StreamState::report_unverified() {
    std::optional<SparseVector> x = rec_.report();
    if (!x || x->support_size() > k_) return std::nullopt;
    return x;
}

std::pair<ModMatrix, std::optional<CtTag>> StreamState::compute_hash(const SparseVector& candidate) {
    ModMatrix hash(digest_->params.g + 1, digest_->params.h, digest_->params.q);
    std::optional<CtTag> tag;
    if (sketch_tag_) tag = CtTag{};
    for (const SparseEntry& e : candidate.entries) {
        eval_->accumulate(hash, e.index, e.value, tag ? &*tag : nullptr);
    }
    return {std::move(hash), tag};
}

std::optional<SparseVector> StreamState::report() {
    std::optional<SparseVector> x = report_unverified();
    if (!x) return std::nullopt;
    // Hash over the candidate's support only; it is zero elsewhere.
    auto [hash, tag] = compute_hash(*x);
    if (!(hash == sketch_)) return std::nullopt;
    return x;
}

void StreamState::reset() {
    sketch_ = ModMatrix(digest_->params.g + 1, digest_->params.h, digest_->params.q);
    rec_ = SyndromeState(rec_.params());
    if (sketch_tag_) sketch_tag_ = CtTag{};
}

std::vector<std::uint8_t> StreamState::serialize_state() const {
    ByteWriter w;
    w.put_u64(n_);
    w.put_u64(k_);
    w.put_u64(entry_bound_);
    const std::vector<std::uint8_t> digest_bytes = digest_->serialize();
    w.put_u64(digest_bytes.size());
    w.put_bytes(digest_bytes);
    for (u64 v : sketch_.data()) w.put_u64(v);
    const auto syn = rec_.raw_syndromes();
    w.put_u64(syn.size());
    for (u64 v : syn) w.put_u64(v);
    const auto pending = rec_.pending();
    w.put_u64(pending.size());
    for (const auto& [idx, delta] : pending) {
        w.put_u64(idx);
        w.put_i64(delta);
    }
    const std::vector<u64> cached = eval_->cached_indices();
    w.put_u64(cached.size());
    for (u64 v : cached) w.put_u64(v);
    return std::move(w.bytes());
}

std::size_t StreamState::memory_footprint() const {
    const PfheParams& p = digest_->params;
    const std::size_t matrix_bytes = (p.g + 1) * p.h * sizeof(u64);
    std::size_t total = (p.msg_bits + 1) * matrix_bytes; // digest
    total += matrix_bytes;                               // sketch
    total += rec_.raw_syndromes().size() * sizeof(u64);  // syndromes
    total += 2 * rec_.params().k * sizeof(std::pair<u64, std::int64_t>); // buffer capacity
    return total;
}

// ---------------------------------------------------------------------------

std::vector<TraceEvent> parse_trace(std::istream& in) {
    std::vector<TraceEvent> events;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string op;
        if (!(ls >> op) || op[0] == '#') continue;
        if (op == "U") {
            TraceEvent e;
            if (!(ls >> e.index >> e.delta)) {
                throw trace_parse_error(line_no, "expected 'U <index> <delta>'");
            }
            std::string extra;
            if (ls >> extra) throw trace_parse_error(line_no, "unexpected trailing token");
            events.push_back(e);
        } else if (op == "Q") {
            std::string extra;
            if (ls >> extra) throw trace_parse_error(line_no, "unexpected trailing token");
            events.push_back(TraceEvent{true, 0, 0});
        } else {
            throw trace_parse_error(line_no, "unknown record '" + op + "'");
        }
    }
    return events;
}

std::string format_report(const std::optional<SparseVector>& r) {
    if (!r) return "BOT";
    std::ostringstream os;
    os << r->entries.size();
    for (const SparseEntry& e : r->entries) os << ' ' << e.index << ':' << e.value;
    return os.str();
}

} // namespace war
