#pragma once

#include "war/stream.hpp"
#include "war/wire.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace war {

enum class MsgType : std::uint8_t { setup = 0, packet = 1, result = 2 };

// zeta: the digest plus every public parameter a server needs.
struct SetupMsg {
    std::uint64_t n = 0, k = 0, entry_bound = 0;
    std::uint64_t p = 0; // syndrome prime
    Digest digest;

    RecoveryParams recovery_params() const;
};

struct PacketMsg {
    std::uint64_t server_id = 0;
    ModMatrix sketch;            // (g+1) x h mod q
    std::vector<std::uint64_t> phi; // 2k residues mod p
};

struct ResultMsg {
    std::optional<SparseVector> outcome; // nullopt encodes the rejection symbol
    bool operator==(const ResultMsg&) const = default;
};

std::vector<std::uint8_t> encode(const SetupMsg& msg);
std::vector<std::uint8_t> encode(const PacketMsg& msg);
std::vector<std::uint8_t> encode(const ResultMsg& msg);

MsgType peek_type(std::span<const std::uint8_t> frame);
SetupMsg decode_setup(std::span<const std::uint8_t> frame);
PacketMsg decode_packet(std::span<const std::uint8_t> frame);
ResultMsg decode_result(std::span<const std::uint8_t> frame);

SetupMsg dist_setup(std::uint64_t n, std::uint64_t k, std::uint64_t entry_bound,
                    const PfheParams& pfhe, const Seed32& seed);

// x_dense is the server's partition, length n, 1-indexed coordinates.
PacketMsg server_compute(const SetupMsg& zeta, std::uint64_t server_id,
                         std::span<const std::int64_t> x_dense);

ResultMsg coordinator_decide(std::span<const PacketMsg> packets, const SetupMsg& zeta);

enum class Transport { in_process, loopback_socket };

struct transport_error : std::runtime_error {
    transport_error(std::uint64_t server, const std::string& what)
        : std::runtime_error("transport failure (server " + std::to_string(server) + "): " + what),
          server_id(server) {}
    std::uint64_t server_id;
};

// setup -> T server computations -> coordinator. The socket transport runs
// the coordinator on a loopback listener with one connection per server and
// exercises the codec end-to-end; the result is transport-independent.
ResultMsg run_protocol(std::uint64_t n, std::uint64_t k, std::uint64_t entry_bound,
                       const PfheParams& pfhe, const Seed32& seed,
                       const std::vector<std::vector<std::int64_t>>& partitions,
                       Transport transport, std::uint16_t port = 0);

} // namespace war
