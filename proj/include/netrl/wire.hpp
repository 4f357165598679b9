#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace netrl {

// Microseconds since the session epoch. Simulated clocks and wall clocks
// share this representation.
struct Timestamp {
  std::uint64_t micros = 0;

  static constexpr Timestamp from_ms(double ms) {
    return Timestamp{static_cast<std::uint64_t>(ms * 1000.0 + 0.5)};
  }
  constexpr double ms() const { return static_cast<double>(micros) / 1000.0; }

  friend constexpr auto operator<=>(Timestamp, Timestamp) = default;
};

// Per-channel sequence number; starts at 0 and increments per message.
struct SeqNum {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(SeqNum, SeqNum) = default;
};

enum class MessageKind : std::uint8_t {
  kReset = 0,
  kObservation = 1,
  kAction = 2,
  kEpisodeEnd = 3,
};

inline constexpr std::size_t kGridSide = 7;
inline constexpr std::size_t kGridChannels = 3;
inline constexpr std::size_t kGridBytes = kGridSide * kGridSide * kGridChannels;

struct ResetBody {
  std::uint64_t seed = 0;
  friend bool operator==(const ResetBody&, const ResetBody&) = default;
};

struct VectorObservation {
  std::vector<double> values;
  friend bool operator==(const VectorObservation&, const VectorObservation&) = default;
};

// Row-major [row][col][channel] egocentric grid.
struct GridObservation {
  std::array<std::uint8_t, kGridBytes> cells{};
  friend bool operator==(const GridObservation&, const GridObservation&) = default;
};

struct ActionBody {
  std::uint8_t id = 0;
  friend bool operator==(const ActionBody&, const ActionBody&) = default;
};

struct EpisodeEndBody {
  double episode_return = 0.0;
  std::uint32_t steps = 0;
  bool success = false;
  friend bool operator==(const EpisodeEndBody&, const EpisodeEndBody&) = default;
};

using Observation = std::variant<VectorObservation, GridObservation>;
using Payload =
    std::variant<ResetBody, VectorObservation, GridObservation, ActionBody, EpisodeEndBody>;

struct Message {
  SeqNum seq;
  Timestamp send_ts;
  Payload payload;

  MessageKind kind() const;
  friend bool operator==(const Message&, const Message&) = default;
};

Message make_observation(SeqNum seq, Timestamp ts, const Observation& obs);
Observation observation_of(const Message& msg);

// Frame layout (little-endian):
//   magic[4] version:u8 kind:u8 seq:u32 send_ts:u64 payload_len:u32 payload
inline constexpr std::array<std::uint8_t, 4> kFrameMagic = {'N', 'R', 'L', 'W'};
inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kHeaderBytes = 22;
inline constexpr std::size_t kMaxPayloadBytes = 64 * 1024;

class EncodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DecodeErrc {
  kBadMagic,
  kBadVersion,
  kBadKind,
  kTruncated,
  kLengthMismatch,
};

const char* to_string(DecodeErrc code);

class DecodeError : public std::runtime_error {
 public:
  explicit DecodeError(DecodeErrc code)
      : std::runtime_error(to_string(code)), code_(code) {}
  DecodeErrc code() const { return code_; }

 private:
  DecodeErrc code_;
};

struct Decoded {
  Message message;
  std::size_t consumed = 0;
};

std::vector<std::uint8_t> encode_message(const Message& msg);

// Decodes the first frame in `bytes`; trailing bytes are left for the caller.
Decoded decode_message(std::span<const std::uint8_t> bytes);

// Duplicates count as stale.
constexpr bool is_stale(SeqNum incoming, SeqNum last_delivered) {
  return incoming.value <= last_delivered.value;
}

}  // namespace netrl
