#include "netrl/wire.hpp"

#include <bit>
#include <cstring>

namespace netrl {
namespace {

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return in_[pos_++]; }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{in_[pos_++]} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{in_[pos_++]} << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

struct KindOf {
  MessageKind operator()(const ResetBody&) const { return MessageKind::kReset; }
  MessageKind operator()(const VectorObservation&) const { return MessageKind::kObservation; }
  MessageKind operator()(const GridObservation&) const { return MessageKind::kObservation; }
  MessageKind operator()(const ActionBody&) const { return MessageKind::kAction; }
  MessageKind operator()(const EpisodeEndBody&) const { return MessageKind::kEpisodeEnd; }
};

void write_payload(Writer& w, const Payload& payload) {
  std::visit(
      [&w](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, ResetBody>) {
          w.u64(body.seed);
        } else if constexpr (std::is_same_v<T, VectorObservation>) {
          w.u32(static_cast<std::uint32_t>(body.values.size()));
          for (double v : body.values) w.f64(v);
        } else if constexpr (std::is_same_v<T, GridObservation>) {
          for (std::uint8_t b : body.cells) w.u8(b);
        } else if constexpr (std::is_same_v<T, ActionBody>) {
          w.u8(body.id);
        } else {
          w.f64(body.episode_return);
          w.u32(body.steps);
          w.u8(body.success ? 1 : 0);
        }
      },
      payload);
}

constexpr std::size_t kResetBytes = 8;
constexpr std::size_t kActionBytes = 1;
constexpr std::size_t kEpisodeEndBytes = 13;

// Grid payloads are a raw 147-byte block; vector payloads are 4 + 8n bytes,
// which can never equal 147, so the length alone tells them apart.
Payload read_payload(MessageKind kind, std::span<const std::uint8_t> body) {
  Reader r(body);
  switch (kind) {
    case MessageKind::kReset:
      if (body.size() != kResetBytes) throw DecodeError(DecodeErrc::kLengthMismatch);
      return ResetBody{r.u64()};
    case MessageKind::kAction:
      if (body.size() != kActionBytes) throw DecodeError(DecodeErrc::kLengthMismatch);
      return ActionBody{r.u8()};
    case MessageKind::kEpisodeEnd: {
      if (body.size() != kEpisodeEndBytes) throw DecodeError(DecodeErrc::kLengthMismatch);
      EpisodeEndBody end;
      end.episode_return = r.f64();
      end.steps = r.u32();
      const std::uint8_t flag = r.u8();
      if (flag > 1) throw DecodeError(DecodeErrc::kLengthMismatch);
      end.success = flag == 1;
      return end;
    }
    case MessageKind::kObservation: {
      if (body.size() == kGridBytes) {
        GridObservation grid;
        std::memcpy(grid.cells.data(), body.data(), kGridBytes);
        return grid;
      }
      if (body.size() < 4) throw DecodeError(DecodeErrc::kLengthMismatch);
      const std::uint32_t count = r.u32();
      if (body.size() != 4 + std::size_t{count} * 8) {
        throw DecodeError(DecodeErrc::kLengthMismatch);
      }
      VectorObservation obs;
      obs.values.resize(count);
      for (auto& v : obs.values) v = r.f64();
      return obs;
    }
  }
  throw DecodeError(DecodeErrc::kBadKind);
}

}  // namespace

MessageKind Message::kind() const { return std::visit(KindOf{}, payload); }

Message make_observation(SeqNum seq, Timestamp ts, const Observation& obs) {
  Message msg{seq, ts, {}};
  std::visit([&msg](const auto& o) { msg.payload = o; }, obs);
  return msg;
}

Observation observation_of(const Message& msg) {
  if (const auto* v = std::get_if<VectorObservation>(&msg.payload)) return *v;
  if (const auto* g = std::get_if<GridObservation>(&msg.payload)) return *g;
  throw std::invalid_argument("message does not carry an observation");
}

const char* to_string(DecodeErrc code) {
  switch (code) {
    case DecodeErrc::kBadMagic: return "bad magic";
    case DecodeErrc::kBadVersion: return "unsupported wire version";
    case DecodeErrc::kBadKind: return "unknown message kind";
    case DecodeErrc::kTruncated: return "truncated frame";
    case DecodeErrc::kLengthMismatch: return "payload length mismatch";
  }
  return "decode error";
}

std::vector<std::uint8_t> encode_message(const Message& msg) {
  std::vector<std::uint8_t> body;
  Writer bw(body);
  write_payload(bw, msg.payload);
  if (body.size() > kMaxPayloadBytes) {
    throw EncodeError("payload of " + std::to_string(body.size()) + " bytes exceeds 64 KiB");
  }

  std::vector<std::uint8_t> frame;
  frame.reserve(kHeaderBytes + body.size());
  Writer w(frame);
  for (std::uint8_t b : kFrameMagic) w.u8(b);
  w.u8(kWireVersion);
  w.u8(static_cast<std::uint8_t>(msg.kind()));
  w.u32(msg.seq.value);
  w.u64(msg.send_ts.micros);
  w.u32(static_cast<std::uint32_t>(body.size()));
  frame.insert(frame.end(), body.begin(), body.end());
  return frame;
}

Decoded decode_message(std::span<const std::uint8_t> bytes) {
  for (std::size_t i = 0; i < kFrameMagic.size() && i < bytes.size(); ++i) {
    if (bytes[i] != kFrameMagic[i]) throw DecodeError(DecodeErrc::kBadMagic);
  }
  if (bytes.size() < kHeaderBytes) throw DecodeError(DecodeErrc::kTruncated);

  Reader r(bytes.subspan(4));
  const std::uint8_t version = r.u8();
  if (version != kWireVersion) throw DecodeError(DecodeErrc::kBadVersion);
  const std::uint8_t kind = r.u8();
  if (kind > static_cast<std::uint8_t>(MessageKind::kEpisodeEnd)) {
    throw DecodeError(DecodeErrc::kBadKind);
  }
  Message msg;
  msg.seq = SeqNum{r.u32()};
  msg.send_ts = Timestamp{r.u64()};
  const std::uint32_t payload_len = r.u32();
  if (payload_len > kMaxPayloadBytes) throw DecodeError(DecodeErrc::kLengthMismatch);
  if (bytes.size() < kHeaderBytes + payload_len) throw DecodeError(DecodeErrc::kTruncated);

  msg.payload = read_payload(static_cast<MessageKind>(kind),
                             bytes.subspan(kHeaderBytes, payload_len));
  return Decoded{std::move(msg), kHeaderBytes + payload_len};
}

}  // namespace netrl
