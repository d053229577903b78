#pragma once

// Binary framing for the parameter-server protocol.
//
//   u32 BE payload length
//   payload:
//     u8  kind   (Hello=1 Welcome=2 GlobalParams=3 LocalUpdate=4 Done=5 Abort=6)
//     u32 BE round
//     u32 BE client_id
//     u32 BE dim
//     GlobalParams / LocalUpdate: dim x f64 BE weights, then f64 BE bias
//     Abort: UTF-8 reason (rest of payload), dim must be 0
//     others: nothing further

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedshield/error.hpp"
#include "fedshield/types.hpp"

namespace fedshield::net {

enum class MessageKind : std::uint8_t {
  Hello = 1,
  Welcome = 2,
  GlobalParams = 3,
  LocalUpdate = 4,
  Done = 5,
  Abort = 6,
};

inline std::string to_string(MessageKind k) {
  switch (k) {
    case MessageKind::Hello: return "Hello";
    case MessageKind::Welcome: return "Welcome";
    case MessageKind::GlobalParams: return "GlobalParams";
    case MessageKind::LocalUpdate: return "LocalUpdate";
    case MessageKind::Done: return "Done";
    case MessageKind::Abort: return "Abort";
  }
  return "kind#" + std::to_string(static_cast<int>(k));
}

inline constexpr bool carries_params(MessageKind k) {
  return k == MessageKind::GlobalParams || k == MessageKind::LocalUpdate;
}

/// Client id a Hello carries to ask the server to assign one.
inline constexpr std::uint32_t kAssignClientId = std::numeric_limits<std::uint32_t>::max();

inline constexpr std::size_t kLengthPrefixSize = 4;
inline constexpr std::size_t kHeaderSize = 13;
inline constexpr std::size_t kDefaultMaxFrame = 16u * 1024u * 1024u;

struct WireMessage {
  MessageKind kind = MessageKind::Hello;
  std::uint32_t round = 0;
  std::uint32_t client_id = 0;
  std::uint32_t dim = 0;
  std::vector<double> weights;  // parameter kinds only
  double bias = 0.0;            // parameter kinds only
  std::string reason;           // Abort only

  static WireMessage params(MessageKind kind, std::uint32_t round, std::uint32_t client_id, const ModelParams& p) {
    WireMessage m;
    m.kind = kind;
    m.round = round;
    m.client_id = client_id;
    m.dim = static_cast<std::uint32_t>(p.dim());
    m.weights = p.weights;
    m.bias = p.bias;
    return m;
  }

  static WireMessage control(MessageKind kind, std::uint32_t round, std::uint32_t client_id, std::uint32_t dim = 0) {
    WireMessage m;
    m.kind = kind;
    m.round = round;
    m.client_id = client_id;
    m.dim = dim;
    return m;
  }

  static WireMessage abort(std::uint32_t round, std::uint32_t client_id, std::string reason) {
    WireMessage m = control(MessageKind::Abort, round, client_id);
    m.reason = std::move(reason);
    return m;
  }

  ModelParams to_params(std::uint64_t model_round) const { return ModelParams{weights, bias, model_round}; }

  friend bool operator==(const WireMessage& a, const WireMessage& b) {
    return a.kind == b.kind && a.round == b.round && a.client_id == b.client_id && a.dim == b.dim &&
           a.reason == b.reason && a.weights.size() == b.weights.size() &&
           std::memcmp(&a.bias, &b.bias, sizeof(double)) == 0 &&
           (a.weights.empty() || std::memcmp(a.weights.data(), b.weights.data(), a.weights.size() * sizeof(double)) == 0);
  }
};

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(bits >> shift));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
         std::uint32_t{b[off + 3]};
}

inline double get_f64(std::span<const std::uint8_t> b, std::size_t off) {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < 8; ++i) bits = (bits << 8) | b[off + i];
  return std::bit_cast<double>(bits);
}

}  // namespace detail

/// Serializes one message into a complete length-prefixed frame.
inline std::vector<std::uint8_t> encode(const WireMessage& msg) {
  std::vector<std::uint8_t> out;
  const bool params = carries_params(msg.kind);
  const std::size_t body = params ? 8 * (static_cast<std::size_t>(msg.dim) + 1)
                                  : (msg.kind == MessageKind::Abort ? msg.reason.size() : 0);
  out.reserve(kLengthPrefixSize + kHeaderSize + body);
  detail::put_u32(out, static_cast<std::uint32_t>(kHeaderSize + body));
  out.push_back(static_cast<std::uint8_t>(msg.kind));
  detail::put_u32(out, msg.round);
  detail::put_u32(out, msg.client_id);
  detail::put_u32(out, msg.dim);
  if (params) {
    for (double w : msg.weights) detail::put_f64(out, w);
    detail::put_f64(out, msg.bias);
  } else if (msg.kind == MessageKind::Abort) {
    out.insert(out.end(), msg.reason.begin(), msg.reason.end());
  }
  return out;
}

/// Reads the length prefix; nullopt when fewer than 4 bytes are available.
inline std::optional<std::uint32_t> peek_frame_length(std::span<const std::uint8_t> bytes,
                                                      std::size_t max_frame = kDefaultMaxFrame) {
  if (bytes.size() < kLengthPrefixSize) return std::nullopt;
  const std::uint32_t len = detail::get_u32(bytes, 0);
  if (len > max_frame) {
    throw Error(ErrorKind::OversizeFrame, "payload length " + std::to_string(len) + " exceeds cap " +
                                              std::to_string(max_frame));
  }
  return len;
}

/// Decodes exactly one frame (length prefix included).
inline WireMessage decode(std::span<const std::uint8_t> frame, std::size_t max_frame = kDefaultMaxFrame) {
  auto malformed = [](std::size_t offset, const std::string& what) {
    return Error(ErrorKind::MalformedFrame, what + " at byte offset " + std::to_string(offset));
  };
  const auto len = peek_frame_length(frame, max_frame);
  if (!len) throw malformed(frame.size(), "truncated length prefix");
  if (frame.size() < kLengthPrefixSize + *len) throw malformed(frame.size(), "truncated payload");
  if (frame.size() > kLengthPrefixSize + *len) throw malformed(kLengthPrefixSize + *len, "trailing bytes after frame");
  if (*len < kHeaderSize) throw malformed(frame.size(), "payload shorter than header");

  const std::uint8_t tag = frame[4];
  if (tag < 1 || tag > 6) throw Error(ErrorKind::UnknownKind, "kind tag " + std::to_string(tag) + " at byte offset 4");

  WireMessage msg;
  msg.kind = static_cast<MessageKind>(tag);
  msg.round = detail::get_u32(frame, 5);
  msg.client_id = detail::get_u32(frame, 9);
  msg.dim = detail::get_u32(frame, 13);
  const std::size_t body_off = kLengthPrefixSize + kHeaderSize;
  const std::size_t body = *len - kHeaderSize;

  if (carries_params(msg.kind)) {
    const std::size_t expected = 8 * (static_cast<std::size_t>(msg.dim) + 1);
    if (body != expected) {
      throw malformed(body_off, "dim=" + std::to_string(msg.dim) + " needs " + std::to_string(expected) +
                                    " parameter bytes, frame has " + std::to_string(body));
    }
    msg.weights.resize(msg.dim);
    for (std::size_t j = 0; j <= msg.dim; ++j) {
      const std::size_t off = body_off + 8 * j;
      const double v = detail::get_f64(frame, off);
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::NonFiniteValue, "non-finite parameter at byte offset " + std::to_string(off));
      }
      if (j < msg.dim) msg.weights[j] = v;
      else msg.bias = v;
    }
  } else if (msg.kind == MessageKind::Abort) {
    if (msg.dim != 0) throw malformed(13, "Abort frames must carry dim=0");
    msg.reason.assign(reinterpret_cast<const char*>(frame.data() + body_off), body);
  } else if (body != 0) {
    throw malformed(body_off, to_string(msg.kind) + " frames carry no body");
  }
  return msg;
}

}  // namespace fedshield::net
