#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fedshield/net/wire.hpp"
#include "fedshield/rng.hpp"

namespace fedshield::net {
namespace {

std::vector<std::uint8_t> hex(const std::string& s) {
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i + 1 < s.size(); i += 2) out.push_back(static_cast<std::uint8_t>(std::stoi(s.substr(i, 2), nullptr, 16)));
  return out;
}

ErrorKind decode_error(const std::vector<std::uint8_t>& frame, std::size_t cap = kDefaultMaxFrame) {
  try {
    decode(frame, cap);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "decoded without error";
  return ErrorKind::IoError;
}

// Frames worked out byte by byte from the layout: u32 BE length, u8 kind,
// u32 round, u32 client id, u32 dim, then dim+1 f64 BE values.
TEST(WireGolden, HelloFrame) {
  const auto frame = encode(WireMessage::control(MessageKind::Hello, 0, 7));
  EXPECT_EQ(frame, hex("0000000d" "01" "00000000" "00000007" "00000000"));
  EXPECT_EQ(decode(frame), WireMessage::control(MessageKind::Hello, 0, 7));
}

TEST(WireGolden, GlobalParamsFrame) {
  const ModelParams p{{0.0, 1.0}, 0.5, 1};
  const auto frame = encode(WireMessage::params(MessageKind::GlobalParams, 1, 2, p));
  EXPECT_EQ(frame, hex("00000025" "03" "00000001" "00000002" "00000002"
                       "0000000000000000" "3ff0000000000000" "3fe0000000000000"));
  EXPECT_EQ(frame.size(), 41u);
  const auto back = decode(frame);
  EXPECT_EQ(back.to_params(1), p);
}

TEST(WireGolden, AbortCarriesReasonBytes) {
  const auto frame = encode(WireMessage::abort(3, 1, "ok"));
  EXPECT_EQ(frame, hex("0000000f" "06" "00000003" "00000001" "00000000" "6f6b"));
}

TEST(WireRoundTrip, RandomMessages) {
  Xoshiro256 rng(77);
  const MessageKind kinds[] = {MessageKind::Hello,       MessageKind::Welcome, MessageKind::GlobalParams,
                               MessageKind::LocalUpdate, MessageKind::Done,    MessageKind::Abort};
  for (int t = 0; t < 1000; ++t) {
    const MessageKind kind = kinds[rng.below(6)];
    WireMessage m;
    const auto round = static_cast<std::uint32_t>(rng());
    const auto id = static_cast<std::uint32_t>(rng());
    if (carries_params(kind)) {
      ModelParams p = ModelParams::zeros(rng.below(50));
      for (double& w : p.weights) w = std::bit_cast<double>(rng()) ;
      for (double& w : p.weights) {
        if (!std::isfinite(w)) w = rng.normal();
      }
      p.bias = rng.normal() * 1e-300;
      m = WireMessage::params(kind, round, id, p);
    } else if (kind == MessageKind::Abort) {
      std::string reason(rng.below(40), 'x');
      for (char& c : reason) c = static_cast<char>(rng.below(256));
      m = WireMessage::abort(round, id, reason);
    } else {
      m = WireMessage::control(kind, round, id, static_cast<std::uint32_t>(rng.below(1000)));
    }
    ASSERT_EQ(decode(encode(m)), m) << "trial " << t;
  }
}

TEST(WireDecode, TruncatedFramesAreMalformed) {
  const auto full = encode(WireMessage::params(MessageKind::LocalUpdate, 1, 0, ModelParams{{1, 2, 3}, 4, 0}));
  for (std::size_t cut = 0; cut < full.size(); ++cut) {
    const std::vector<std::uint8_t> part(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_EQ(decode_error(part), ErrorKind::MalformedFrame) << cut;
  }
  auto longer = full;
  longer.push_back(0);
  EXPECT_EQ(decode_error(longer), ErrorKind::MalformedFrame);
}

TEST(WireDecode, LengthDisagreeingWithDimIsMalformed) {
  auto frame = encode(WireMessage::params(MessageKind::LocalUpdate, 1, 0, ModelParams{{1, 2}, 4, 0}));
  frame[16] = 3;  // dim 2 -> 3 without adding bytes
  try {
    decode(frame);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MalformedFrame);
    EXPECT_NE(std::string(e.what()).find("offset 17"), std::string::npos) << e.what();
  }
}

TEST(WireDecode, UnknownKindTag) {
  auto frame = encode(WireMessage::control(MessageKind::Done, 1, 1));
  frame[4] = 9;
  EXPECT_EQ(decode_error(frame), ErrorKind::UnknownKind);
  frame[4] = 0;
  EXPECT_EQ(decode_error(frame), ErrorKind::UnknownKind);
}

TEST(WireDecode, NonFiniteParameters) {
  for (double bad : {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity()}) {
    WireMessage m = WireMessage::params(MessageKind::LocalUpdate, 1, 0, ModelParams{{1.0, bad}, 0.0, 0});
    EXPECT_EQ(decode_error(encode(m)), ErrorKind::NonFiniteValue);
  }
}

TEST(WireDecode, ControlFramesWithBodyAndOversize) {
  auto frame = encode(WireMessage::control(MessageKind::Welcome, 0, 1));
  frame[3] += 1;
  frame.push_back(0);
  EXPECT_EQ(decode_error(frame), ErrorKind::MalformedFrame);

  const std::vector<std::uint8_t> huge{0x01, 0x00, 0x00, 0x01, 0x02};  // 16 MiB + 1
  EXPECT_EQ(decode_error(huge), ErrorKind::OversizeFrame);
  EXPECT_THROW(peek_frame_length(huge), Error);
  const auto ok = encode(WireMessage::control(MessageKind::Done, 0, 0));
  EXPECT_EQ(decode_error(ok, 12), ErrorKind::OversizeFrame);
  EXPECT_EQ(peek_frame_length(std::vector<std::uint8_t>{0, 0}), std::nullopt);
}

}  // namespace
}  // namespace fedshield::net
