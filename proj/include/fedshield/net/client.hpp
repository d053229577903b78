#pragma once

// Federation client: holds its shard locally and only ever transmits Hello,
// LocalUpdate, or (on failure) Abort frames.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>

#include "fedshield/error.hpp"
#include "fedshield/fed/local_trainer.hpp"
#include "fedshield/logreg.hpp"
#include "fedshield/net/socket.hpp"
#include "fedshield/net/wire.hpp"
#include "fedshield/types.hpp"

namespace fedshield::net {

struct ClientOptions {
  // kAssignClientId asks the server to pick one.
  std::uint32_t client_id = kAssignClientId;
  // Longest wait for any server frame (covers other clients' training time).
  std::chrono::milliseconds io_timeout{300'000};
  std::size_t max_frame = kDefaultMaxFrame;
  FrameObserver observer;
};

struct ClientResult {
  int exit_code = kExitOk;
  std::optional<ErrorKind> error;
  std::string message;
  std::uint32_t client_id = kAssignClientId;
  std::size_t updates_sent = 0;

  bool ok() const { return exit_code == kExitOk; }
};

/// Joins the federation at `server_addr` and trains on `shard` every round
/// until the server signals Done or Abort.
inline ClientResult client_run(const std::string& server_addr, const ClientShard& shard, const TrainConfig& train_cfg,
                               ClientOptions options = {}) {
  ClientResult result;
  std::optional<FrameChannel> channel;
  std::uint32_t round = 0;

  auto fail = [&](ErrorKind kind, const std::string& message, bool notify_server) {
    if (notify_server && channel) {
      channel->send_quietly(WireMessage::abort(round, result.client_id, std::string(to_string(kind)) + ": " + message));
    }
    result.error = kind;
    result.exit_code = exit_code(kind);
    result.message = message;
    return result;
  };

  try {
    if (shard.embeddings.empty()) return fail(ErrorKind::EmptyDataset, "shard is empty", false);
    const fed::LocalTrainer trainer(shard, train_cfg);
    const auto dim = static_cast<std::uint32_t>(trainer.dim());

    channel.emplace(connect_tcp(server_addr), options.observer, options.max_frame);
    channel->send(WireMessage::control(MessageKind::Hello, 0, options.client_id, dim));

    auto next = [&] { return channel->receive(Clock::now() + options.io_timeout); };

    WireMessage welcome = next();
    if (welcome.kind == MessageKind::Abort) {
      return fail(kind_from_abort_reason(welcome.reason, ErrorKind::ProtocolViolation),
                  "server refused: " + welcome.reason, false);
    }
    if (welcome.kind != MessageKind::Welcome) {
      return fail(ErrorKind::ProtocolViolation, "expected Welcome, got " + to_string(welcome.kind), true);
    }
    if (options.client_id != kAssignClientId && welcome.client_id != options.client_id) {
      return fail(ErrorKind::ProtocolViolation, "server assigned a different client id", true);
    }
    result.client_id = welcome.client_id;

    for (;;) {
      WireMessage msg = next();
      switch (msg.kind) {
        case MessageKind::Done:
          result.message = "done after " + std::to_string(result.updates_sent) + " update(s)";
          return result;
        case MessageKind::Abort:
          return fail(kind_from_abort_reason(msg.reason, ErrorKind::ProtocolViolation),
                      "server aborted: " + msg.reason, false);
        case MessageKind::GlobalParams:
          break;
        default:
          return fail(ErrorKind::ProtocolViolation, "unexpected " + to_string(msg.kind), true);
      }
      if (msg.round != round + 1) {
        return fail(ErrorKind::ProtocolViolation,
                    "expected round " + std::to_string(round + 1) + ", server sent round " + std::to_string(msg.round),
                    true);
      }
      if (msg.client_id != result.client_id) {
        return fail(ErrorKind::ProtocolViolation, "GlobalParams addressed to another client", true);
      }
      if (msg.dim != dim) {
        return fail(ErrorKind::DimensionMismatch, "global model dim " + std::to_string(msg.dim), true);
      }
      round = msg.round;
      const fed::LocalUpdate update = trainer.update(msg.to_params(round - 1), round);
      channel->send(WireMessage::params(MessageKind::LocalUpdate, round, result.client_id, update.params));
      ++result.updates_sent;
    }
  } catch (const Error& e) {
    // Transport failures cannot be reported over the same transport.
    const bool transport = e.kind() == ErrorKind::ConnectionLost;
    return fail(e.kind(), e.what(), !transport);
  }
}

}  // namespace fedshield::net
