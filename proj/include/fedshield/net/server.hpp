#pragma once

// Parameter server: collects LocalUpdate frames from a fixed set of clients
// each round and broadcasts the averaged model. The only EmbeddingMatrix it
// ever holds is the held-out test set used for per-round accuracy.

#include <poll.h>

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fedshield/error.hpp"
#include "fedshield/fed/aggregate.hpp"
#include "fedshield/fed/config.hpp"
#include "fedshield/net/socket.hpp"
#include "fedshield/net/wire.hpp"
#include "fedshield/types.hpp"

namespace fedshield::net {

struct ServerOptions {
  std::chrono::milliseconds round_timeout{60'000};
  std::size_t max_frame = kDefaultMaxFrame;
  FrameObserver observer;
};

class ParameterServer {
 public:
  explicit ParameterServer(const std::string& listen_addr, ServerOptions options = {})
      : listener_(listen_tcp(listen_addr)), options_(std::move(options)) {}

  std::uint16_t port() const { return local_port(listener_); }

  /// Runs the whole federation. On failure every connected client receives
  /// an Abort carrying the error before the exception propagates.
  fed::FedResult run(std::uint32_t expected_clients, const fed::FedConfig& cfg, const EmbeddingMatrix& test_set) {
    if (expected_clients == 0) throw Error(ErrorKind::InvalidArgument, "expected_clients must be at least 1");
    if (cfg.aggregation() != fed::Aggregation::UnweightedMean) {
      throw Error(ErrorKind::InvalidArgument, "networked runs support the unweighted mean only");
    }
    dim_ = static_cast<std::uint32_t>(test_set.dim());
    try {
      admit(expected_clients);
      return rounds(cfg, test_set);
    } catch (const Error& e) {
      for (auto& [id, ch] : clients_) ch.send_quietly(WireMessage::abort(round_, id, e.what()));
      throw;
    }
  }

 private:
  using Deadline = Clock::time_point;

  FrameChannel make_channel(Socket s) { return FrameChannel(std::move(s), options_.observer, options_.max_frame); }

  static void reject(FrameChannel& ch, ErrorKind kind, const std::string& why) {
    ch.send_quietly(WireMessage::abort(0, kAssignClientId, std::string(to_string(kind)) + ": " + why));
    ch.close();
  }

  std::uint32_t next_free_id() const {
    std::uint32_t id = 0;
    while (clients_.count(id)) ++id;
    return id;
  }

  void admit(std::uint32_t expected) {
    const Deadline deadline = Clock::now() + options_.round_timeout;
    std::vector<FrameChannel> pending;
    while (clients_.size() < expected) {
      std::vector<pollfd> fds{{listener_.fd(), POLLIN, 0}};
      for (const auto& ch : pending) fds.push_back({ch.fd(), POLLIN, 0});
      const int rc = ::poll(fds.data(), fds.size(), detail::remaining_ms(deadline));
      if (rc < 0 && errno == EINTR) continue;
      if (rc == 0) {
        throw Error(ErrorKind::ClientTimeout, std::to_string(clients_.size()) + " of " + std::to_string(expected) +
                                                  " clients joined before the timeout");
      }
      for (std::size_t i = 1; i < fds.size(); ++i) {
        if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
        FrameChannel& ch = pending[i - 1];
        try {
          if (!ch.fill()) {
            ch.close();
            continue;
          }
          while (ch.open() && clients_.size() < expected) {
            auto msg = ch.try_pop();
            if (!msg) break;
            handle_hello(ch, *msg);
          }
        } catch (const Error& e) {
          reject(ch, e.kind(), e.what());
        }
      }
      std::erase_if(pending, [](const FrameChannel& ch) { return !ch.open(); });
      if (fds[0].revents & POLLIN) {
        if (auto s = accept_tcp(listener_)) pending.push_back(make_channel(std::move(*s)));
      }
    }
    // Late connections are refused.
    for (auto& ch : pending) reject(ch, ErrorKind::ProtocolViolation, "federation is full");
  }

  // Moves `ch` into clients_ on success (leaving it closed in `pending`).
  void handle_hello(FrameChannel& ch, const WireMessage& msg) {
    if (msg.kind != MessageKind::Hello) {
      throw Error(ErrorKind::ProtocolViolation, "expected Hello, got " + to_string(msg.kind));
    }
    if (msg.dim != 0 && msg.dim != dim_) {
      throw Error(ErrorKind::DimensionMismatch,
                  "client dim " + std::to_string(msg.dim) + " differs from server dim " + std::to_string(dim_));
    }
    std::uint32_t id = msg.client_id;
    if (id == kAssignClientId) {
      id = next_free_id();
    } else if (clients_.count(id)) {
      throw Error(ErrorKind::ProtocolViolation, "client id " + std::to_string(id) + " already taken");
    }
    auto [it, inserted] = clients_.emplace(id, std::move(ch));
    it->second.send(WireMessage::control(MessageKind::Welcome, 0, id, dim_));
  }

  fed::FedResult rounds(const fed::FedConfig& cfg, const EmbeddingMatrix& test_set) {
    fed::FedResult result;
    ModelParams global = ModelParams::zeros(dim_);
    std::map<std::uint32_t, std::uint64_t> last_update_round;

    for (std::uint64_t r = 1; r <= cfg.rounds(); ++r) {
      round_ = static_cast<std::uint32_t>(r);
      for (auto& [id, ch] : clients_) {
        ch.send(WireMessage::params(MessageKind::GlobalParams, round_, id, global));
      }

      std::map<std::uint32_t, ModelParams> received;
      const Deadline deadline = Clock::now() + options_.round_timeout;
      while (received.size() < clients_.size()) {
        std::vector<pollfd> fds;
        std::vector<std::uint32_t> ids;
        for (auto& [id, ch] : clients_) {
          fds.push_back({ch.fd(), POLLIN, 0});
          ids.push_back(id);
        }
        const int rc = ::poll(fds.data(), fds.size(), detail::remaining_ms(deadline));
        if (rc < 0 && errno == EINTR) continue;
        if (rc == 0) {
          throw Error(ErrorKind::ClientTimeout, "round " + std::to_string(r) + ": " +
                                                    std::to_string(received.size()) + " of " +
                                                    std::to_string(clients_.size()) + " updates arrived in time");
        }
        for (std::size_t i = 0; i < fds.size(); ++i) {
          if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
          const std::uint32_t id = ids[i];
          FrameChannel& ch = clients_.at(id);
          if (!ch.fill()) {
            ch.close();
            clients_.erase(id);
            throw Error(ErrorKind::ConnectionLost, "client " + std::to_string(id) + " disconnected");
          }
          while (auto msg = ch.try_pop()) {
            accept_update(id, *msg, r, received, last_update_round);
          }
        }
      }

      std::vector<fed::LocalUpdate> updates;
      fed::RoundLog log;
      log.round = r;
      for (auto& [id, params] : received) {
        log.client_ids.push_back(id);
        log.per_client_params.push_back(params);
        updates.push_back({id, std::move(params), 0.0, 0});
      }
      global = fed::aggregate_round(updates, cfg.aggregation());
      global.round = r;
      log.global_params = global;
      log.test_accuracy = fed::test_accuracy(global, test_set);
      result.logs.push_back(std::move(log));
    }

    for (auto& [id, ch] : clients_) ch.send(WireMessage::control(MessageKind::Done, round_, id));
    clients_.clear();
    result.final_params = std::move(global);
    return result;
  }

  void accept_update(std::uint32_t id, const WireMessage& msg, std::uint64_t round,
                     std::map<std::uint32_t, ModelParams>& received,
                     std::map<std::uint32_t, std::uint64_t>& last_update_round) {
    const std::string who = "client " + std::to_string(id);
    if (msg.kind == MessageKind::Abort) {
      throw Error(kind_from_abort_reason(msg.reason, ErrorKind::ProtocolViolation), who + " aborted: " + msg.reason);
    }
    if (msg.kind != MessageKind::LocalUpdate) {
      throw Error(ErrorKind::ProtocolViolation, who + " sent " + to_string(msg.kind) + " during a round");
    }
    if (msg.client_id != id) {
      throw Error(ErrorKind::ProtocolViolation, who + " sent an update labelled client " + std::to_string(msg.client_id));
    }
    if (received.count(id) || (last_update_round.count(id) && last_update_round[id] == msg.round)) {
      throw Error(ErrorKind::DuplicateUpdate, who + " sent a second update for round " + std::to_string(msg.round));
    }
    if (msg.round != round) {
      throw Error(ErrorKind::ProtocolViolation,
                  who + " sent an update for round " + std::to_string(msg.round) + " during round " + std::to_string(round));
    }
    if (msg.dim != dim_) {
      throw Error(ErrorKind::DimensionMismatch, who + " sent dim " + std::to_string(msg.dim));
    }
    last_update_round[id] = round;
    received.emplace(id, msg.to_params(round));
  }

  Socket listener_;
  ServerOptions options_;
  std::uint32_t dim_ = 0;
  std::uint32_t round_ = 0;
  std::map<std::uint32_t, FrameChannel> clients_;
};

/// Binds, runs the federation to completion and returns the final model.
inline fed::FedResult serve(const std::string& listen_addr, std::uint32_t expected_clients, const fed::FedConfig& cfg,
                            const EmbeddingMatrix& test_set, ServerOptions options = {}) {
  ParameterServer server(listen_addr, std::move(options));
  return server.run(expected_clients, cfg, test_set);
}

}  // namespace fedshield::net
