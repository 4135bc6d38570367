#pragma once

// Ordered, blocking byte-frame transports for the public channel and the
// Messenger that layers session/sequence bookkeeping on top of them.

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "b92/wire.hpp"

namespace b92::transport {

class Transport {
 public:
  virtual ~Transport() = default;
  // Both calls throw TransportError once the channel is closed or broken.
  virtual void send_frame(const std::string& frame) = 0;
  virtual std::string receive_frame() = 0;
  virtual void close() = 0;
};

// One direction of an in-process queue of frames.
class FrameQueue {
 public:
  void push(std::string frame);
  std::string pop();
  void close();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> frames_;
  bool closed_ = false;
};

struct LoopbackOptions {
  // Every send after this many frames (counted over both endpoints) breaks
  // the link. Used for fault injection.
  std::optional<std::size_t> fail_after_frames;
};

class LoopbackTransport final : public Transport {
 public:
  struct Shared;

  LoopbackTransport(std::shared_ptr<Shared> shared, bool first);
  ~LoopbackTransport() override;

  void send_frame(const std::string& frame) override;
  std::string receive_frame() override;
  void close() override;

 private:
  std::shared_ptr<Shared> shared_;
  bool first_;
};

std::pair<std::unique_ptr<LoopbackTransport>, std::unique_ptr<LoopbackTransport>> make_loopback(
    LoopbackOptions options = {});

class TcpTransport final : public Transport {
 public:
  // host:port; listen() blocks until one peer connects.
  static std::unique_ptr<TcpTransport> listen(const std::string& endpoint);
  static std::unique_ptr<TcpTransport> connect(const std::string& endpoint, int retries = 50);

  ~TcpTransport() override;
  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  void send_frame(const std::string& frame) override;
  std::string receive_frame() override;
  void close() override;

 private:
  explicit TcpTransport(int fd) : fd_(fd) {}
  int fd_;
};

std::pair<std::string, std::uint16_t> split_endpoint(const std::string& endpoint);

// Stamps outgoing messages with the session id and a per-session increasing
// sequence number, and rejects incoming messages that break either rule.
class Messenger {
 public:
  Messenger(Transport& t, std::uint64_t session_id) : transport_(t), session_id_(session_id) {}

  void begin_session(std::uint64_t session_id);
  std::uint64_t session_id() const { return session_id_; }

  void send(wire::Kind kind, nlohmann::json payload);
  wire::PublicMessage receive();
  wire::PublicMessage expect(wire::Kind kind);

  Transport& transport() { return transport_; }

 private:
  Transport& transport_;
  std::uint64_t session_id_;
  std::uint64_t next_out_ = 1;
  std::uint64_t last_in_ = 0;
};

}  // namespace b92::transport
