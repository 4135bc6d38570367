#include "b92/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

#include "b92/error.hpp"

namespace b92::transport {

void FrameQueue::push(std::string frame) {
  {
    std::lock_guard lock(mu_);
    if (closed_) throw TransportError("channel closed");
    frames_.push_back(std::move(frame));
  }
  cv_.notify_one();
}

std::string FrameQueue::pop() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return closed_ || !frames_.empty(); });
  if (frames_.empty()) throw TransportError("channel closed by peer");
  std::string f = std::move(frames_.front());
  frames_.pop_front();
  return f;
}

void FrameQueue::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

struct LoopbackTransport::Shared {
  FrameQueue to_second;
  FrameQueue to_first;
  LoopbackOptions options;
  std::mutex mu;
  std::size_t frames_sent = 0;
};

LoopbackTransport::LoopbackTransport(std::shared_ptr<Shared> shared, bool first)
    : shared_(std::move(shared)), first_(first) {}

LoopbackTransport::~LoopbackTransport() { close(); }

void LoopbackTransport::send_frame(const std::string& frame) {
  {
    std::lock_guard lock(shared_->mu);
    if (shared_->options.fail_after_frames &&
        shared_->frames_sent >= *shared_->options.fail_after_frames) {
      shared_->to_first.close();
      shared_->to_second.close();
      throw TransportError("injected link failure");
    }
    ++shared_->frames_sent;
  }
  (first_ ? shared_->to_second : shared_->to_first).push(frame);
}

std::string LoopbackTransport::receive_frame() {
  return (first_ ? shared_->to_first : shared_->to_second).pop();
}

void LoopbackTransport::close() {
  shared_->to_first.close();
  shared_->to_second.close();
}

std::pair<std::unique_ptr<LoopbackTransport>, std::unique_ptr<LoopbackTransport>> make_loopback(
    LoopbackOptions options) {
  auto shared = std::make_shared<LoopbackTransport::Shared>();
  shared->options = options;
  return {std::make_unique<LoopbackTransport>(shared, true),
          std::make_unique<LoopbackTransport>(shared, false)};
}

std::pair<std::string, std::uint16_t> split_endpoint(const std::string& endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos || colon + 1 == endpoint.size()) {
    throw ConfigError("endpoint must be host:port, got '" + endpoint + "'");
  }
  int port = 0;
  try {
    port = std::stoi(endpoint.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("invalid port in '" + endpoint + "'");
  }
  if (port <= 0 || port > 65535) throw ConfigError("invalid port in '" + endpoint + "'");
  std::string host = endpoint.substr(0, colon);
  if (host.empty()) host = "0.0.0.0";
  return {host, static_cast<std::uint16_t>(port)};
}

namespace {

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw TransportError("cannot resolve host '" + host + "'");
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return addr;
}

std::string errno_message(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

void write_all(int fd, const char* data, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_message("send"));
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

void read_all(int fd, char* data, std::size_t n) {
  while (n > 0) {
    const ssize_t r = ::recv(fd, data, n, 0);
    if (r == 0) throw TransportError("connection closed by peer");
    if (r < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_message("recv"));
    }
    data += r;
    n -= static_cast<std::size_t>(r);
  }
}

}  // namespace

std::unique_ptr<TcpTransport> TcpTransport::listen(const std::string& endpoint) {
  const auto [host, port] = split_endpoint(endpoint);
  const int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (lfd < 0) throw TransportError(errno_message("socket"));
  const int one = 1;
  ::setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  const sockaddr_in addr = resolve(host, port);
  if (::bind(lfd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) < 0 ||
      ::listen(lfd, 1) < 0) {
    const std::string msg = errno_message("bind/listen");
    ::close(lfd);
    throw TransportError(msg);
  }
  const int fd = ::accept(lfd, nullptr, nullptr);
  ::close(lfd);
  if (fd < 0) throw TransportError(errno_message("accept"));
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return std::unique_ptr<TcpTransport>(new TcpTransport(fd));
}

std::unique_ptr<TcpTransport> TcpTransport::connect(const std::string& endpoint, int retries) {
  const auto [host, port] = split_endpoint(endpoint);
  const sockaddr_in addr = resolve(host, port);
  for (int attempt = 0;; ++attempt) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw TransportError(errno_message("socket"));
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) == 0) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return std::unique_ptr<TcpTransport>(new TcpTransport(fd));
    }
    const std::string msg = errno_message("connect");
    ::close(fd);
    if (attempt >= retries) throw TransportError(msg);
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
}

TcpTransport::~TcpTransport() { close(); }

void TcpTransport::send_frame(const std::string& frame) {
  if (fd_ < 0) throw TransportError("connection closed");
  write_all(fd_, frame.data(), frame.size());
}

std::string TcpTransport::receive_frame() {
  if (fd_ < 0) throw TransportError("connection closed");
  unsigned char header[4];
  read_all(fd_, reinterpret_cast<char*>(header), 4);
  const std::uint32_t n = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                          (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};
  if (n + 4 > wire::kMaxFrameBytes) throw TransportError("incoming frame exceeds 64 KiB");
  std::string frame(4 + n, '\0');
  std::memcpy(frame.data(), header, 4);
  read_all(fd_, frame.data() + 4, n);
  return frame;
}

void TcpTransport::close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

void Messenger::begin_session(std::uint64_t session_id) {
  session_id_ = session_id;
  next_out_ = 1;
  last_in_ = 0;
}

void Messenger::send(wire::Kind kind, nlohmann::json payload) {
  wire::PublicMessage m{kind, session_id_, next_out_++, std::move(payload)};
  transport_.send_frame(wire::encode_frame(m));
}

wire::PublicMessage Messenger::receive() {
  const std::string frame = transport_.receive_frame();
  if (frame.size() < 4) throw TransportError("truncated frame");
  wire::PublicMessage m = wire::decode_body(std::string_view(frame).substr(4));
  if (m.session_id != session_id_) {
    if (m.kind != wire::Kind::Hello) {
      throw ProtocolDesyncError("message for session " + std::to_string(m.session_id) +
                                " during session " + std::to_string(session_id_));
    }
    begin_session(m.session_id);
  }
  if (m.sequence <= last_in_) {
    throw ProtocolDesyncError("sequence number " + std::to_string(m.sequence) +
                              " does not advance past " + std::to_string(last_in_));
  }
  last_in_ = m.sequence;
  return m;
}

wire::PublicMessage Messenger::expect(wire::Kind kind) {
  wire::PublicMessage m = receive();
  if (m.kind != kind) {
    throw ProtocolDesyncError("expected " + wire::to_string(kind) + ", received " +
                              wire::to_string(m.kind));
  }
  return m;
}

}  // namespace b92::transport
