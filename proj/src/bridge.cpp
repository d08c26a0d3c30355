#include "spectra/bridge.hpp"

#include <algorithm>
#include <chrono>
#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>
#include <iostream>
#include <mutex>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/core.h>

#include "spectra/error.hpp"

extern char** environ;

namespace spectra {

BridgeEndpoint BridgeEndpoint::child_process(std::string command, int timeout_ms) {
  BridgeEndpoint e;
  e.transport = Transport::child_process_stdio;
  e.launch_command = std::move(command);
  e.timeout_ms = timeout_ms;
  return e;
}

BridgeEndpoint BridgeEndpoint::tcp(std::string host, std::uint16_t port, int timeout_ms) {
  BridgeEndpoint e;
  e.transport = Transport::tcp;
  e.host = std::move(host);
  e.port = port;
  e.timeout_ms = timeout_ms;
  return e;
}

std::string hello_line() {
  nlohmann::ordered_json j;
  j["type"] = "hello";
  j["version"] = kBridgeProtocolVersion;
  return j.dump();
}

std::string embed_request_line(std::uint64_t id, std::span<const TimeSeries> batch) {
  nlohmann::ordered_json j;
  j["type"] = "embed";
  j["id"] = id;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& s : batch) {
    const auto v = s.values();
    arr.push_back(std::vector<double>(v.begin(), v.end()));
  }
  j["batch"] = std::move(arr);
  return j.dump();
}

namespace {

[[noreturn]] void protocol_error(const std::string& msg) {
  throw Error(ErrorKind::bridge_protocol, msg);
}

nlohmann::json parse_reply(const std::string& line) {
  if (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) {
    protocol_error("reply line has trailing whitespace");
  }
  try {
    auto j = nlohmann::json::parse(line);
    if (!j.is_object()) protocol_error("reply is not a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    protocol_error(fmt::format("malformed JSON reply at byte offset {}", e.byte > 0 ? e.byte - 1 : 0));
  } catch (const nlohmann::json::out_of_range&) {
    protocol_error("reply contains a number outside the double range");
  }
}

void reject_adapter_error(const nlohmann::json& j) {
  if (j.value("type", std::string{}) == "error") {
    throw Error(ErrorKind::bridge_process,
                fmt::format("adapter reported an error: {}", j.value("message", std::string{"?"})));
  }
}

}  // namespace

HandshakeInfo parse_ready_line(const std::string& line) {
  const auto j = parse_reply(line);
  reject_adapter_error(j);
  if (j.value("type", std::string{}) != "ready") {
    protocol_error(fmt::format("expected a 'ready' reply, got '{}'", line));
  }
  if (!j.contains("version") || !j["version"].is_number_integer()) {
    protocol_error("ready reply lacks an integer version");
  }
  const int version = j["version"].get<int>();
  if (version != kBridgeProtocolVersion) {
    protocol_error(fmt::format("adapter speaks protocol version {}, host requires {}", version,
                               kBridgeProtocolVersion));
  }
  if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<long long>() < 1) {
    protocol_error("ready reply must advertise an integer dim >= 1");
  }
  if (!j.contains("max_length") || !j["max_length"].is_number_integer() ||
      j["max_length"].get<long long>() < 1) {
    protocol_error("ready reply must advertise an integer max_length >= 1");
  }
  return {version, j["dim"].get<std::size_t>(), j["max_length"].get<std::size_t>()};
}

std::vector<std::vector<double>> parse_embedding_line(const std::string& line, std::uint64_t id,
                                                      std::size_t batch_size, std::size_t dim) {
  const auto j = parse_reply(line);
  reject_adapter_error(j);
  if (j.value("type", std::string{}) != "embedding") {
    protocol_error(fmt::format("expected an 'embedding' reply for request {}", id));
  }
  if (!j.contains("id") || !j["id"].is_number_unsigned() || j["id"].get<std::uint64_t>() != id) {
    protocol_error(fmt::format("reply id {} does not match request id {}",
                               j.contains("id") ? j["id"].dump() : "<missing>", id));
  }
  if (!j.contains("vectors") || !j["vectors"].is_array()) {
    protocol_error("embedding reply lacks a 'vectors' array");
  }
  const auto& vectors = j["vectors"];
  if (vectors.size() != batch_size) {
    throw Error(ErrorKind::bridge_dimension,
                fmt::format("adapter returned {} vectors for a batch of {}", vectors.size(),
                            batch_size));
  }
  std::vector<std::vector<double>> out;
  out.reserve(batch_size);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const auto& v = vectors[i];
    if (!v.is_array() || v.size() != dim) {
      throw Error(ErrorKind::bridge_dimension,
                  fmt::format("vector {} has length {}, expected {}", i,
                              v.is_array() ? v.size() : 0, dim));
    }
    std::vector<double> row;
    row.reserve(dim);
    for (const auto& x : v) {
      if (!x.is_number() || !std::isfinite(x.get<double>())) {
        protocol_error(fmt::format("vector {} contains a non-finite or non-numeric value", i));
      }
      row.push_back(x.get<double>());
    }
    out.push_back(std::move(row));
  }
  return out;
}

namespace detail {

// Byte transport with deadline-aware line reads.
class BridgeChannel {
 public:
  virtual ~BridgeChannel() = default;
  virtual int read_fd() const = 0;
  virtual int write_fd() const = 0;
  virtual std::string describe() const = 0;

  void write_all(const std::string& data, int timeout_ms) {
    const auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms);
    std::size_t sent = 0;
    while (sent < data.size()) {
      wait_for(write_fd(), POLLOUT, deadline, "writing a request");
      const ssize_t n = ::write(write_fd(), data.data() + sent, data.size() - sent);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw Error(ErrorKind::bridge_process,
                    fmt::format("cannot write to {}: {}", describe(), std::strerror(errno)));
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  std::string read_line(int timeout_ms) {
    const auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      wait_for(read_fd(), POLLIN, deadline, "waiting for a reply");
      char chunk[65536];
      const ssize_t n = ::read(read_fd(), chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw Error(ErrorKind::bridge_process,
                    fmt::format("cannot read from {}: {}", describe(), std::strerror(errno)));
      }
      if (n == 0) {
        throw Error(ErrorKind::bridge_process,
                    fmt::format("{} closed the connection before replying", describe()));
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 protected:
  using Clock = std::chrono::steady_clock;

  void wait_for(int fd, short events, Clock::time_point deadline, const char* what) {
    for (;;) {
      const auto left =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
      if (left.count() <= 0) {
        throw Error(ErrorKind::bridge_timeout, fmt::format("timed out {} on {}", what, describe()));
      }
      pollfd p{fd, events, 0};
      const int r = ::poll(&p, 1, static_cast<int>(left.count()));
      if (r < 0 && errno == EINTR) continue;
      if (r < 0) {
        throw Error(ErrorKind::bridge_process, fmt::format("poll failed: {}", std::strerror(errno)));
      }
      if (r == 0) continue;
      // POLLHUP/POLLERR fall through: the following read/write reports it.
      return;
    }
  }

 private:
  std::string buffer_;
};

}  // namespace detail

namespace {

void ignore_sigpipe_once() {
  // A dead adapter must surface as EPIPE on write, not terminate the host.
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

class ProcessChannel final : public detail::BridgeChannel {
 public:
  explicit ProcessChannel(const std::string& command) : command_(command) {
    int to_child[2], from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0 || ::pipe2(from_child, O_CLOEXEC) != 0) {
      throw Error(ErrorKind::bridge_process, fmt::format("pipe failed: {}", std::strerror(errno)));
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);

    // Own process group, so shutdown also reaches processes the shell forks.
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);

    std::string sh = "/bin/sh", dash_c = "-c", cmd = command;
    char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};
    const int rc = ::posix_spawn(&pid_, "/bin/sh", &actions, &attr, argv, environ);
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attr);
    ::close(to_child[0]);
    ::close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    if (rc != 0) {
      pid_ = -1;
      throw Error(ErrorKind::bridge_process,
                  fmt::format("cannot launch adapter '{}': {}", command, std::strerror(rc)));
    }
  }

  ~ProcessChannel() override {
    if (write_fd_ >= 0) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    if (pid_ <= 0) return;
    // Closing stdin asks the adapter to exit; give it a moment, then kill.
    bool exited = false;
    for (int i = 0; i < 50 && !exited; ++i) {
      exited = ::waitpid(pid_, nullptr, WNOHANG) == pid_;
      if (!exited) ::usleep(10000);
    }
    ::kill(-pid_, SIGKILL);
    if (!exited) ::waitpid(pid_, nullptr, 0);
  }

  int read_fd() const override { return read_fd_; }
  int write_fd() const override { return write_fd_; }
  std::string describe() const override { return fmt::format("adapter process '{}'", command_); }

 private:
  std::string command_;
  pid_t pid_ = -1;
  int read_fd_ = -1;
  int write_fd_ = -1;
};

class SocketChannel final : public detail::BridgeChannel {
 public:
  SocketChannel(const std::string& host, std::uint16_t port) : name_(fmt::format("{}:{}", host, port)) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* found = nullptr;
    const auto service = std::to_string(port);
    if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found); rc != 0) {
      throw Error(ErrorKind::bridge_process,
                  fmt::format("cannot resolve {}: {}", name_, ::gai_strerror(rc)));
    }
    for (addrinfo* a = found; a; a = a->ai_next) {
      fd_ = ::socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
      if (fd_ < 0) continue;
      if (::connect(fd_, a->ai_addr, a->ai_addrlen) == 0) break;
      ::close(fd_);
      fd_ = -1;
    }
    ::freeaddrinfo(found);
    if (fd_ < 0) {
      throw Error(ErrorKind::bridge_process, fmt::format("cannot connect to {}", name_));
    }
  }

  ~SocketChannel() override {
    if (fd_ >= 0) ::close(fd_);
  }

  int read_fd() const override { return fd_; }
  int write_fd() const override { return fd_; }
  std::string describe() const override { return fmt::format("adapter at {}", name_); }

 private:
  std::string name_;
  int fd_ = -1;
};

}  // namespace

BridgeClient::BridgeClient(BridgeEndpoint endpoint, WarningSink warn)
    : endpoint_(std::move(endpoint)), warn_(std::move(warn)) {
  if (!warn_) {
    warn_ = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
  }
  ignore_sigpipe_once();
  if (endpoint_.transport == BridgeEndpoint::Transport::child_process_stdio) {
    if (endpoint_.launch_command.empty()) {
      throw Error(ErrorKind::config, "child-process endpoint needs a launch command");
    }
    channel_ = std::make_unique<ProcessChannel>(endpoint_.launch_command);
  } else {
    channel_ = std::make_unique<SocketChannel>(endpoint_.host, endpoint_.port);
  }
}

BridgeClient::~BridgeClient() = default;

void BridgeClient::send_line(const std::string& line) {
  channel_->write_all(line + '\n', endpoint_.timeout_ms);
}

std::string BridgeClient::receive_line() { return channel_->read_line(endpoint_.timeout_ms); }

const HandshakeInfo& BridgeClient::handshake() {
  if (handshaken_) return info_;
  send_line(hello_line());
  info_ = parse_ready_line(receive_line());
  handshaken_ = true;
  return info_;
}

std::vector<std::vector<double>> BridgeClient::embed_batch(std::span<const TimeSeries> batch) {
  handshake();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].length() > info_.max_length) {
      throw Error(ErrorKind::bridge_dimension,
                  fmt::format("series {} has length {} but the adapter accepts at most {}", i,
                              batch[i].length(), info_.max_length));
    }
  }
  const std::uint64_t id = next_id_++;
  send_line(embed_request_line(id, batch));
  auto vectors = parse_embedding_line(receive_line(), id, batch.size(), info_.embedding_dim);

  // Frozen-contract spot check on inputs repeated within the batch.
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (std::size_t j = i + 1; j < batch.size(); ++j) {
      if (batch[i] == batch[j] && vectors[i] != vectors[j]) {
        warn_(fmt::format("request {}: identical inputs {} and {} produced different embeddings; "
                          "the adapter may not be frozen",
                          id, i, j));
      }
    }
  }
  return vectors;
}

}  // namespace spectra
