#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spectra/time_series.hpp"

namespace spectra {

namespace detail {
class BridgeChannel;
}

inline constexpr int kBridgeProtocolVersion = 1;

struct BridgeEndpoint {
  enum class Transport { child_process_stdio, tcp };

  Transport transport = Transport::child_process_stdio;
  std::string launch_command;  // run through /bin/sh -c
  std::string host;
  std::uint16_t port = 0;
  int timeout_ms = 30000;

  static BridgeEndpoint child_process(std::string command, int timeout_ms = 30000);
  static BridgeEndpoint tcp(std::string host, std::uint16_t port, int timeout_ms = 30000);
};

struct HandshakeInfo {
  int protocol_version = kBridgeProtocolVersion;
  std::size_t embedding_dim = 0;
  std::size_t max_length = 0;
};

/// Builds the request lines exactly as sent: compact JSON, no trailing
/// whitespace (the caller appends '\n').
std::string hello_line();
std::string embed_request_line(std::uint64_t id, std::span<const TimeSeries> batch);

/// Validators for adapter replies. Throw bridge_* errors.
HandshakeInfo parse_ready_line(const std::string& line);
std::vector<std::vector<double>> parse_embedding_line(const std::string& line, std::uint64_t id,
                                                      std::size_t batch_size, std::size_t dim);

/// Host side of one bridge connection. Owns the adapter process (or socket)
/// for its lifetime; one request in flight at a time.
class BridgeClient {
 public:
  using WarningSink = std::function<void(const std::string&)>;

  explicit BridgeClient(BridgeEndpoint endpoint, WarningSink warn = {});
  ~BridgeClient();

  BridgeClient(const BridgeClient&) = delete;
  BridgeClient& operator=(const BridgeClient&) = delete;

  const HandshakeInfo& handshake();

  /// Embeds a batch; duplicated inputs are spot-checked for identical
  /// outputs and a mismatch is reported through the warning sink.
  std::vector<std::vector<double>> embed_batch(std::span<const TimeSeries> batch);

  const HandshakeInfo& info() const { return info_; }
  bool connected() const { return handshaken_; }

 private:
  void send_line(const std::string& line);
  std::string receive_line();

  BridgeEndpoint endpoint_;
  WarningSink warn_;
  std::unique_ptr<detail::BridgeChannel> channel_;
  HandshakeInfo info_;
  bool handshaken_ = false;
  std::uint64_t next_id_ = 1;
};

}  // namespace spectra
