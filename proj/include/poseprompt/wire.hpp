#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "poseprompt/oracle.hpp"

namespace poseprompt {

// Segmenter wire protocol: one compact JSON object per line.
//   request:  {"id", "h", "w", "points": [{"x","y","label"}], "box": [x,y,w,h]|null,
//              "prior": compressed-RLE|null}
//   response: {"id", "rle", "conf"}

/// Request id on the wire: "<image_id>:<instance_id>".
std::string wire_id(std::int64_t image_id, std::int64_t instance_id);

nlohmann::json request_to_json(const SegmenterRequest& req);
SegmenterRequest request_from_json(const nlohmann::json& j);
std::string encode_request_line(const SegmenterRequest& req);

std::string encode_response_line(const std::string& id, const SegmenterResponse& resp);

/// Throws ProtocolError on malformed JSON, missing fields, an id other than
/// `expected_id`, or an undecodable mask.
SegmenterResponse decode_response_line(const std::string& line, const std::string& expected_id,
                                       MaskDims dims);

/// Bidirectional newline-framed byte stream.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void write_line(const std::string& line) = 0;
  /// Next line without the terminator. Throws Timeout or PeerClosed.
  virtual std::string read_line(std::chrono::milliseconds timeout) = 0;
  /// No more writes; the peer sees end of stream.
  virtual void close_write() = 0;
};

/// Channel over POSIX file descriptors (pipes or a socket). Owns them.
class FdChannel : public LineChannel {
 public:
  FdChannel(int read_fd, int write_fd);
  ~FdChannel() override;
  FdChannel(const FdChannel&) = delete;
  FdChannel& operator=(const FdChannel&) = delete;

  void write_line(const std::string& line) override;
  std::string read_line(std::chrono::milliseconds timeout) override;
  void close_write() override;

 protected:
  int read_fd_;
  int write_fd_;

 private:
  std::string buffer_;
};

/// Connected pair of in-process channels (socketpair), for loopback use.
std::pair<std::unique_ptr<LineChannel>, std::unique_ptr<LineChannel>> channel_pair();

std::unique_ptr<LineChannel> connect_tcp(const std::string& host, int port);

/// Spawns `argv` with its stdin/stdout wired to the returned channel. The
/// child is reaped when the channel is destroyed.
std::unique_ptr<LineChannel> spawn_process(const std::vector<std::string>& argv);

/// Opens a channel from an endpoint spec: "tcp://host:port" or
/// "exec:<command line>" (split on spaces).
std::unique_ptr<LineChannel> open_endpoint(const std::string& endpoint);

/// One request/response exchange on `channel`.
SegmenterResponse external_segment(LineChannel& channel, const SegmenterRequest& req,
                                   std::chrono::milliseconds timeout = std::chrono::seconds(30));

class ExternalSegmenter : public Segmenter {
 public:
  explicit ExternalSegmenter(std::unique_ptr<LineChannel> channel,
                             std::chrono::milliseconds timeout = std::chrono::seconds(30))
      : channel_(std::move(channel)), timeout_(timeout) {}

  SegmenterResponse segment(const SegmenterRequest& req) override {
    return external_segment(*channel_, req, timeout_);
  }

 private:
  std::unique_ptr<LineChannel> channel_;
  std::chrono::milliseconds timeout_;
};

using RequestHandler = std::function<SegmenterResponse(const SegmenterRequest&)>;

/// Serves requests until the peer closes. A request that fails to parse or
/// to process is answered with {"id", "error"} so framing stays intact.
void serve_segmenter(LineChannel& channel, const RequestHandler& handler);

/// Serves NDJSON on plain stdin/stdout.
void serve_segmenter_stdio(const RequestHandler& handler);

/// Listening TCP socket on 127.0.0.1; port 0 picks a free one.
class TcpListener {
 public:
  explicit TcpListener(int port = 0);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  int port() const { return port_; }
  std::unique_ptr<LineChannel> accept();

 private:
  int fd_;
  int port_;
};

}  // namespace poseprompt
