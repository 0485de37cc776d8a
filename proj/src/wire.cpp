#include "poseprompt/wire.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <iostream>
#include <sstream>

#include "poseprompt/error.hpp"

namespace poseprompt {

using nlohmann::json;

std::string wire_id(std::int64_t image_id, std::int64_t instance_id) {
  return std::to_string(image_id) + ":" + std::to_string(instance_id);
}

json request_to_json(const SegmenterRequest& req) {
  json points = json::array();
  for (const auto& p : req.prompts.points) {
    points.push_back({{"x", p.position.x()},
                      {"y", p.position.y()},
                      {"label", p.label == PointLabel::Positive ? 1 : 0}});
  }
  json j;
  j["id"] = wire_id(req.image_id, req.instance_id);
  j["h"] = req.dims.height;
  j["w"] = req.dims.width;
  j["points"] = std::move(points);
  j["box"] = req.prompts.box
                 ? json::array({req.prompts.box->x, req.prompts.box->y, req.prompts.box->w,
                                req.prompts.box->h})
                 : json(nullptr);
  j["prior"] = req.prior_mask ? json(rle_compress(*req.prior_mask)) : json(nullptr);
  return j;
}

namespace {

[[noreturn]] void protocol_error(const std::string& what) {
  throw Error(ErrorCode::ProtocolError, what);
}

}  // namespace

SegmenterRequest request_from_json(const json& j) {
  try {
    SegmenterRequest req;
    const std::string id = j.at("id").get<std::string>();
    const auto colon = id.find(':');
    if (colon == std::string::npos) protocol_error("request id '" + id + "' is not image:instance");
    req.image_id = std::stoll(id.substr(0, colon));
    req.instance_id = std::stoll(id.substr(colon + 1));
    req.dims = MaskDims(j.at("h").get<Index>(), j.at("w").get<Index>());
    for (const auto& p : j.at("points")) {
      PromptPoint pp;
      pp.position = {p.at("x").get<double>(), p.at("y").get<double>()};
      pp.label = p.at("label").get<int>() == 1 ? PointLabel::Positive : PointLabel::Negative;
      req.prompts.points.push_back(pp);
    }
    if (j.contains("box") && !j["box"].is_null()) {
      const auto& b = j["box"];
      req.prompts.box =
          BBox{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()};
    }
    if (j.contains("prior") && !j["prior"].is_null()) {
      req.prior_mask = rle_decompress(j["prior"].get<std::string>(), req.dims);
    }
    return req;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    protocol_error(std::string("bad request: ") + e.what());
  }
}

std::string encode_request_line(const SegmenterRequest& req) { return request_to_json(req).dump(); }

std::string encode_response_line(const std::string& id, const SegmenterResponse& resp) {
  json j;
  j["id"] = id;
  j["rle"] = rle_compress(resp.mask);
  j["conf"] = resp.confidence;
  return j.dump();
}

SegmenterResponse decode_response_line(const std::string& line, const std::string& expected_id,
                                       MaskDims dims) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    protocol_error(std::string("response is not JSON: ") + e.what());
  }
  try {
    if (!j.is_object()) protocol_error("response is not an object");
    const auto id = j.at("id").get<std::string>();
    if (id != expected_id) protocol_error("response id '" + id + "', expected '" + expected_id + "'");
    if (j.contains("error")) protocol_error("peer error: " + j["error"].dump());
    SegmenterResponse resp;
    resp.mask = rle_decompress(j.at("rle").get<std::string>(), dims);
    resp.confidence = j.at("conf").get<double>();
    rle_decode(resp.mask);  // rejects count-sum mismatches
    return resp;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ProtocolError) throw;
    protocol_error(e.what());
  } catch (const std::exception& e) {
    protocol_error(std::string("bad response: ") + e.what());
  }
}

FdChannel::FdChannel(int read_fd, int write_fd) : read_fd_(read_fd), write_fd_(write_fd) {}

FdChannel::~FdChannel() {
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  if (read_fd_ >= 0) ::close(read_fd_);
}

void FdChannel::write_line(const std::string& line) {
  if (write_fd_ < 0) throw Error(ErrorCode::PeerClosed, "channel closed for writing");
  std::string data = line;
  data.push_back('\n');
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(write_fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) {
      const ssize_t m = ::write(write_fd_, data.data() + off, data.size() - off);
      if (m < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::PeerClosed, std::string("write: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(m);
      continue;
    }
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::PeerClosed, std::string("send: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string FdChannel::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw Error(ErrorCode::Timeout, "no response line in time");
    pollfd pfd{read_fd_, POLLIN, 0};
    const int r = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (r < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::PeerClosed, std::string("poll: ") + std::strerror(errno));
    }
    if (r == 0) throw Error(ErrorCode::Timeout, "no response line in time");
    char chunk[65536];
    const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::PeerClosed, std::string("read: ") + std::strerror(errno));
    }
    if (n == 0) throw Error(ErrorCode::PeerClosed, "peer closed the stream");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void FdChannel::close_write() {
  if (write_fd_ < 0) return;
  if (write_fd_ == read_fd_) {
    ::shutdown(write_fd_, SHUT_WR);
  } else {
    ::close(write_fd_);
  }
  write_fd_ = -1;
}

std::pair<std::unique_ptr<LineChannel>, std::unique_ptr<LineChannel>> channel_pair() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
    throw Error(ErrorCode::IoError, std::string("socketpair: ") + std::strerror(errno));
  }
  return {std::make_unique<FdChannel>(fds[0], fds[0]), std::make_unique<FdChannel>(fds[1], fds[1])};
}

std::unique_ptr<LineChannel> connect_tcp(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 || !res) {
    throw Error(ErrorCode::PeerClosed, "cannot resolve " + host);
  }
  int fd = -1;
  for (addrinfo* a = res; a; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw Error(ErrorCode::PeerClosed, "cannot connect to " + host + ":" + service);
  return std::make_unique<FdChannel>(fd, fd);
}

namespace {

class ChildChannel : public FdChannel {
 public:
  ChildChannel(int read_fd, int write_fd, pid_t pid) : FdChannel(read_fd, write_fd), pid_(pid) {}
  ~ChildChannel() override {
    close_write();
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }

 private:
  pid_t pid_;
};

}  // namespace

std::unique_ptr<LineChannel> spawn_process(const std::vector<std::string>& argv) {
  if (argv.empty()) throw Error(ErrorCode::InvalidArgument, "empty command");
  ::signal(SIGPIPE, SIG_IGN);
  int to_child[2], from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw Error(ErrorCode::IoError, "pipe");
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw Error(ErrorCode::IoError, "pipe");
  }
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  const pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorCode::IoError, std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execvp(args[0], args.data());
    _exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<ChildChannel>(from_child[0], to_child[1], pid);
}

std::unique_ptr<LineChannel> open_endpoint(const std::string& endpoint) {
  if (endpoint.rfind("tcp://", 0) == 0) {
    const std::string rest = endpoint.substr(6);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "endpoint needs host:port");
    return connect_tcp(rest.substr(0, colon), std::stoi(rest.substr(colon + 1)));
  }
  if (endpoint.rfind("exec:", 0) == 0) {
    std::istringstream in(endpoint.substr(5));
    std::vector<std::string> argv;
    for (std::string tok; in >> tok;) argv.push_back(tok);
    return spawn_process(argv);
  }
  throw Error(ErrorCode::InvalidArgument, "endpoint must start with tcp:// or exec:");
}

SegmenterResponse external_segment(LineChannel& channel, const SegmenterRequest& req,
                                   std::chrono::milliseconds timeout) {
  validate(req.prompts);
  channel.write_line(encode_request_line(req));
  return decode_response_line(channel.read_line(timeout), wire_id(req.image_id, req.instance_id),
                              req.dims);
}

namespace {

std::string handle_line(const std::string& line, const RequestHandler& handler) {
  std::string id;
  try {
    const json j = json::parse(line);
    if (j.is_object() && j.contains("id") && j["id"].is_string()) id = j["id"].get<std::string>();
    const SegmenterRequest req = request_from_json(j);
    return encode_response_line(id, handler(req));
  } catch (const std::exception& e) {
    json err;
    err["id"] = id;
    err["error"] = e.what();
    return err.dump();
  }
}

}  // namespace

void serve_segmenter(LineChannel& channel, const RequestHandler& handler) {
  for (;;) {
    std::string line;
    try {
      line = channel.read_line(std::chrono::hours(24));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::PeerClosed) return;
      throw;
    }
    if (line.empty()) continue;
    try {
      channel.write_line(handle_line(line, handler));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::PeerClosed) return;
      throw;
    }
  }
}

void serve_segmenter_stdio(const RequestHandler& handler) {
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    std::cout << handle_line(line, handler) << '\n' << std::flush;
  }
}

TcpListener::TcpListener(int port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) throw Error(ErrorCode::IoError, "socket");
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 16) != 0) {
    ::close(fd_);
    throw Error(ErrorCode::IoError, std::string("bind/listen: ") + std::strerror(errno));
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() { ::close(fd_); }

std::unique_ptr<LineChannel> TcpListener::accept() {
  const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
  if (fd < 0) throw Error(ErrorCode::IoError, std::string("accept: ") + std::strerror(errno));
  return std::make_unique<FdChannel>(fd, fd);
}

}  // namespace poseprompt
