#include "gdev/external.hpp"

#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <thread>

#include <json.hpp>

#include "gdev/errors.hpp"

extern char** environ;

namespace gdev {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

int decode_status(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

json parse_message(const std::string& line) {
  json msg = json::parse(line, nullptr, false);
  if (msg.is_discarded()) throw ProtocolError("malformed JSON line: " + line.substr(0, 200));
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    throw ProtocolError("message without a string \"type\" field");
  }
  return msg;
}

}  // namespace

ExternalWorkload::ExternalWorkload(int pid, int fd, std::string model_id,
                                   ExternalOptions options)
    : pid_(pid), fd_(fd), model_id_(std::move(model_id)), options_(options) {}

std::unique_ptr<ExternalWorkload> ExternalWorkload::spawn(const WorkloadSpec& spec,
                                                          const RunConfig& config,
                                                          const ExternalOptions& options) {
  spec.validate();
  if (spec.kind != WorkloadSpec::Kind::External) {
    throw InvalidWorkload("spawn_external needs an external spec");
  }
  validate_config(config);

  int fds[2];
  if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
    throw SpawnFailure(std::string("socketpair: ") + std::strerror(errno));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);

  std::vector<char*> argv;
  for (const auto& arg : spec.command) argv.push_back(const_cast<char*>(arg.c_str()));
  argv.push_back(nullptr);

  pid_t pid = -1;
  const int rc = posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(fds[1]);
  if (rc != 0) {
    close(fds[0]);
    throw SpawnFailure("cannot start '" + spec.command.front() + "': " + std::strerror(rc));
  }

  std::unique_ptr<ExternalWorkload> handle(
      new ExternalWorkload(pid, fds[0], config.model_id, options));

  try {
    handle->send_line(json{{"type", "init"},
                           {"model", config.model_id},
                           {"batch", config.batch_size},
                           {"threads", config.threads}}
                          .dump());
    const auto line = handle->read_line(Clock::now() + options.handshake_timeout);
    json msg = parse_message(line);
    const auto type = msg["type"].get<std::string>();
    if (type == "error") {
      throw HandshakeFailure("workload rejected init: " + msg.value("message", std::string{}));
    }
    if (type != "ready") throw HandshakeFailure("expected ready, got '" + type + "'");
    if (!msg.contains("model") || !msg["model"].is_string()) {
      throw HandshakeFailure("ready message lacks a model id");
    }
    if (msg["model"].get<std::string>() != config.model_id) {
      throw HandshakeFailure("ready echoed model '" + msg["model"].get<std::string>() +
                             "', expected '" + config.model_id + "'");
    }
  } catch (const HandshakeFailure&) {
    handle->abandon();
    throw;
  } catch (const Error& e) {
    handle->abandon();
    throw HandshakeFailure(std::string("handshake: ") + e.what());
  } catch (const json::exception& e) {
    handle->abandon();
    throw HandshakeFailure(std::string("malformed ready message: ") + e.what());
  }
  return handle;
}

std::unique_ptr<ExternalWorkload> spawn_external(const WorkloadSpec& spec,
                                                 const RunConfig& config,
                                                 const ExternalOptions& options) {
  return ExternalWorkload::spawn(spec, config, options);
}

ExternalWorkload::~ExternalWorkload() {
  if (pid_ > 0) {
    if (!broken_) {
      try {
        send_line(json{{"type", "shutdown"}}.dump());
      } catch (const Error&) {
      }
    }
    reap(std::chrono::milliseconds(broken_ ? 0 : 2000));
  }
  if (fd_ >= 0) close(fd_);
}

void ExternalWorkload::send_line(const std::string& line) {
  std::string data = line + '\n';
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw WorkloadFailure("workload closed its input: " + std::string(std::strerror(errno)));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string ExternalWorkload::read_line(Clock::time_point deadline) {
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      return line;
    }
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (remaining.count() <= 0) throw Timeout("workload did not reply before the deadline");
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(
                                          remaining.count(), 1'000'000'000LL)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw WorkloadFailure(std::string("poll: ") + std::strerror(errno));
    }
    if (ready == 0) continue;
    char chunk[65536];
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw WorkloadFailure(std::string("recv: ") + std::strerror(errno));
    }
    if (n == 0) {
      const int status = reap(std::chrono::milliseconds(1000));
      throw WorkloadFailure("workload exited unexpectedly (status " +
                            std::to_string(status) + ")");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

int ExternalWorkload::reap(std::chrono::milliseconds grace) {
  if (pid_ <= 0) return exit_status_;
  const auto deadline = Clock::now() + grace;
  int status = 0;
  for (;;) {
    const pid_t r = waitpid(pid_, &status, WNOHANG);
    if (r == pid_) {
      exit_status_ = decode_status(status);
      pid_ = -1;
      return exit_status_;
    }
    if (r < 0 && errno != EINTR) {
      pid_ = -1;
      return exit_status_;
    }
    if (Clock::now() >= deadline) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  ::kill(pid_, SIGKILL);
  while (waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
  }
  exit_status_ = decode_status(status);
  pid_ = -1;
  return exit_status_;
}

void ExternalWorkload::abandon() {
  broken_ = true;
  reap(std::chrono::milliseconds(0));
}

std::vector<double> ExternalWorkload::run_iterations(std::size_t n, Phase phase) {
  if (broken_ || pid_ <= 0) throw WorkloadFailure("workload handle is no longer usable");
  if (n == 0) return {};

  const std::string phase_name(to_string(phase));
  const auto budget = std::chrono::duration_cast<Clock::duration>(
      options_.iteration_timeout * static_cast<double>(n) + std::chrono::seconds(5));
  try {
    send_line(json{{"type", "run"}, {"phase", phase_name}, {"iterations", n}}.dump());
    json msg = parse_message(read_line(Clock::now() + budget));
    const auto type = msg["type"].get<std::string>();
    if (type == "error") throw WorkloadFailure("workload error: " + msg.value("message", std::string{}));
    if (type != "latencies") throw ProtocolError("unexpected message type '" + type + "'");
    if (msg.value("phase", std::string{}) != phase_name) {
      throw ProtocolError("latencies for phase '" + msg.value("phase", std::string{}) +
                          "', expected '" + phase_name + "'");
    }
    if (!msg.contains("values_ms") || !msg["values_ms"].is_array()) {
      throw ProtocolError("latencies message lacks values_ms array");
    }
    const auto& values = msg["values_ms"];
    if (values.size() != n) {
      throw ProtocolError("count mismatch: requested " + std::to_string(n) +
                          " iterations, received " + std::to_string(values.size()));
    }
    std::vector<double> out;
    out.reserve(n);
    for (const auto& v : values) {
      if (!v.is_number()) throw ProtocolError("non-numeric latency in values_ms");
      const double ms = v.get<double>();
      if (!(ms > 0.0) || !std::isfinite(ms)) {
        throw ProtocolError("latency must be positive and finite, got " + v.dump());
      }
      out.push_back(ms);
    }
    return out;
  } catch (const Error&) {
    abandon();
    throw;
  } catch (const json::exception& e) {
    abandon();
    throw ProtocolError(std::string("malformed message: ") + e.what());
  }
}

int ExternalWorkload::shutdown() {
  if (pid_ > 0 && !broken_) {
    try {
      send_line(json{{"type", "shutdown"}}.dump());
    } catch (const Error&) {
    }
  }
  broken_ = true;
  return reap(std::chrono::milliseconds(5000));
}

}  // namespace gdev
