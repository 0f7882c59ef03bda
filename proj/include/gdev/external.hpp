#pragma once

// External workloads speak newline-delimited JSON over the child's
// stdin/stdout:
//
//   -> {"type":"init","model":"<id>","batch":<int>,"threads":<int>}
//   <- {"type":"ready","model":"<id>"}
//   -> {"type":"run","phase":"warmup"|"measure","iterations":<int>}
//   <- {"type":"latencies","phase":"<same>","values_ms":[...]}
//   -> {"type":"shutdown"}                      (child exits 0)
//   <- {"type":"error","message":"<text>"}      (at any time)
//
// The child times each forward pass itself, so IPC cost never enters the
// reported latencies. Unknown fields are ignored; an unknown type is a
// ProtocolError.

#include <chrono>
#include <memory>
#include <string>

#include "gdev/errors.hpp"
#include "gdev/workload.hpp"

namespace gdev {

class ExternalWorkload : public Workload {
 public:
  // Starts the child and completes the init/ready handshake.
  // Throws SpawnFailure or HandshakeFailure.
  static std::unique_ptr<ExternalWorkload> spawn(const WorkloadSpec& spec,
                                                 const RunConfig& config,
                                                 const ExternalOptions& options = {});

  ~ExternalWorkload() override;
  ExternalWorkload(const ExternalWorkload&) = delete;
  ExternalWorkload& operator=(const ExternalWorkload&) = delete;

  // Throws ProtocolError, WorkloadFailure or Timeout. After any error the
  // child is killed and the handle is unusable.
  std::vector<double> run_iterations(std::size_t n, Phase phase) override;

  // Sends shutdown and reaps the child. Returns its exit status, or
  // 128 + signal if it had to be killed.
  int shutdown();

  const std::string& model_id() const { return model_id_; }
  int pid() const { return pid_; }

 private:
  ExternalWorkload(int pid, int fd, std::string model_id, ExternalOptions options);

  void send_line(const std::string& line);
  // Throws Timeout at the deadline and WorkloadFailure on EOF.
  std::string read_line(std::chrono::steady_clock::time_point deadline);
  int reap(std::chrono::milliseconds grace);
  // Kills the child; the handle is unusable afterwards.
  void abandon();

  int pid_ = -1;
  int fd_ = -1;
  std::string model_id_;
  ExternalOptions options_;
  std::string buffer_;
  bool broken_ = false;
  int exit_status_ = -1;
};

std::unique_ptr<ExternalWorkload> spawn_external(const WorkloadSpec& spec,
                                                 const RunConfig& config,
                                                 const ExternalOptions& options = {});

}  // namespace gdev
