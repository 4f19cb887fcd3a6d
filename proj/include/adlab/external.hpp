#pragma once

// Out-of-process autopilot speaking line-delimited JSON on stdio: the
// harness writes one scene per line and reads one decision per line.
//
//   > {"static":{...},"t":0.0,"ego":{"x":-20.0,"v":5.0},"env":{...}}
//   < {"mode":"progress","command_accel":2.0}
//
// One child process serves one simulation. POSIX only.

#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <string>

#include "adlab/autopilot.hpp"
#include "adlab/errors.hpp"
#include "adlab/scenario.hpp"

namespace adlab {

class ExternalController {
 public:
  explicit ExternalController(std::string command, int timeout_ms = 10000)
      : command_(std::move(command)), timeout_ms_(timeout_ms) {
    // A child that exits early must surface as a protocol error, not kill us.
    ::signal(SIGPIPE, SIG_IGN);
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) throw ProtocolError("external autopilot: pipe failed");
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw ProtocolError("external autopilot: pipe failed");
    }
    pid_ = ::fork();
    if (pid_ < 0) throw ProtocolError("external autopilot: fork failed");
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    in_ = to_child[1];
    out_ = from_child[0];
  }

  ExternalController(const ExternalController&) = delete;
  ExternalController& operator=(const ExternalController&) = delete;

  ~ExternalController() {
    if (in_ >= 0) ::close(in_);
    if (out_ >= 0) ::close(out_);
    if (pid_ > 0) {
      int st = 0;
      if (::waitpid(pid_, &st, WNOHANG) == 0) {
        ::kill(pid_, SIGTERM);
        ::waitpid(pid_, &st, 0);
      }
    }
  }

  Decision decide(const Scene& sc, const StaticPart& s, double) {
    json j = to_json(sc);
    json msg;
    msg["static"] = to_json(s);
    for (auto it = j.begin(); it != j.end(); ++it) msg[it.key()] = it.value();
    write_line(msg.dump());
    std::string line = read_line();
    json r;
    try {
      r = json::parse(line);
    } catch (const std::exception&) {
      throw ProtocolError("external autopilot: malformed decision line: " + line);
    }
    if (!r.is_object() || !r.contains("mode") || !r.contains("command_accel") ||
        !r["mode"].is_string() || !r["command_accel"].is_number())
      throw ProtocolError("external autopilot: decision needs mode and command_accel");
    Decision d;
    std::string m = r["mode"].get<std::string>();
    if (m == "progress") d.mode = Mode::Progress;
    else if (m == "cautious") d.mode = Mode::Cautious;
    else throw ProtocolError("external autopilot: unknown mode '" + m + "'");
    d.command_accel = r["command_accel"].get<double>();
    return d;
  }

 private:
  void write_line(const std::string& s) {
    std::string buf = s + "\n";
    std::size_t off = 0;
    while (off < buf.size()) {
      ssize_t n = ::write(in_, buf.data() + off, buf.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError("external autopilot: process closed its input");
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string read_line() {
    for (;;) {
      auto nl = pending_.find('\n');
      if (nl != std::string::npos) {
        std::string line = pending_.substr(0, nl);
        pending_.erase(0, nl + 1);
        return line;
      }
      pollfd p{out_, POLLIN, 0};
      int rc = ::poll(&p, 1, timeout_ms_);
      if (rc == 0) throw ProtocolError("external autopilot: timed out waiting for a decision");
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError("external autopilot: poll failed");
      }
      char chunk[4096];
      ssize_t n = ::read(out_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw ProtocolError("external autopilot: process ended without a decision");
      pending_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  std::string command_;
  int timeout_ms_;
  pid_t pid_ = -1;
  int in_ = -1;
  int out_ = -1;
  std::string pending_;
};

}  // namespace adlab
