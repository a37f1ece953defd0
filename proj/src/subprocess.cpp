// Copyright 2026 The Centfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "src/subprocess.hpp"

#include <errno.h>
#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <string.h>
#include <sys/syscall.h>
#include <sys/wait.h>
#include <time.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdlib>

extern char** environ;

namespace centfuzz {
namespace detail {

namespace {

using Clock = std::chrono::steady_clock;

double Elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int OpenPidFd(pid_t pid) {
#if defined(SYS_pidfd_open)
  return static_cast<int>(::syscall(SYS_pidfd_open, pid, 0));
#else
  (void)pid;
  errno = ENOSYS;
  return -1;
#endif
}

// SIGKILL to the whole group, then reap the leader. Other members re-parent
// to init; a second sweep closes the window where a grandchild spawned
// between the first kill and the reap.
void KillGroupAndReap(pid_t pid) {
  ::killpg(pid, SIGKILL);
  int status;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  ::killpg(pid, SIGKILL);
}

// Reads everything currently buffered in fd without blocking.
void DrainNonblocking(int fd, std::string* out) {
  int flags = ::fcntl(fd, F_GETFL);
  if (flags >= 0) ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
  char buf[4096];
  while (true) {
    ssize_t n = ::read(fd, buf, sizeof(buf));
    if (n > 0) {
      out->append(buf, static_cast<size_t>(n));
      continue;
    }
    break;  // EOF, EAGAIN, or error: nothing more right now
  }
}

}  // namespace

RunResult RunChild(const RunSpec& spec, const std::atomic<bool>* cancel) {
  RunResult result;
  auto start = Clock::now();

  // stdout capture pipe (or /dev/null), plus a CLOEXEC status pipe that
  // reports exec failure: on a successful exec its write end closes and the
  // parent reads EOF; on failure the child writes errno through it.
  int out_pipe[2] = {-1, -1};
  int status_pipe[2] = {-1, -1};
  if (::pipe2(status_pipe, O_CLOEXEC) != 0) {
    result.spawn_errno = errno;
    return result;
  }
  if (spec.capture_stdout && ::pipe(out_pipe) != 0) {
    result.spawn_errno = errno;
    ::close(status_pipe[0]);
    ::close(status_pipe[1]);
    return result;
  }

  std::vector<char*> argv;
  argv.reserve(spec.argv.size() + 1);
  for (const auto& a : spec.argv) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  std::vector<std::string> env_storage;
  std::vector<char*> envp;
  if (!spec.extra_env.empty()) {
    for (char** e = environ; *e != nullptr; ++e) envp.push_back(*e);
    env_storage = spec.extra_env;
    for (auto& e : env_storage) envp.push_back(e.data());
    envp.push_back(nullptr);
  }

  pid_t pid = ::fork();
  if (pid < 0) {
    result.spawn_errno = errno;
    ::close(status_pipe[0]);
    ::close(status_pipe[1]);
    if (spec.capture_stdout) {
      ::close(out_pipe[0]);
      ::close(out_pipe[1]);
    }
    return result;
  }

  if (pid == 0) {
    // Child: own process group, so one killpg reaches every descendant.
    ::setpgid(0, 0);
    ::close(status_pipe[0]);
    if (spec.capture_stdout) {
      ::close(out_pipe[0]);
      ::dup2(out_pipe[1], STDOUT_FILENO);
      ::close(out_pipe[1]);
    } else {
      int devnull = ::open("/dev/null", O_WRONLY);
      if (devnull >= 0) {
        ::dup2(devnull, STDOUT_FILENO);
        ::close(devnull);
      }
    }
    if (!spec.working_dir.empty() && ::chdir(spec.working_dir.c_str()) != 0) {
      int err = errno;
      ssize_t ignored = ::write(status_pipe[1], &err, sizeof(err));
      (void)ignored;
      ::_exit(127);
    }
    if (envp.empty())
      ::execvp(argv[0], argv.data());
    else
      ::execvpe(argv[0], argv.data(), envp.data());
    int err = errno;
    ssize_t ignored = ::write(status_pipe[1], &err, sizeof(err));
    (void)ignored;
    ::_exit(127);
  }

  // Parent. Mirror the setpgid to close the race against an immediate exec.
  ::setpgid(pid, pid);
  ::close(status_pipe[1]);
  if (spec.capture_stdout) ::close(out_pipe[1]);

  // Exec handshake: EOF means the exec took.
  int exec_errno = 0;
  {
    ssize_t n;
    do {
      n = ::read(status_pipe[0], &exec_errno, sizeof(exec_errno));
    } while (n < 0 && errno == EINTR);
    if (n <= 0) exec_errno = 0;
  }
  ::close(status_pipe[0]);
  if (exec_errno != 0) {
    int status;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    result.status = RunStatus::kSpawnFailed;
    result.spawn_errno = exec_errno;
    result.wall_seconds = Elapsed(start);
    if (spec.capture_stdout) ::close(out_pipe[0]);
    return result;
  }

  // Wait loop: watch the stdout pipe and a pidfd together so both output and
  // exit wake the poll immediately; the poll tick (20ms) only bounds how
  // fast deadline expiry and cancellation are noticed.
  int pidfd = OpenPidFd(pid);
  bool out_open = spec.capture_stdout;
  bool timed_out = false;
  bool cancelled = false;
  bool exited = false;
  while (true) {
    if (cancel != nullptr && cancel->load(std::memory_order_relaxed)) {
      cancelled = true;
      break;
    }
    double left = spec.timeout_seconds - Elapsed(start);
    if (left <= 0.0) {
      timed_out = true;
      break;
    }
    int tick_ms =
        1 + static_cast<int>(std::min(left * 1000.0, 19.0));
    struct pollfd pfds[2];
    int nfds = 0;
    int out_slot = -1;
    int pid_slot = -1;
    if (out_open) {
      out_slot = nfds;
      pfds[nfds++] = {out_pipe[0], POLLIN, 0};
    }
    if (pidfd >= 0) {
      pid_slot = nfds;
      pfds[nfds++] = {pidfd, POLLIN, 0};
    }
    int pr;
    if (nfds > 0) {
      pr = ::poll(pfds, static_cast<nfds_t>(nfds), tick_ms);
    } else {
      // No pidfd support and stdout not captured: fall back to polling the
      // wait status.
      int status;
      pid_t w = ::waitpid(pid, &status, WNOHANG);
      if (w == pid) {
        result.wall_seconds = Elapsed(start);
        if (WIFEXITED(status)) {
          result.status = RunStatus::kExited;
          result.exit_code = WEXITSTATUS(status);
        } else {
          result.status = RunStatus::kSignaled;
          result.term_signal = WTERMSIG(status);
        }
        ::killpg(pid, SIGKILL);
        return result;
      }
      struct timespec ts = {0, 1000000L};  // 1ms
      ::nanosleep(&ts, nullptr);
      continue;
    }
    if (pr <= 0) continue;  // tick: re-check deadline and cancel flag
    if (out_slot >= 0 && (pfds[out_slot].revents & (POLLIN | POLLHUP))) {
      char buf[4096];
      ssize_t n = ::read(out_pipe[0], buf, sizeof(buf));
      if (n > 0) {
        result.stdout_bytes.append(buf, static_cast<size_t>(n));
      } else {
        ::close(out_pipe[0]);
        out_open = false;
      }
    }
    if (pid_slot >= 0 && (pfds[pid_slot].revents != 0)) {
      exited = true;
      break;
    }
  }

  if (pidfd >= 0) ::close(pidfd);

  if (exited) {
    // Scoop up output written before exit but not yet read (the pipe may
    // stay open in a grandchild, so wait for EOF is not an option).
    if (out_open) {
      DrainNonblocking(out_pipe[0], &result.stdout_bytes);
      ::close(out_pipe[0]);
    }
    int status;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    result.wall_seconds = Elapsed(start);
    if (WIFEXITED(status)) {
      result.status = RunStatus::kExited;
      result.exit_code = WEXITSTATUS(status);
    } else {
      result.status = RunStatus::kSignaled;
      result.term_signal = WTERMSIG(status);
    }
    // Leftover group members must not outlive the trial.
    ::killpg(pid, SIGKILL);
    return result;
  }

  if (out_open) ::close(out_pipe[0]);
  KillGroupAndReap(pid);
  result.wall_seconds = Elapsed(start);
  if (cancelled) {
    result.status = RunStatus::kCancelled;
  } else {
    (void)timed_out;
    result.status = RunStatus::kTimeout;
    // Contract: a timeout's recorded wall time is never below the deadline.
    if (result.wall_seconds < spec.timeout_seconds)
      result.wall_seconds = spec.timeout_seconds;
  }
  return result;
}

}  // namespace detail
}  // namespace centfuzz
