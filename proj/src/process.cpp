/*
  Copyright (c) 2026 polypot contributors

  Licensed under the Apache License, Version 2.0 (the "License");
  you may not use this file except in compliance with the License.
  You may obtain a copy of the License at

  http://www.apache.org/licenses/LICENSE-2.0

  Unless required by applicable law or agreed to in writing, software
  distributed under the License is distributed on an "AS IS" BASIS,
  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
  See the License for the specific language governing permissions and
  limitations under the License.
*/

#include "process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>

#include "errors.hpp"

namespace polypot {

namespace {

constexpr std::size_t kMaxCapture = 4u << 20;  // per stream

double monotonic_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

[[noreturn]] void child_exec(const std::vector<std::string>& argv,
                             const std::filesystem::path& workdir,
                             int out_fd, int err_fd) {
  ::setpgid(0, 0);
#ifdef CLONE_NEWNET
  // Generated code is untrusted; drop network access when the kernel
  // lets us. Failure is non-fatal.
  if (::unshare(CLONE_NEWNET) != 0) {
    (void)::unshare(CLONE_NEWUSER | CLONE_NEWNET);
  }
#endif
  int devnull = ::open("/dev/null", O_RDONLY);
  if (devnull >= 0) {
    ::dup2(devnull, STDIN_FILENO);
    if (devnull > STDERR_FILENO) ::close(devnull);
  }
  ::dup2(out_fd, STDOUT_FILENO);
  ::dup2(err_fd, STDERR_FILENO);
  if (out_fd > STDERR_FILENO) ::close(out_fd);
  if (err_fd > STDERR_FILENO && err_fd != out_fd) ::close(err_fd);
  if (::chdir(workdir.c_str()) != 0) {
    ::dprintf(STDERR_FILENO, "polypot: chdir(%s) failed: %s\n",
              workdir.c_str(), std::strerror(errno));
    ::_exit(126);
  }
  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const std::string& a : argv) {
    cargv.push_back(const_cast<char*>(a.c_str()));
  }
  cargv.push_back(nullptr);
  ::execvp(cargv[0], cargv.data());
  ::dprintf(STDERR_FILENO, "polypot: exec %s failed: %s\n", cargv[0],
            std::strerror(errno));
  ::_exit(127);
}

void append_capped(std::string& sink, const char* data, std::size_t len) {
  if (sink.size() >= kMaxCapture) return;
  std::size_t room = kMaxCapture - sink.size();
  sink.append(data, std::min(len, room));
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::filesystem::path& workdir,
                          double timeout_s) {
  if (argv.empty()) {
    throw InvalidInput("run_process: empty argv");
  }
  // O_CLOEXEC is load-bearing: workers fork concurrently, and without
  // it a sibling child inherits this run's pipe write ends, holding EOF
  // hostage until the sibling exits.
  int out_pipe[2];
  int err_pipe[2];
  if (::pipe2(out_pipe, O_CLOEXEC) != 0 || ::pipe2(err_pipe, O_CLOEXEC) != 0) {
    throw IoError(std::string("pipe failed: ") + std::strerror(errno));
  }

  double start = monotonic_seconds();
  pid_t pid = ::fork();
  if (pid < 0) {
    int err = errno;
    for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) {
      ::close(fd);
    }
    throw IoError(std::string("fork failed: ") + std::strerror(err));
  }
  if (pid == 0) {
    ::close(out_pipe[0]);
    ::close(err_pipe[0]);
    child_exec(argv, workdir, out_pipe[1], err_pipe[1]);
  }

  ::setpgid(pid, pid);  // parent-side duplicate of the child's setpgid
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);

  ProcessResult result;
  struct StreamState {
    int fd;
    std::string* sink;
    bool open;
  };
  StreamState streams[2] = {
      {out_pipe[0], &result.stdout_text, true},
      {err_pipe[0], &result.stderr_text, true},
  };

  double deadline = start + timeout_s;
  bool killed = false;
  char buf[8192];

  while (streams[0].open || streams[1].open) {
    struct pollfd fds[2];
    nfds_t nfds = 0;
    for (auto& s : streams) {
      if (!s.open) continue;
      fds[nfds].fd = s.fd;
      fds[nfds].events = POLLIN;
      fds[nfds].revents = 0;
      ++nfds;
    }
    double remaining = deadline - monotonic_seconds();
    // Bounded slices: re-check the deadline at least once a minute even
    // for very long timeouts.
    int timeout_ms = 1000;
    if (!killed) {
      timeout_ms = remaining <= 0
                       ? 0
                       : static_cast<int>(std::min(remaining * 1000.0 + 1.0,
                                                   60000.0));
    }
    int rc = ::poll(fds, nfds, timeout_ms < 0 ? 0 : timeout_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (rc > 0) {
      for (nfds_t i = 0; i < nfds; ++i) {
        if ((fds[i].revents & (POLLIN | POLLHUP | POLLERR)) == 0) continue;
        for (auto& s : streams) {
          if (!s.open || s.fd != fds[i].fd) continue;
          ssize_t n = ::read(s.fd, buf, sizeof(buf));
          if (n > 0) {
            append_capped(*s.sink, buf, static_cast<std::size_t>(n));
          } else if (n == 0 || (n < 0 && errno != EINTR && errno != EAGAIN)) {
            ::close(s.fd);
            s.open = false;
          }
        }
      }
    }
    if (!killed && monotonic_seconds() >= deadline) {
      ::kill(-pid, SIGKILL);
      killed = true;
      result.timed_out = true;
    }
    // After a kill the pipes close as the group dies; the 1s poll slices
    // above keep us from spinning if a grandchild inherited them.
    if (killed && rc == 0) {
      ::kill(-pid, SIGKILL);
      for (auto& s : streams) {
        if (s.open) {
          ::close(s.fd);
          s.open = false;
        }
      }
    }
  }

  // Kill surviving group members (grandchildren) before reaping: the
  // unreaped leader pins the pgid, so the signal cannot hit a recycled
  // process group. A normally exited leader is a zombie and unaffected.
  ::kill(-pid, SIGKILL);
  int status = 0;
  pid_t waited;
  do {
    waited = ::waitpid(pid, &status, 0);
  } while (waited < 0 && errno == EINTR);

  result.wall_time_s = monotonic_seconds() - start;
  if (result.timed_out) {
    result.exit_code = -1;
    result.term_signal = SIGKILL;
  } else if (waited == pid && WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (waited == pid && WIFSIGNALED(status)) {
    result.exit_code = -1;
    result.term_signal = WTERMSIG(status);
  }
  return result;
}

}  // namespace polypot
