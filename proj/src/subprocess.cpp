#include "issy/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>

namespace issy {

Subprocess::Subprocess(const std::vector<std::string>& argv) {
  if (argv.empty()) throw std::invalid_argument("empty command");
  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (pipe(in_pipe) || pipe(out_pipe) || pipe(err_pipe))
    throw std::runtime_error("pipe failed");

  pid_ = fork();
  if (pid_ < 0) throw std::runtime_error("fork failed");
  if (pid_ == 0) {
    dup2(in_pipe[0], 0);
    dup2(out_pipe[1], 1);
    dup2(err_pipe[1], 2);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);
    close(err_pipe[1]);
    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);
    execvp(cargv[0], cargv.data());
    // exec failed; match the shell's command-not-found code
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  close(err_pipe[1]);
  in_fd_ = in_pipe[1];
  out_fd_ = out_pipe[0];
  err_fd_ = err_pipe[0];
  fcntl(err_fd_, F_SETFL, O_NONBLOCK);
  signal(SIGPIPE, SIG_IGN);
}

Subprocess::~Subprocess() { kill_now(); }

bool Subprocess::write_all(const std::string& data) {
  if (in_fd_ < 0) return false;
  size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::write(in_fd_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<size_t>(n);
  }
  return true;
}

void Subprocess::close_stdin() {
  if (in_fd_ >= 0) {
    close(in_fd_);
    in_fd_ = -1;
  }
}

void Subprocess::drain_stderr_nonblock() {
  if (err_fd_ < 0) return;
  char buf[4096];
  for (;;) {
    ssize_t n = ::read(err_fd_, buf, sizeof buf);
    if (n <= 0) break;
    err_buf_.append(buf, static_cast<size_t>(n));
  }
}

bool Subprocess::read_some(std::string* out, int deadline_ms) {
  if (out_fd_ < 0 || eof_) return false;
  pollfd fds[2];
  fds[0] = {out_fd_, POLLIN, 0};
  fds[1] = {err_fd_, POLLIN, 0};
  int r = poll(fds, err_fd_ >= 0 ? 2 : 1, deadline_ms);
  if (r <= 0) return false;
  if (err_fd_ >= 0 && (fds[1].revents & POLLIN)) drain_stderr_nonblock();
  if (fds[0].revents & (POLLIN | POLLHUP)) {
    char buf[8192];
    ssize_t n = ::read(out_fd_, buf, sizeof buf);
    if (n > 0)
      out->append(buf, static_cast<size_t>(n));
    else if (n == 0)
      eof_ = true;
    return true;
  }
  return true;
}

std::optional<int> Subprocess::wait(int deadline_ms) {
  // Drain stdout to EOF (bounded by the deadline).
  std::string sink;
  auto until = std::chrono::steady_clock::now() +
               std::chrono::milliseconds(deadline_ms);
  while (out_fd_ >= 0 && !eof_) {
    read_some(&sink, 50);
    if (std::chrono::steady_clock::now() >= until) break;
  }
  drain_stderr_nonblock();
  if (pid_ <= 0) return std::nullopt;
  int status = 0;
  for (int waited = 0; waited < deadline_ms; waited += 10) {
    pid_t r = waitpid(pid_, &status, WNOHANG);
    if (r == pid_) {
      pid_ = -1;
      if (WIFEXITED(status)) return WEXITSTATUS(status);
      return std::nullopt;
    }
    usleep(10000);
  }
  return std::nullopt;
}

void Subprocess::kill_now() {
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    int status;
    waitpid(pid_, &status, 0);
    pid_ = -1;
  }
  if (in_fd_ >= 0) close(in_fd_);
  if (out_fd_ >= 0) close(out_fd_);
  if (err_fd_ >= 0) close(err_fd_);
  in_fd_ = out_fd_ = err_fd_ = -1;
}

std::string Subprocess::read_stderr() {
  drain_stderr_nonblock();
  return err_buf_;
}

std::vector<std::string> split_command(const std::string& cmd) {
  std::vector<std::string> out;
  std::string cur;
  char quote = 0;
  bool has = false;
  for (char c : cmd) {
    if (quote) {
      if (c == quote)
        quote = 0;
      else
        cur += c;
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      has = true;
      continue;
    }
    if (c == ' ' || c == '\t') {
      if (has || !cur.empty()) out.push_back(cur);
      cur.clear();
      has = false;
      continue;
    }
    cur += c;
  }
  if (has || !cur.empty()) out.push_back(cur);
  return out;
}

std::string self_exe_dir() {
  char buf[4096];
  ssize_t n = readlink("/proc/self/exe", buf, sizeof buf - 1);
  if (n <= 0) return "";
  buf[n] = 0;
  std::string path(buf);
  auto slash = path.rfind('/');
  return slash == std::string::npos ? "" : path.substr(0, slash);
}

}  // namespace issy
