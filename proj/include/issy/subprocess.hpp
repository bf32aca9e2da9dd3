#pragma once

#include <optional>
#include <string>
#include <vector>

namespace issy {

// Bidirectional pipe to a child process. Single-owner; the destructor kills
// and reaps the child.
class Subprocess {
 public:
  explicit Subprocess(const std::vector<std::string>& argv);
  ~Subprocess();

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  bool alive() const { return pid_ > 0; }

  // Writes all of data to the child's stdin; false on broken pipe.
  bool write_all(const std::string& data);
  void close_stdin();

  // Polls up to `deadline_ms` and appends available stdout bytes to out.
  // Returns false when the poll slice timed out with nothing to read.
  bool read_some(std::string* out, int deadline_ms);

  bool stdout_eof() const { return eof_; }

  // Drains stdout until EOF (up to deadline); then reaps. Returns exit code
  // or nullopt on timeout/signal.
  std::optional<int> wait(int deadline_ms);

  void kill_now();

  std::string read_stderr();  // whatever has accumulated, non-blocking

 private:
  int pid_ = -1;
  int in_fd_ = -1;    // writes to child's stdin
  int out_fd_ = -1;   // reads from child's stdout
  int err_fd_ = -1;   // reads from child's stderr
  bool eof_ = false;
  std::string err_buf_;
  void drain_stderr_nonblock();
};

// Splits a command string on whitespace, honoring single/double quotes.
std::vector<std::string> split_command(const std::string& cmd);

// Directory containing the currently running executable (for locating the
// bundled fallback tools); empty on failure.
std::string self_exe_dir();

}  // namespace issy
