#pragma once

#include <sys/types.h>

#include <string>
#include <vector>

namespace corpusforge::proc {

/// A child process. With `pipes`, the child's stdin/stdout are connected to
/// `in_fd()` (write end) and `out_fd()` (read end). The destructor kills and
/// reaps a still-running child.
class Child {
 public:
  Child() = default;
  Child(const std::vector<std::string>& argv, bool pipes);
  ~Child();
  Child(Child&& other) noexcept;
  Child& operator=(Child&& other) noexcept;
  Child(const Child&) = delete;
  Child& operator=(const Child&) = delete;

  pid_t pid() const { return pid_; }
  int in_fd() const { return in_fd_; }
  int out_fd() const { return out_fd_; }

  void close_stdin();
  void kill_now();
  /// Blocks until exit; returns the exit status (128+signal when signalled).
  int wait();

 private:
  void release();

  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  bool reaped_ = true;
  int status_ = 0;
  bool group_ = false;
};

/// Runs argv to completion with inherited stdio; returns the exit status.
int run(const std::vector<std::string>& argv);

/// ["/bin/sh", "-c", command]
std::vector<std::string> shell_argv(const std::string& command);

}  // namespace corpusforge::proc
