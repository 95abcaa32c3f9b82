#include "process.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <utility>

#include "corpusforge/error.hpp"

extern char** environ;

namespace corpusforge::proc {

Child::Child(const std::vector<std::string>& argv, bool pipes) {
  require(!argv.empty(), "empty argv");
  int to_child[2] = {-1, -1};
  int from_child[2] = {-1, -1};
  if (pipes && (::pipe2(to_child, O_CLOEXEC) != 0 || ::pipe2(from_child, O_CLOEXEC) != 0))
    raise(ErrorCode::Io, std::string("pipe: ") + std::strerror(errno));

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  if (pipes) {
    posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);
  }
  std::vector<char*> args;
  args.reserve(argv.size() + 1);
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  // Piped children get their own process group so kill_now also reaches
  // grandchildren started by a shell wrapper.
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  if (pipes) {
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);
  }
  const int rc = ::posix_spawnp(&pid_, args[0], &actions, &attr, args.data(), environ);
  posix_spawnattr_destroy(&attr);
  posix_spawn_file_actions_destroy(&actions);
  if (pipes) {
    ::close(to_child[0]);
    ::close(from_child[1]);
  }
  if (rc != 0) {
    if (pipes) {
      ::close(to_child[1]);
      ::close(from_child[0]);
    }
    pid_ = -1;
    raise(ErrorCode::Io, "spawn " + argv[0] + ": " + std::strerror(rc));
  }
  reaped_ = false;
  group_ = pipes;
  if (pipes) {
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];
  }
}

Child::~Child() { release(); }

Child::Child(Child&& other) noexcept { *this = std::move(other); }

Child& Child::operator=(Child&& other) noexcept {
  if (this != &other) {
    release();
    pid_ = std::exchange(other.pid_, -1);
    in_fd_ = std::exchange(other.in_fd_, -1);
    out_fd_ = std::exchange(other.out_fd_, -1);
    reaped_ = std::exchange(other.reaped_, true);
    status_ = other.status_;
    group_ = other.group_;
  }
  return *this;
}

void Child::close_stdin() {
  if (in_fd_ >= 0) ::close(std::exchange(in_fd_, -1));
}

void Child::kill_now() {
  if (reaped_ || pid_ <= 0) return;
  if (group_) ::kill(-pid_, SIGKILL);
  ::kill(pid_, SIGKILL);
}

int Child::wait() {
  if (reaped_) return status_;
  int st = 0;
  while (::waitpid(pid_, &st, 0) < 0 && errno == EINTR) {
  }
  reaped_ = true;
  status_ = WIFEXITED(st) ? WEXITSTATUS(st) : 128 + (WIFSIGNALED(st) ? WTERMSIG(st) : 0);
  return status_;
}

void Child::release() {
  close_stdin();
  if (out_fd_ >= 0) ::close(std::exchange(out_fd_, -1));
  if (!reaped_) {
    kill_now();
    wait();
  }
}

int run(const std::vector<std::string>& argv) {
  Child child(argv, false);
  return child.wait();
}

std::vector<std::string> shell_argv(const std::string& command) { return {"/bin/sh", "-c", command}; }

}  // namespace corpusforge::proc
