#include <poll.h>
#include <signal.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <future>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "corpusforge/backend.hpp"
#include "corpusforge/error.hpp"
#include "process.hpp"

namespace corpusforge::backend {
namespace {

using Outcome = std::variant<BackendResponse, BackendFailure>;
using Clock = std::chrono::steady_clock;

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

/// Buffered line reader over a file descriptor.
class LineReader {
 public:
  enum class Status { Line, Eof, Timeout };

  explicit LineReader(int fd) : fd_(fd) {}

  /// Without a deadline, blocks until a full line or EOF.
  Status next(std::string& line, std::optional<Clock::time_point> deadline = std::nullopt) {
    for (;;) {
      if (auto nl = buf_.find('\n'); nl != std::string::npos) {
        line.assign(buf_, 0, nl);
        buf_.erase(0, nl + 1);
        return Status::Line;
      }
      if (eof_) return Status::Eof;
      if (deadline) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(*deadline - Clock::now()).count();
        if (left <= 0) return Status::Timeout;
        pollfd p{fd_, POLLIN, 0};
        const int rc = ::poll(&p, 1, static_cast<int>(left));
        if (rc < 0 && errno == EINTR) continue;
        if (rc == 0) return Status::Timeout;
      }
      char chunk[65536];
      const auto n = ::read(fd_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        eof_ = true;
        continue;
      }
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int fd_;
  std::string buf_;
  bool eof_ = false;
};

struct Pending {
  Op op;
  std::promise<Outcome> promise;
};

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const auto n = ::write(fd, data.data(), data.size());
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

}  // namespace

struct SubprocessBackend::Impl {
  std::string command;
  SubprocessOptions options;

  std::mutex lifecycle;  // writes, start, stop
  proc::Child child;
  std::unique_ptr<LineReader> reader;
  std::thread reader_thread;
  Handshake hello;
  bool started = false;
  std::atomic<bool> running{false};
  std::atomic<std::size_t> restart_count{0};
  std::atomic<std::uint64_t> next_id{1};

  std::mutex pending_mu;
  std::map<std::uint64_t, std::shared_ptr<Pending>> pending;
  std::set<std::uint64_t> abandoned;

  void fail_all(ErrorCode code, const std::string& why) {
    std::map<std::uint64_t, std::shared_ptr<Pending>> doomed;
    {
      std::lock_guard lk(pending_mu);
      doomed.swap(pending);
    }
    for (auto& [id, p] : doomed) p->promise.set_exception(std::make_exception_ptr(Error(code, why)));
  }

  void read_loop() {
    std::string line;
    for (;;) {
      if (reader->next(line) == LineReader::Status::Eof) {
        running = false;
        fail_all(ErrorCode::BackendCrashed, "backend process exited");
        return;
      }
      if (line.empty()) continue;
      std::string problem;
      try {
        auto outcome = decode_response(line);
        const auto id = std::visit([](const auto& o) { return o.id; }, outcome);
        std::shared_ptr<Pending> p;
        {
          std::lock_guard lk(pending_mu);
          if (auto it = pending.find(id); it != pending.end()) {
            p = it->second;
            pending.erase(it);
          } else if (abandoned.erase(id) == 0) {
            problem = "response for unknown id " + std::to_string(id);
          }
        }
        if (p) {
          if (auto* r = std::get_if<BackendResponse>(&outcome); r && r->op != p->op)
            p->promise.set_exception(std::make_exception_ptr(
                Error(ErrorCode::ProtocolViolation, "response op does not match request op")));
          else
            p->promise.set_value(std::move(outcome));
        }
      } catch (const Error& e) {
        problem = e.what();
      }
      if (!problem.empty()) {
        // The stream can no longer be trusted; take the process down.
        running = false;
        fail_all(ErrorCode::ProtocolViolation, problem);
        child.kill_now();
        fail_drain();
        return;
      }
    }
  }

  // Keeps reading until EOF so a killed child is fully detached, failing
  // anything that slipped in meanwhile.
  void fail_drain() {
    std::string line;
    while (reader->next(line) != LineReader::Status::Eof) {
    }
    fail_all(ErrorCode::BackendCrashed, "backend process was terminated");
  }

  void start() {
    ignore_sigpipe();
    child = proc::Child(proc::shell_argv(command), true);
    reader = std::make_unique<LineReader>(child.out_fd());
    std::string line;
    const auto status = reader->next(line, Clock::now() + options.startup_timeout);
    if (status != LineReader::Status::Line) {
      child.kill_now();
      child.wait();
      if (status == LineReader::Status::Timeout) raise(ErrorCode::BackendTimeout, "no handshake from '" + command + "'");
      raise(ErrorCode::BackendCrashed, "backend '" + command + "' exited before its handshake");
    }
    try {
      hello = decode_handshake(line);
    } catch (...) {
      child.kill_now();
      child.wait();
      throw;
    }
    started = true;
    running = true;
    reader_thread = std::thread([this] { read_loop(); });
  }

  void stop() {
    if (!started) return;
    running = false;
    child.close_stdin();
    child.kill_now();
    if (reader_thread.joinable()) reader_thread.join();
    child.wait();
    child = proc::Child();
    fail_all(ErrorCode::BackendCrashed, "backend stopped");
    {
      std::lock_guard lk(pending_mu);
      abandoned.clear();
    }
    started = false;
  }

  void ensure_running() {
    if (running) return;
    if (started) {
      if (!options.restart_on_crash) raise(ErrorCode::BackendCrashed, "backend '" + command + "' is not running");
      stop();
      ++restart_count;
    }
    start();
  }
};

SubprocessBackend::SubprocessBackend(std::string command, SubprocessOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->command = std::move(command);
  impl_->options = options;
  std::lock_guard lk(impl_->lifecycle);
  impl_->start();
}

SubprocessBackend::~SubprocessBackend() {
  std::lock_guard lk(impl_->lifecycle);
  impl_->stop();
}

const Handshake& SubprocessBackend::handshake() const { return impl_->hello; }

bool SubprocessBackend::alive() const { return impl_->running; }

std::size_t SubprocessBackend::restarts() const { return impl_->restart_count; }

void SubprocessBackend::restart() {
  std::lock_guard lk(impl_->lifecycle);
  impl_->stop();
  ++impl_->restart_count;
  impl_->start();
}

BackendResponse SubprocessBackend::call(BackendRequest request) {
  request.validate();
  auto& im = *impl_;
  std::future<Outcome> future;
  std::uint64_t id = 0;
  {
    std::lock_guard lk(im.lifecycle);
    im.ensure_running();
    require(im.hello.supports(request.op), "backend does not advertise op " + std::string(to_string(request.op)));
    id = im.next_id++;
    request.id = id;
    auto p = std::make_shared<Pending>();
    p->op = request.op;
    future = p->promise.get_future();
    {
      std::lock_guard pk(im.pending_mu);
      im.pending.emplace(id, std::move(p));
    }
    if (!write_all(im.child.in_fd(), encode_request(request) + "\n")) {
      std::lock_guard pk(im.pending_mu);
      im.pending.erase(id);
      raise(ErrorCode::BackendCrashed, std::string("write to backend failed: ") + std::strerror(errno));
    }
  }
  if (future.wait_for(im.options.call_timeout) != std::future_status::ready) {
    std::lock_guard pk(im.pending_mu);
    if (im.pending.erase(id) == 1) {
      im.abandoned.insert(id);
      raise(ErrorCode::BackendTimeout, "request " + std::to_string(id) + " timed out");
    }
    // Completed between the timeout and taking the lock.
  }
  auto outcome = future.get();
  if (auto* f = std::get_if<BackendFailure>(&outcome)) raise(ErrorCode::BackendRejected, f->code + ": " + f->message);
  return std::get<BackendResponse>(std::move(outcome));
}

}  // namespace corpusforge::backend
