// Child process with piped standard input and output, used for solver and
// synthesizer subprocesses. Standard error is inherited.

#ifndef INVSYNTH_PROCESS_HPP
#define INVSYNTH_PROCESS_HPP

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <sys/types.h>

namespace invsynth {

class Process {
 public:
  using Clock = std::chrono::steady_clock;

  enum class Status { Ok, Timeout, Closed };

  // Runs `command` through /bin/sh -c. Throws Error(IoError) if spawning fails.
  explicit Process(const std::string& command);
  ~Process();
  Process(const Process&) = delete;
  Process& operator=(const Process&) = delete;

  // False if the child has closed its input.
  bool write(std::string_view data);

  // Appends whatever output is available to buffer(), waiting until the
  // deadline for at least one byte.
  Status read_some(Clock::time_point deadline);

  // Next '\n'-terminated line (without the newline).
  Status read_line(std::string& line, Clock::time_point deadline);

  std::string& buffer() { return buffer_; }

  void close_input();
  // Sends SIGKILL and reaps the child.
  void kill();
  // Waits for exit and returns the exit status (128 + signal if killed).
  int wait();
  bool running();

 private:
  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::optional<int> status_;
  std::string buffer_;
};

}  // namespace invsynth

#endif  // INVSYNTH_PROCESS_HPP
