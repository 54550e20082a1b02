#include "tlaproof/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <sstream>

#include "tlaproof/errors.hpp"

namespace fs = std::filesystem;

namespace tlaproof {

std::string find_executable(const std::string& name) {
  if (name.find('/') != std::string::npos) {
    return ::access(name.c_str(), X_OK) == 0 ? name : "";
  }
  const char* path_env = std::getenv("PATH");
  if (!path_env) return "";
  std::stringstream ss(path_env);
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    if (dir.empty()) continue;
    fs::path candidate = fs::path(dir) / name;
    if (::access(candidate.c_str(), X_OK) == 0) return candidate.string();
  }
  return "";
}

ProcessResult run_process(const std::vector<std::string>& argv, const std::string& working_dir,
                          int timeout_seconds) {
  if (argv.empty()) throw Error("run_process needs a command");

  int pipefd[2];
  if (pipe(pipefd) != 0) throw Error("pipe failed");

  auto start = std::chrono::steady_clock::now();
  pid_t pid = fork();
  if (pid < 0) {
    close(pipefd[0]);
    close(pipefd[1]);
    throw Error("fork failed");
  }

  if (pid == 0) {
    // child: own process group so the timeout can kill helpers too
    setpgid(0, 0);
    if (!working_dir.empty() && chdir(working_dir.c_str()) != 0) _exit(127);
    dup2(pipefd[1], STDOUT_FILENO);
    dup2(pipefd[1], STDERR_FILENO);
    close(pipefd[0]);
    close(pipefd[1]);
    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }

  close(pipefd[1]);
  fcntl(pipefd[0], F_SETFL, O_NONBLOCK);

  ProcessResult result;
  auto deadline = start + std::chrono::seconds(timeout_seconds);
  bool child_done = false, eof = false, killed = false;
  int status = 0;
  char buf[4096];

  auto drain = [&]() {
    ssize_t n;
    while ((n = read(pipefd[0], buf, sizeof(buf))) > 0) {
      result.output.append(buf, static_cast<std::size_t>(n));
    }
    if (n == 0) eof = true;
  };

  while (!(eof && child_done)) {
    if (!killed && std::chrono::steady_clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      killed = true;
      result.timed_out = true;
    }
    struct pollfd pfd{pipefd[0], POLLIN, 0};
    if (!eof) poll(&pfd, 1, 100);
    else usleep(20000);
    drain();
    if (!child_done && waitpid(pid, &status, WNOHANG) == pid) child_done = true;
    if (killed) {
      if (!child_done) {
        waitpid(pid, &status, 0);
        child_done = true;
      }
      drain();
      eof = true;  // stop waiting for lingering pipe holders
    }
  }
  close(pipefd[0]);

  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  else if (WIFSIGNALED(status)) result.exit_code = 128 + WTERMSIG(status);
  result.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  return result;
}

}  // namespace tlaproof
