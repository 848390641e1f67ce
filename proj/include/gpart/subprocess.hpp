#pragma once

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

namespace gpart {

inline void replace_all(std::string& s, const std::string& from, const std::string& to) {
    for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
        s.replace(pos, from.size(), to);
    }
}

// Scratch directory for external-refiner files. A caller-provided directory
// is created but not deleted; an auto directory is removed on destruction.
class TempDir {
public:
    TempDir(const std::string& fixed, const std::string& prefix) {
        if (!fixed.empty()) {
            std::filesystem::create_directories(fixed);
            path_ = fixed;
            owned_ = false;
            return;
        }
        std::string tmpl = (std::filesystem::temp_directory_path() / (prefix + "-XXXXXX")).string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (::mkdtemp(buf.data()) == nullptr) {
            throw std::runtime_error("mkdtemp failed for " + tmpl);
        }
        path_ = buf.data();
        owned_ = true;
    }

    ~TempDir() {
        if (owned_) {
            std::error_code ec;
            std::filesystem::remove_all(path_, ec);
        }
    }

    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::string& path() const { return path_; }

private:
    std::string path_;
    bool owned_ = false;
};

struct CommandResult {
    int exit_code = -1;
    bool timed_out = false;
    std::string stderr_tail;
};

// Runs `/bin/sh -c cmd` with stderr captured to a file; kills the process
// group after timeout_s seconds.
inline CommandResult run_command(const std::string& cmd, double timeout_s,
                                 const std::string& stderr_path) {
    const pid_t pid = ::fork();
    if (pid < 0) throw std::runtime_error("fork failed");
    if (pid == 0) {
        ::setpgid(0, 0);
        if (!stderr_path.empty()) {
            if (FILE* f = std::freopen(stderr_path.c_str(), "w", stderr); f == nullptr) {
                std::_Exit(127);
            }
        }
        ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
        std::_Exit(127);
    }

    CommandResult res;
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    int status = 0;
    while (true) {
        const pid_t r = ::waitpid(pid, &status, WNOHANG);
        if (r == pid) break;
        if (r < 0) throw std::runtime_error("waitpid failed");
        if (std::chrono::steady_clock::now() >= deadline) {
            ::kill(-pid, SIGKILL);
            ::kill(pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            res.timed_out = true;
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    if (WIFEXITED(status)) {
        res.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        res.exit_code = 128 + WTERMSIG(status);
    }

    if (!stderr_path.empty()) {
        std::ifstream err(stderr_path);
        if (err) {
            std::string content((std::istreambuf_iterator<char>(err)),
                                std::istreambuf_iterator<char>());
            constexpr std::size_t kTail = 2000;
            res.stderr_tail =
                content.size() > kTail ? content.substr(content.size() - kTail) : content;
        }
    }
    return res;
}

}  // namespace gpart
