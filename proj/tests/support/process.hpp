#pragma once

// Running the ddai binary from tests.

#include <fcntl.h>
#include <spawn.h>
#include <sys/resource.h>
#include <sys/wait.h>

#include <cstdio>
#include <string>
#include <vector>

extern char** environ;

namespace ddai::testing {

struct ProcessResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr
};

/// Runs a shell command line, capturing stdout and stderr together.
inline ProcessResult run_shell(const std::string& command) {
    ProcessResult r;
    FILE* pipe = ::popen((command + " 2>&1").c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, n);
    const int status = ::pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

inline std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

struct SpawnResult {
    int exit_code = -1;
    long max_rss_kib = 0;
};

/// Spawns `argv` with stdout/stderr discarded and reports the child's peak RSS.
inline SpawnResult spawn_measured(const std::vector<std::string>& args) {
    std::vector<char*> argv;
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, 1, "/dev/null", O_WRONLY, 0);
    posix_spawn_file_actions_addopen(&actions, 2, "/dev/null", O_WRONLY, 0);
    SpawnResult r;
    pid_t pid = 0;
    if (posix_spawn(&pid, argv[0], &actions, nullptr, argv.data(), environ) == 0) {
        int status = 0;
        struct rusage usage {};
        if (::wait4(pid, &status, 0, &usage) == pid) {
            r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
            r.max_rss_kib = usage.ru_maxrss;
        }
    }
    posix_spawn_file_actions_destroy(&actions);
    return r;
}

}  // namespace ddai::testing
