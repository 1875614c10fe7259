#pragma once

// Runs the merton executable through the shell and captures its output.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#ifndef MERTON_CLI_PATH
#error "MERTON_CLI_PATH must name the merton executable"
#endif

namespace cli {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

inline std::filesystem::path scratch_dir() {
    static const auto dir = [] {
        auto d = std::filesystem::temp_directory_path() / ("merton_cli_" + std::to_string(::getpid()));
        std::filesystem::create_directories(d);
        return d;
    }();
    return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// `env` is prepended verbatim, e.g. "MERTON_THREADS=2".
inline Result run(const std::string& args, const std::string& env = "") {
    const auto out = scratch_dir() / "stdout.txt";
    const auto err = scratch_dir() / "stderr.txt";
    const std::string cmd = (env.empty() ? "" : "env " + env + " ") + "\"" MERTON_CLI_PATH "\" " + args +
                            " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

inline std::string path(const std::string& name) { return (scratch_dir() / name).string(); }

}  // namespace cli
