#include "mlpref/sandbox/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <regex>
#include <system_error>

#include "mlpref/core/error.hpp"
#include "mlpref/core/glob.hpp"
#include "mlpref/core/jsonl.hpp"
#include "mlpref/core/text.hpp"

namespace mlpref::sandbox {

namespace fs = std::filesystem;

void to_json(json& j, const ExecutionResult& v) {
    j = json{{"exit_code", v.exit_code},
             {"stdout", v.stdout_text},
             {"stderr", v.stderr_text},
             {"wall_time_s", v.wall_time_s},
             {"timed_out", v.timed_out},
             {"stdout_truncated", v.stdout_truncated},
             {"stderr_truncated", v.stderr_truncated}};
    if (v.extracted_val_score) j["extracted_val_score"] = *v.extracted_val_score;
}

void from_json(const json& j, ExecutionResult& v) {
    v.exit_code = j.at("exit_code").get<int>();
    v.stdout_text = j.at("stdout").get<std::string>();
    v.stderr_text = j.at("stderr").get<std::string>();
    v.wall_time_s = j.at("wall_time_s").get<double>();
    v.timed_out = j.at("timed_out").get<bool>();
    v.stdout_truncated = j.value("stdout_truncated", false);
    v.stderr_truncated = j.value("stderr_truncated", false);
    if (j.contains("extracted_val_score"))
        v.extracted_val_score = j.at("extracted_val_score").get<Score>();
    else
        v.extracted_val_score.reset();
}

namespace {

struct StreamBuffer {
    std::string data;
    std::size_t budget;
    bool truncated = false;

    void append(const char* buf, std::size_t n) {
        if (truncated) return;
        std::size_t limit = budget > kTruncationMarker.size() ? budget - kTruncationMarker.size() : 0;
        if (data.size() + n > limit) {
            data.append(buf, limit - data.size());
            data.append(kTruncationMarker.substr(0, budget - data.size()));
            truncated = true;
            return;
        }
        data.append(buf, n);
    }
};

// Copies src into dst, skipping anything matching a denied glob
// (relative to src). Denial-by-omission also holds for root, where
// permission bits would not.
void copy_tree_excluding(const fs::path& src, const fs::path& dst,
                         const std::vector<std::string>& denied) {
    fs::create_directories(dst);
    for (auto it = fs::recursive_directory_iterator(src); it != fs::recursive_directory_iterator();
         ++it) {
        fs::path rel = fs::relative(it->path(), src);
        if (matches_any(denied, rel.generic_string())) {
            if (it->is_directory()) it.disable_recursion_pending();
            continue;
        }
        if (it->is_directory()) {
            fs::create_directories(dst / rel);
        } else if (it->is_regular_file()) {
            fs::copy_file(it->path(), dst / rel, fs::copy_options::overwrite_existing);
        }
    }
}

fs::path make_temp_dir() {
    std::string tmpl = (fs::temp_directory_path() / "mlpref-sbx-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) throw SandboxError(std::string("mkdtemp: ") + std::strerror(errno));
    return fs::path(buf.data());
}

ExecutionResult run_in_dir(const std::string& shell_cmd, const fs::path& cwd, double timeout_s,
                           const SandboxConfig& cfg) {
    int out_pipe[2], err_pipe[2];
    if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0)
        throw SandboxError(std::string("pipe: ") + std::strerror(errno));

    auto t0 = std::chrono::steady_clock::now();
    pid_t pid = fork();
    if (pid < 0) throw SandboxError(std::string("fork: ") + std::strerror(errno));

    if (pid == 0) {
        // child: own process group so the whole tree can be killed
        setpgid(0, 0);
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        close(out_pipe[0]);
        close(out_pipe[1]);
        close(err_pipe[0]);
        close(err_pipe[1]);
        if (chdir(cwd.c_str()) != 0) _exit(126);
        execl("/bin/sh", "sh", "-c", shell_cmd.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }

    close(out_pipe[1]);
    close(err_pipe[1]);

    ExecutionResult result;
    StreamBuffer out{{}, cfg.stdout_budget};
    StreamBuffer err{{}, cfg.stderr_budget};

    auto deadline = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                             std::chrono::duration<double>(timeout_s));
    bool killed = false;
    int open_fds = 2;
    struct pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};

    char buf[8192];
    while (open_fds > 0) {
        auto now = std::chrono::steady_clock::now();
        if (!killed && now >= deadline) {
            kill(-pid, SIGKILL);
            kill(pid, SIGKILL);
            killed = true;
        }
        int wait_ms = killed ? 100
                             : static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                                    deadline - now)
                                                    .count()) +
                                   1;
        if (wait_ms < 0) wait_ms = 0;
        if (wait_ms > 200) wait_ms = 200;
        int rc = poll(fds, 2, wait_ms);
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        for (int i = 0; i < 2; ++i) {
            if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP))) continue;
            ssize_t n = read(fds[i].fd, buf, sizeof(buf));
            if (n > 0) {
                (i == 0 ? out : err).append(buf, static_cast<std::size_t>(n));
            } else if (n == 0 || (n < 0 && errno != EAGAIN && errno != EINTR)) {
                close(fds[i].fd);
                fds[i].fd = -1;
                --open_fds;
            }
        }
    }

    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {}
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.timed_out = killed;
    if (WIFEXITED(status))
        result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        result.exit_code = 128 + WTERMSIG(status);
    if (killed) result.exit_code = 128 + SIGKILL;

    result.stdout_text = std::move(out.data);
    result.stderr_text = std::move(err.data);
    result.stdout_truncated = out.truncated;
    result.stderr_truncated = err.truncated;
    return result;
}

std::string substitute(const std::string& tmpl, const std::string& key, const std::string& value) {
    std::string out = tmpl;
    std::size_t pos;
    while ((pos = out.find(key)) != std::string::npos) out.replace(pos, key.size(), value);
    return out;
}

}  // namespace

ExecutionResult run(const std::string& cmd_template, const fs::path& workdir, double timeout_s,
                    const std::vector<std::string>& denied, const SandboxConfig& cfg) {
    if (!fs::is_directory(workdir))
        throw SandboxError("working directory does not exist: " + workdir.string());

    fs::path work = make_temp_dir();
    copy_tree_excluding(workdir, work, denied);

    ExecutionResult result = run_in_dir(cmd_template, work, timeout_s, cfg);

    if (!cfg.keep_workdir) {
        std::error_code ec;
        fs::remove_all(work, ec);
    }
    return result;
}

ExecutionResult run_script(const std::string& script_text, const fs::path& data_dir,
                           const std::vector<std::string>& denied, const SandboxConfig& cfg) {
    if (!fs::is_directory(data_dir))
        throw SandboxError("data directory does not exist: " + data_dir.string());

    fs::path work = make_temp_dir();
    copy_tree_excluding(data_dir, work, denied);
    const std::string script_name = "__mlpref_script__.py";
    write_file(work / script_name, script_text);

    std::string cmd = substitute(cfg.cmd_template, "{script}", script_name);
    ExecutionResult result = run_in_dir(cmd, work, cfg.timeout_s, cfg);

    if (!cfg.keep_workdir) {
        std::error_code ec;
        fs::remove_all(work, ec);
    }
    return result;
}

std::optional<Score> extract_val_score(const std::string& stdout_text, const std::string& pattern,
                                       MetricDirection direction) {
    std::regex re;
    try {
        re = std::regex(pattern);
    } catch (const std::regex_error& e) {
        throw ExtractionError(std::string("bad extraction pattern: ") + e.what());
    }
    if (re.mark_count() < 1)
        throw ExtractionError("extraction pattern needs one numeric capture group: " + pattern);

    std::smatch last;
    bool found = false;
    auto begin = std::sregex_iterator(stdout_text.begin(), stdout_text.end(), re);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        last = *it;
        found = true;
    }
    if (!found) return std::nullopt;

    std::string capture = last[1].str();
    char* end = nullptr;
    errno = 0;
    double value = std::strtod(capture.c_str(), &end);
    if (errno != 0 || end == capture.c_str() || *end != '\0')
        throw ExtractionError("non-numeric capture: '" + capture + "'");
    return Score{value, direction};
}

}  // namespace mlpref::sandbox
