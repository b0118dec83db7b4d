// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/error.hpp>
#include <layoutloop/subprocess.hpp>

#include <cerrno>
#include <csignal>
#include <utility>
#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace layoutloop
{

namespace
{

class Fd
{
  public:
    Fd() = default;
    explicit Fd(int fd): _fd(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    Fd(Fd&& other) noexcept: _fd(std::exchange(other._fd, -1)) {}
    Fd& operator=(Fd&& other) noexcept
    {
        reset();
        _fd = std::exchange(other._fd, -1);
        return *this;
    }
    ~Fd() { reset(); }

    [[nodiscard]] int get() const { return _fd; }
    void reset()
    {
        if (_fd >= 0)
            ::close(_fd);
        _fd = -1;
    }

  private:
    int _fd = -1;
};

struct Pipe
{
    Fd read;
    Fd write;

    Pipe()
    {
        int fds[2];
        if (::pipe2(fds, O_CLOEXEC) != 0)
            throw ExternalToolError("pipe() failed");
        read = Fd(fds[0]);
        write = Fd(fds[1]);
    }
};

} // namespace

std::string shell_quote(const std::string& text)
{
    std::string out = "'";
    for (char c: text)
    {
        if (c == '\'')
            out += "'\\''";
        else
            out.push_back(c);
    }
    return out + "'";
}

ProcessOutput run_shell(const std::string& command, const std::string& input, std::chrono::milliseconds timeout)
{
    static const bool sigpipe_ignored = [] {
        std::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)sigpipe_ignored;

    Pipe in;
    Pipe out;
    Pipe err;

    const pid_t pid = ::fork();
    if (pid < 0)
        throw ExternalToolError("fork() failed");
    if (pid == 0)
    {
        ::dup2(in.read.get(), STDIN_FILENO);
        ::dup2(out.write.get(), STDOUT_FILENO);
        ::dup2(err.write.get(), STDERR_FILENO);
        ::setpgid(0, 0);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::setpgid(pid, pid);

    in.read.reset();
    out.write.reset();
    err.write.reset();
    ::fcntl(in.write.get(), F_SETFL, O_NONBLOCK);

    ProcessOutput result;
    size_t written = 0;
    if (input.empty())
        in.write.reset();

    const auto deadline = std::chrono::steady_clock::now() + timeout;
    bool outOpen = true;
    bool errOpen = true;
    while (outOpen || errOpen)
    {
        const auto remaining =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0)
        {
            ::kill(-pid, SIGKILL);
            ::waitpid(pid, nullptr, 0);
            throw TimeoutError("external command timed out after " + std::to_string(timeout.count()) + " ms");
        }

        pollfd fds[3];
        nfds_t n = 0;
        if (outOpen)
            fds[n++] = { out.read.get(), POLLIN, 0 };
        if (errOpen)
            fds[n++] = { err.read.get(), POLLIN, 0 };
        if (in.write.get() >= 0)
            fds[n++] = { in.write.get(), POLLOUT, 0 };
        const int ready = ::poll(fds, n, static_cast<int>(std::min<long long>(remaining.count(), 100)));
        if (ready < 0 && errno != EINTR)
            break;

        for (nfds_t i = 0; i < n; ++i)
        {
            if (fds[i].revents == 0)
                continue;
            if (fds[i].fd == in.write.get())
            {
                const auto w = ::write(in.write.get(), input.data() + written, input.size() - written);
                if (w > 0)
                    written += static_cast<size_t>(w);
                if (w < 0 && errno != EAGAIN)
                    in.write.reset();
                if (written >= input.size())
                    in.write.reset();
                continue;
            }
            char buf[4096];
            const auto r = ::read(fds[i].fd, buf, sizeof buf);
            const bool isOut = fds[i].fd == out.read.get();
            if (r > 0)
                (isOut ? result.out : result.err).append(buf, static_cast<size_t>(r));
            else if (r == 0 || (r < 0 && errno != EAGAIN && errno != EINTR))
                (isOut ? outOpen : errOpen) = false;
        }
    }

    int status = 0;
    while (true)
    {
        const pid_t done = ::waitpid(pid, &status, WNOHANG);
        if (done == pid || (done < 0 && errno != EINTR))
            break;
        if (std::chrono::steady_clock::now() >= deadline)
        {
            ::kill(-pid, SIGKILL);
            ::waitpid(pid, nullptr, 0);
            throw TimeoutError("external command timed out after " + std::to_string(timeout.count()) + " ms");
        }
        ::usleep(1000);
    }
    if (WIFEXITED(status))
        result.exit_code = WEXITSTATUS(status);
    else
        result.exit_code = 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
    return result;
}

} // namespace layoutloop
