#pragma once
// Thin blocking TCP helpers over POSIX sockets, with poll-based timeouts.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace teleo::net {

/// Owning file descriptor.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket&& o) noexcept : fd_(o.release()) {}
    Socket& operator=(Socket&& o) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket() { close(); }

    int fd() const noexcept { return fd_; }
    bool valid() const noexcept { return fd_ >= 0; }
    int release() noexcept {
        int fd = fd_;
        fd_ = -1;
        return fd;
    }
    /// shutdown(2) both directions; wakes a thread blocked in accept or recv.
    void shutdown() noexcept;
    void close() noexcept;

private:
    int fd_ = -1;
};

/// Listening socket bound to host:port (0 = ephemeral). Throws TransportError.
Socket listen_tcp(const std::string& host, std::uint16_t port);
std::uint16_t local_port(const Socket& s);
/// Dotted-quad address of the local end of a connected socket.
std::string local_address(const Socket& s);

/// nullopt once the listener has been shut down.
std::optional<Socket> accept_tcp(const Socket& listener);

/// Throws TransportError when unreachable or on timeout.
Socket connect_tcp(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout);

/// Writes everything or throws TransportError.
void write_all(const Socket& s, std::string_view bytes);

/// Buffered newline-delimited reader.
class LineReader {
public:
    explicit LineReader(const Socket& s) : fd_(s.fd()) {}

    /// Next line without its newline. nullopt on EOF; throws TransportError
    /// on timeout (when given) or read error.
    std::optional<std::string> read_line(std::optional<std::chrono::milliseconds> timeout = {});

private:
    int fd_;
    std::string buffer_;
};

}  // namespace teleo::net
