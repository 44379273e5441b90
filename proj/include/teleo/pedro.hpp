#pragma once
// Pedro-style messaging: newline-framed term codec, subscription routing,
// a threaded broker and a blocking client.

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "teleo/term.hpp"

namespace teleo::pedro {

constexpr std::uint16_t kDefaultPort = 4550;
constexpr std::chrono::milliseconds kDefaultTimeout{5000};

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class HandshakeError : public TransportError {
public:
    using TransportError::TransportError;
};

// ---------------------------------------------------------------------------
// Codec

/// `format_term(t)` plus a newline. The printer escapes newlines inside
/// strings, so the result has exactly one.
std::string encode_message(const Term& t);

/// Parses one frame; a single trailing newline (and carriage return) is
/// ignored. Throws SyntaxError.
Term decode_message(std::string_view line);

/// Atom, list or compound.
bool is_notification_term(const Term& t) noexcept;

/// An atom usable as a registered name.
bool is_valid_name(const Term& t) noexcept;

// ---------------------------------------------------------------------------
// Subscriptions

/// Body language: `true`, comparisons between arithmetic expressions whose
/// operands are numbers, variables or `length(V)`, and `&` of those.
bool is_valid_body(const Term& body) noexcept;

/// Truth of `body` under `sigma`. Anything that cannot be evaluated (unbound
/// variable, length of a non-list, division by zero) is false.
bool evaluate_body(const Term& body, const Bindings& sigma) noexcept;

struct Subscription {
    std::uint64_t id = 0;
    std::uint64_t client = 0;
    Term head = Term::atom("_");
    Term body = Term::atom("true");
    std::int64_t rock = 0;
};

/// Recognises `subscribe(Head, Body, Rock)` with a predicate head, a valid
/// body and an integer rock.
std::optional<Subscription> parse_subscription(const Term& t);

struct Delivery {
    std::uint64_t client = 0;
    std::int64_t rock = 0;
    Term payload = Term::atom("_");
};

/// Deliveries for a ground notification, in subscription order.
std::vector<Delivery> broker_route(const Term& notification, const std::vector<Subscription>& subs);

/// `rock : payload\n`
std::string format_delivery(std::int64_t rock, const Term& payload);
/// Inverse of format_delivery. Throws SyntaxError.
std::pair<std::int64_t, Term> parse_delivery(std::string_view line);

// ---------------------------------------------------------------------------
// Broker

struct BrokerOptions {
    std::string host = "127.0.0.1";
    std::uint16_t port = kDefaultPort;  // 0 picks a free port
    std::chrono::milliseconds timeout = kDefaultTimeout;
};

struct BrokerStats {
    std::size_t sessions = 0;
    std::size_t subscriptions = 0;
    std::size_t registered = 0;
};

/// Listens on the main port plus an ack port and a data port. Each client
/// session gets a reader thread; routing takes a shared lock on the
/// subscription table.
class Broker {
public:
    explicit Broker(BrokerOptions options = {});
    ~Broker();
    Broker(const Broker&) = delete;
    Broker& operator=(const Broker&) = delete;

    /// Binds the three ports and starts accepting. Throws TransportError.
    void start();
    /// Closes every socket and joins all threads. Idempotent.
    void stop();

    std::uint16_t port() const noexcept;
    std::uint16_t ack_port() const noexcept;
    std::uint16_t data_port() const noexcept;
    BrokerStats stats() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Client

class Client {
public:
    /// Runs the connection handshake. Throws HandshakeError or TransportError.
    static Client connect(const std::string& host, std::uint16_t port = kDefaultPort,
                          std::chrono::milliseconds timeout = kDefaultTimeout);

    Client(Client&&) noexcept;
    Client& operator=(Client&&) noexcept;
    ~Client();

    const std::string& client_id() const noexcept;

    /// Sends one notification and waits for its acknowledgement.
    bool notify(const Term& payload);
    bool subscribe(const Term& head, const Term& body, std::int64_t rock);
    bool register_name(const std::string& name);
    bool deregister(const std::string& name);

    /// Writes raw bytes on the data channel without waiting for an ack;
    /// pair with await_ack for pipelining.
    void send_raw(std::string_view bytes);
    bool await_ack();

    /// Next delivery, or nullopt on timeout or when the connection closed.
    std::optional<std::pair<std::int64_t, Term>> next_delivery(std::chrono::milliseconds timeout);

    bool connected() const noexcept;
    void close();

private:
    struct Impl;
    explicit Client(std::unique_ptr<Impl> impl);
    std::unique_ptr<Impl> impl_;
};

}  // namespace teleo::pedro
