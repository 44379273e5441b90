#include "teleo/pedro.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <thread>

#include "net.hpp"
#include "teleo/belief_store.hpp"
#include "teleo/errors.hpp"
#include "teleo/program.hpp"

namespace teleo::pedro {

// ---------------------------------------------------------------------------
// Codec

std::string encode_message(const Term& t) { return format_term(t) + "\n"; }

Term decode_message(std::string_view line) {
    if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find('\n') != std::string_view::npos) {
        throw SyntaxError("embedded newline in message", line.find('\n'));
    }
    return parse_term(line);
}

bool is_notification_term(const Term& t) noexcept {
    return t.is_atom() || t.is_list() || t.is_compound();
}

bool is_valid_name(const Term& t) noexcept {
    if (!t.is_atom()) return false;
    const std::string& n = t.name();
    return n.find_first_of(",:@") == std::string::npos && !n.empty();
}

// ---------------------------------------------------------------------------
// Bodies

namespace {

std::optional<CompareOp> comparison_op(const Term& t) {
    if (!t.is_compound() || t.arity() != 2) return std::nullopt;
    static const std::pair<const char*, CompareOp> ops[] = {
        {">", CompareOp::Gt}, {">=", CompareOp::Ge}, {"==", CompareOp::Eq},
        {"<=", CompareOp::Le}, {"<", CompareOp::Lt}};
    for (const auto& [name, op] : ops) {
        if (t.name() == name) return op;
    }
    return std::nullopt;
}

bool is_arith_op(const Term& t) {
    return t.is_compound() && t.arity() == 2 &&
           (t.name() == "+" || t.name() == "-" || t.name() == "*" || t.name() == "/");
}

bool is_length(const Term& t) { return t.is_compound() && t.name() == "length" && t.arity() == 1; }

bool valid_operand(const Term& t) {
    if (t.is_number() || t.is_var()) return true;
    if (is_length(t)) return t.args()[0].is_var() || t.args()[0].is_list();
    if (is_arith_op(t)) return valid_operand(t.args()[0]) && valid_operand(t.args()[1]);
    return false;
}

// Operand as an expression with every variable and length resolved to a
// literal; nullopt when something cannot be resolved.
std::optional<Expr> resolve_operand(const Term& t, const Bindings& sigma) {
    if (t.is_number()) return Expr::literal(t.number_value());
    if (t.is_var()) {
        const Term* v = sigma.find(t.name());
        if (!v || !v->is_number()) return std::nullopt;
        return Expr::literal(v->number_value());
    }
    if (is_length(t)) {
        Term arg = substitute(t.args()[0], sigma);
        if (!arg.is_list()) return std::nullopt;
        return Expr::literal(Number{static_cast<std::int64_t>(arg.args().size())});
    }
    if (is_arith_op(t)) {
        auto lhs = resolve_operand(t.args()[0], sigma);
        auto rhs = resolve_operand(t.args()[1], sigma);
        if (!lhs || !rhs) return std::nullopt;
        return Expr::binary(t.name()[0], std::move(*lhs), std::move(*rhs));
    }
    return std::nullopt;
}

}  // namespace

bool is_valid_body(const Term& body) noexcept {
    if (body.is_atom()) return body.name() == "true";
    if (body.is_compound() && body.name() == "&" && body.arity() == 2) {
        return is_valid_body(body.args()[0]) && is_valid_body(body.args()[1]);
    }
    if (comparison_op(body)) return valid_operand(body.args()[0]) && valid_operand(body.args()[1]);
    return false;
}

bool evaluate_body(const Term& body, const Bindings& sigma) noexcept {
    try {
        if (body.is_atom()) return body.name() == "true";
        if (body.is_compound() && body.name() == "&" && body.arity() == 2) {
            return evaluate_body(body.args()[0], sigma) && evaluate_body(body.args()[1], sigma);
        }
        auto op = comparison_op(body);
        if (!op) return false;
        auto lhs = resolve_operand(body.args()[0], sigma);
        auto rhs = resolve_operand(body.args()[1], sigma);
        if (!lhs || !rhs) return false;
        return compare_numbers(evaluate_expr(*lhs, {}), *op, evaluate_expr(*rhs, {}));
    } catch (const std::exception&) {
        return false;
    }
}

std::optional<Subscription> parse_subscription(const Term& t) {
    if (!t.is_compound() || t.name() != "subscribe" || t.arity() != 3) return std::nullopt;
    const Term& head = t.args()[0];
    const Term& body = t.args()[1];
    const Term& rock = t.args()[2];
    if (!(head.is_atom() || head.is_compound())) return std::nullopt;
    if (!is_valid_body(body)) return std::nullopt;
    if (!rock.is_number() || !rock.number_value().is_integer()) return std::nullopt;
    Subscription s;
    s.head = head;
    s.body = body;
    s.rock = rock.number_value().as_integer();
    return s;
}

std::vector<Delivery> broker_route(const Term& notification, const std::vector<Subscription>& subs) {
    std::vector<Delivery> out;
    for (const Subscription& s : subs) {
        auto sigma = match(s.head, notification, {});
        if (sigma && evaluate_body(s.body, *sigma)) out.push_back({s.client, s.rock, notification});
    }
    return out;
}

std::string format_delivery(std::int64_t rock, const Term& payload) {
    return std::to_string(rock) + " : " + format_term(payload) + "\n";
}

std::pair<std::int64_t, Term> parse_delivery(std::string_view line) {
    auto colon = line.find(':');
    if (colon == std::string_view::npos) throw SyntaxError("delivery without rock", 0);
    std::string_view rock_text = line.substr(0, colon);
    while (!rock_text.empty() && rock_text.back() == ' ') rock_text.remove_suffix(1);
    std::int64_t rock = 0;
    auto [ptr, ec] = std::from_chars(rock_text.data(), rock_text.data() + rock_text.size(), rock);
    if (ec != std::errc{} || ptr != rock_text.data() + rock_text.size() || rock_text.empty()) {
        throw SyntaxError("bad rock in delivery", 0);
    }
    std::string_view rest = line.substr(colon + 1);
    while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    return {rock, decode_message(rest)};
}

// ---------------------------------------------------------------------------
// Broker

namespace {

struct Session {
    std::uint64_t id = 0;
    net::Socket ack;
    net::Socket data;
    std::mutex write_mu;  // serialises deliveries on `data`
    std::optional<std::string> name;
};

}  // namespace

struct Broker::Impl {
    BrokerOptions opt;
    net::Socket main_listener, ack_listener, data_listener;
    std::uint16_t main_port = 0, ack_port = 0, data_port = 0;
    bool running = false;
    std::vector<std::thread> acceptors;

    std::mutex conn_mu;  // guards connections and workers
    std::vector<std::shared_ptr<Session>> connections;
    std::vector<std::thread> workers;

    std::mutex pending_mu;
    std::map<std::uint64_t, net::Socket> pending_acks;
    std::atomic<std::uint64_t> next_client{1};

    mutable std::shared_mutex table_mu;  // sessions, subscriptions, names
    std::map<std::uint64_t, std::shared_ptr<Session>> sessions;
    std::vector<Subscription> subscriptions;
    std::uint64_t next_subscription = 1;
    std::map<std::string, std::uint64_t> names;

    void accept_main() {
        while (auto conn = net::accept_tcp(main_listener)) {
            try {
                std::string host = net::local_address(*conn);
                net::write_all(*conn, host + " " + std::to_string(ack_port) + " " +
                                          std::to_string(data_port) + "\n");
            } catch (const TransportError&) {
            }
        }
    }

    void accept_ack() {
        while (auto conn = net::accept_tcp(ack_listener)) {
            std::uint64_t id = next_client++;
            try {
                net::write_all(*conn, std::to_string(id) + "\n");
            } catch (const TransportError&) {
                continue;
            }
            std::lock_guard lock(pending_mu);
            pending_acks.emplace(id, std::move(*conn));
        }
    }

    void accept_data() {
        while (auto conn = net::accept_tcp(data_listener)) {
            auto session = std::make_shared<Session>();
            session->data = std::move(*conn);
            std::lock_guard lock(conn_mu);
            if (!running) break;
            connections.push_back(session);
            workers.emplace_back([this, session] { serve(session); });
        }
    }

    void serve(std::shared_ptr<Session> s) {
        net::LineReader reader(s->data);
        try {
            auto id_line = reader.read_line(opt.timeout);
            if (!id_line) return;
            std::uint64_t id = 0;
            auto [ptr, ec] = std::from_chars(id_line->data(), id_line->data() + id_line->size(), id);
            bool parsed = ec == std::errc{} && ptr == id_line->data() + id_line->size();
            {
                std::lock_guard lock(pending_mu);
                auto it = parsed ? pending_acks.find(id) : pending_acks.end();
                if (it == pending_acks.end()) {
                    net::write_all(s->data, "no\n");
                    s->data.shutdown();
                    return;
                }
                s->ack = std::move(it->second);
                pending_acks.erase(it);
            }
            s->id = id;
            {
                std::unique_lock lock(table_mu);
                sessions[id] = s;
            }
            {
                std::lock_guard lock(s->write_mu);
                net::write_all(s->data, "ok\n");
            }
            while (auto line = reader.read_line()) {
                bool ok = handle(*s, *line);
                net::write_all(s->ack, ok ? "1\n" : "0\n");
            }
        } catch (const TransportError&) {
        }
        drop(*s);
    }

    bool handle(Session& s, const std::string& line) {
        Term msg = Term::atom("_");
        try {
            msg = decode_message(line);
        } catch (const SyntaxError&) {
            return false;
        }
        if (msg.is_compound() && msg.name() == "subscribe" && msg.arity() == 3) {
            auto sub = parse_subscription(msg);
            if (!sub) return false;
            std::unique_lock lock(table_mu);
            sub->id = next_subscription++;
            sub->client = s.id;
            subscriptions.push_back(std::move(*sub));
            return true;
        }
        if (msg.is_compound() && msg.name() == "register" && msg.arity() == 1) {
            if (!is_valid_name(msg.args()[0])) return false;
            std::unique_lock lock(table_mu);
            if (s.name || names.count(msg.args()[0].name())) return false;
            s.name = msg.args()[0].name();
            names[*s.name] = s.id;
            return true;
        }
        if (msg.is_compound() && msg.name() == "deregister" && msg.arity() == 1) {
            std::unique_lock lock(table_mu);
            if (!msg.args()[0].is_atom() || !s.name || *s.name != msg.args()[0].name()) return false;
            names.erase(*s.name);
            s.name.reset();
            return true;
        }
        if (!is_notification_term(msg) || !is_ground(msg)) return false;
        route(msg);
        return true;
    }

    void route(const Term& msg) {
        std::shared_lock lock(table_mu);
        for (const Delivery& d : broker_route(msg, subscriptions)) {
            auto it = sessions.find(d.client);
            if (it == sessions.end()) continue;
            Session& target = *it->second;
            std::lock_guard wlock(target.write_mu);
            try {
                net::write_all(target.data, format_delivery(d.rock, d.payload));
            } catch (const TransportError&) {
                target.data.shutdown();  // its reader will clean up
            }
        }
    }

    void drop(Session& s) {
        {
            std::unique_lock lock(table_mu);
            sessions.erase(s.id);
            std::erase_if(subscriptions, [&](const Subscription& sub) { return sub.client == s.id; });
            if (s.name) names.erase(*s.name);
            s.name.reset();
        }
        s.ack.shutdown();
        s.data.shutdown();
    }
};

Broker::Broker(BrokerOptions options) : impl_(std::make_unique<Impl>()) {
    impl_->opt = std::move(options);
}

Broker::~Broker() { stop(); }

void Broker::start() {
    Impl& m = *impl_;
    if (m.running) return;
    m.main_listener = net::listen_tcp(m.opt.host, m.opt.port);
    m.ack_listener = net::listen_tcp(m.opt.host, 0);
    m.data_listener = net::listen_tcp(m.opt.host, 0);
    m.main_port = net::local_port(m.main_listener);
    m.ack_port = net::local_port(m.ack_listener);
    m.data_port = net::local_port(m.data_listener);
    m.running = true;
    m.acceptors.emplace_back([&m] { m.accept_main(); });
    m.acceptors.emplace_back([&m] { m.accept_ack(); });
    m.acceptors.emplace_back([&m] { m.accept_data(); });
}

void Broker::stop() {
    Impl& m = *impl_;
    {
        std::lock_guard lock(m.conn_mu);
        if (!m.running) return;
        m.running = false;
    }
    m.main_listener.shutdown();
    m.ack_listener.shutdown();
    m.data_listener.shutdown();
    for (auto& t : m.acceptors) t.join();
    m.acceptors.clear();
    std::vector<std::thread> workers;
    {
        std::lock_guard lock(m.conn_mu);
        for (auto& s : m.connections) {
            s->data.shutdown();
            s->ack.shutdown();
        }
        workers.swap(m.workers);
    }
    for (auto& t : workers) t.join();
    std::lock_guard lock(m.conn_mu);
    m.connections.clear();
    m.pending_acks.clear();
    m.main_listener.close();
    m.ack_listener.close();
    m.data_listener.close();
}

std::uint16_t Broker::port() const noexcept { return impl_->main_port; }
std::uint16_t Broker::ack_port() const noexcept { return impl_->ack_port; }
std::uint16_t Broker::data_port() const noexcept { return impl_->data_port; }

BrokerStats Broker::stats() const {
    std::shared_lock lock(impl_->table_mu);
    return {impl_->sessions.size(), impl_->subscriptions.size(), impl_->names.size()};
}

// ---------------------------------------------------------------------------
// Client

struct Client::Impl {
    std::string id;
    std::chrono::milliseconds timeout{};
    net::Socket ack, data;
    std::optional<net::LineReader> ack_reader, data_reader;
    std::mutex send_mu;

    std::thread reader;
    std::mutex queue_mu;
    std::condition_variable queue_cv;
    std::deque<std::pair<std::int64_t, Term>> queue;
    bool closed = false;

    void read_deliveries() {
        try {
            while (auto line = data_reader->read_line()) {
                try {
                    auto d = parse_delivery(*line);
                    std::lock_guard lock(queue_mu);
                    queue.push_back(std::move(d));
                } catch (const SyntaxError&) {
                    continue;
                }
                queue_cv.notify_all();
            }
        } catch (const TransportError&) {
        }
        std::lock_guard lock(queue_mu);
        closed = true;
        queue_cv.notify_all();
    }
};

Client::Client(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Client::Client(Client&&) noexcept = default;
Client& Client::operator=(Client&& o) noexcept {
    if (this != &o) {
        close();
        impl_ = std::move(o.impl_);
    }
    return *this;
}
Client::~Client() { close(); }

Client Client::connect(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout) {
    auto m = std::make_unique<Impl>();
    m->timeout = timeout;

    std::string address;
    std::uint16_t ack_port = 0, data_port = 0;
    {
        net::Socket first = net::connect_tcp(host, port, timeout);
        net::LineReader reader(first);
        auto line = reader.read_line(timeout);
        if (!line) throw HandshakeError("server closed before sending its ports");
        std::istringstream in(*line);
        unsigned a = 0, d = 0;
        std::string extra;
        if (!(in >> address >> a >> d) || (in >> extra) || a == 0 || d == 0 || a > 65535 || d > 65535) {
            throw HandshakeError("malformed port line '" + *line + "'");
        }
        ack_port = static_cast<std::uint16_t>(a);
        data_port = static_cast<std::uint16_t>(d);
    }

    m->ack = net::connect_tcp(address, ack_port, timeout);
    m->ack_reader.emplace(m->ack);
    auto id = m->ack_reader->read_line(timeout);
    if (!id || id->empty()) throw HandshakeError("no client id on the ack channel");
    m->id = *id;

    m->data = net::connect_tcp(address, data_port, timeout);
    m->data_reader.emplace(m->data);
    net::write_all(m->data, m->id + "\n");
    auto status = m->data_reader->read_line(timeout);
    if (!status) throw HandshakeError("connection closed before status");
    if (*status != "ok") throw HandshakeError("handshake refused with status '" + *status + "'");

    Impl* raw = m.get();
    m->reader = std::thread([raw] { raw->read_deliveries(); });
    return Client(std::move(m));
}

const std::string& Client::client_id() const noexcept { return impl_->id; }

void Client::send_raw(std::string_view bytes) {
    std::lock_guard lock(impl_->send_mu);
    net::write_all(impl_->data, bytes);
}

bool Client::await_ack() {
    auto line = impl_->ack_reader->read_line(impl_->timeout);
    if (!line) throw TransportError("ack channel closed");
    if (*line == "1") return true;
    if (*line == "0") return false;
    throw TransportError("unexpected ack '" + *line + "'");
}

bool Client::notify(const Term& payload) {
    std::lock_guard lock(impl_->send_mu);
    net::write_all(impl_->data, encode_message(payload));
    return await_ack();
}

bool Client::subscribe(const Term& head, const Term& body, std::int64_t rock) {
    return notify(Term::compound("subscribe", {head, body, Term::integer(rock)}));
}

bool Client::register_name(const std::string& name) {
    return notify(Term::compound("register", {Term::atom(name)}));
}

bool Client::deregister(const std::string& name) {
    return notify(Term::compound("deregister", {Term::atom(name)}));
}

std::optional<std::pair<std::int64_t, Term>> Client::next_delivery(std::chrono::milliseconds timeout) {
    std::unique_lock lock(impl_->queue_mu);
    impl_->queue_cv.wait_for(lock, timeout, [&] { return !impl_->queue.empty() || impl_->closed; });
    if (impl_->queue.empty()) return std::nullopt;
    auto d = std::move(impl_->queue.front());
    impl_->queue.pop_front();
    return d;
}

bool Client::connected() const noexcept {
    if (!impl_) return false;
    std::lock_guard lock(impl_->queue_mu);
    return !impl_->closed;
}

void Client::close() {
    if (!impl_) return;
    impl_->data.shutdown();
    impl_->ack.shutdown();
    if (impl_->reader.joinable()) impl_->reader.join();
    impl_->data.close();
    impl_->ack.close();
}

}  // namespace teleo::pedro
