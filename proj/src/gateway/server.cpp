#include "ctrlroom/gateway/server.hpp"

#include <deque>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/version.hpp>
#include <boost/beast/websocket.hpp>

namespace ctrlroom::gateway {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

// Periodic tick so grace deadlines fire without new input.
class Ticker : public std::enable_shared_from_this<Ticker> {
public:
    Ticker(net::any_io_executor ex, std::weak_ptr<Room> room, Millis interval)
        : timer_(ex), room_(std::move(room)), interval_(interval) {}

    void start() { arm(); }
    void stop() { timer_.cancel(); }

private:
    void arm() {
        timer_.expires_after(interval_);
        timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
            if (ec) return;
            auto room = self->room_.lock();
            if (!room) return;
            room->tick();
            self->arm();
        });
    }

    net::steady_timer timer_;
    std::weak_ptr<Room> room_;
    Millis interval_;
};

std::string_view mime_type(const std::filesystem::path& p) {
    const auto ext = p.extension().string();
    if (ext == ".html" || ext == ".htm") return "text/html";
    if (ext == ".js" || ext == ".mjs") return "application/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json" || ext == ".map") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    if (ext == ".ico") return "image/x-icon";
    if (ext == ".woff2") return "font/woff2";
    return "application/octet-stream";
}

// Maps a request target onto static_dir; nullopt for anything that escapes it.
std::optional<std::filesystem::path> resolve_asset(const std::filesystem::path& root, std::string_view target) {
    if (root.empty()) return std::nullopt;
    std::string path(target.substr(0, target.find_first_of("?#")));
    if (path.empty() || path[0] != '/') return std::nullopt;
    std::filesystem::path rel = std::filesystem::path(path.substr(1)).lexically_normal();
    if (rel.empty() || rel == ".") rel = "index.html";
    for (const auto& part : rel) {
        if (part == "..") return std::nullopt;
    }
    auto full = root / rel;
    if (std::filesystem::is_directory(full)) full /= "index.html";
    if (!std::filesystem::is_regular_file(full)) return std::nullopt;
    return full;
}

struct Shared {
    harness::PipelineConfig config;
    ServerOptions options;
    std::shared_ptr<Room> room;  // shared mode only
};

class WsSession : public std::enable_shared_from_this<WsSession> {
public:
    WsSession(tcp::socket&& socket, std::shared_ptr<Shared> shared)
        : ws_(std::move(socket)), shared_(std::move(shared)) {}

    void run(http::request<http::string_body> req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
            if (!ec) self->on_accept();
        });
    }

private:
    void on_accept() {
        if (shared_->options.room_mode == RoomMode::shared) {
            room_ = shared_->room;
        } else {
            room_ = std::make_shared<Room>(shared_->config, shared_->options.clock, shared_->options.outbox_capacity);
            ticker_ = std::make_shared<Ticker>(ws_.get_executor(), room_, shared_->options.tick_interval);
            ticker_->start();
        }
        std::weak_ptr<WsSession> weak = weak_from_this();
        auto ex = ws_.get_executor();
        id_ = room_->attach([weak, ex] {
            net::post(ex, [weak] {
                if (auto self = weak.lock()) self->flush();
            });
        });
        read();
    }

    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return self->close_session();
            const auto text = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            self->room_->receive(self->id_, text);
            self->read();
        });
    }

    void flush() {
        if (writing_ || closed_) return;
        for (auto& m : room_->take(id_)) pending_.push_back(std::move(m));
        if (pending_.empty()) {
            if (room_->dropped(id_)) {
                closed_ = true;
                ws_.async_close(websocket::close_code::policy_error,
                                [self = shared_from_this()](beast::error_code) { self->close_session(); });
            }
            return;
        }
        writing_ = true;
        ws_.text(true);
        ws_.async_write(net::buffer(pending_.front()),
                        [self = shared_from_this()](beast::error_code ec, std::size_t) {
                            self->writing_ = false;
                            self->pending_.pop_front();
                            if (ec) return self->close_session();
                            self->flush();
                        });
    }

    void close_session() {
        if (detached_) return;
        detached_ = true;
        closed_ = true;
        if (ticker_) ticker_->stop();
        if (room_) room_->detach(id_);
    }

    websocket::stream<beast::tcp_stream> ws_;
    std::shared_ptr<Shared> shared_;
    std::shared_ptr<Room> room_;
    std::shared_ptr<Ticker> ticker_;
    ClientId id_ = 0;
    beast::flat_buffer buffer_;
    std::deque<std::string> pending_;
    bool writing_ = false;
    bool closed_ = false;
    bool detached_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket&& socket, std::shared_ptr<Shared> shared)
        : stream_(std::move(socket)), shared_(std::move(shared)) {}

    void run() { read(); }

private:
    void read() {
        req_ = {};
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return self->shutdown();
            self->on_request();
        });
    }

    void on_request() {
        if (websocket::is_upgrade(req_)) {
            stream_.expires_never();
            std::make_shared<WsSession>(stream_.release_socket(), shared_)->run(std::move(req_));
            return;
        }
        const bool keep_alive = req_.keep_alive();
        if (req_.method() != http::verb::get) {
            return send_text(http::status::method_not_allowed, "method not allowed\n", keep_alive);
        }
        const auto path = resolve_asset(shared_->options.static_dir,
                                        std::string_view(req_.target().data(), req_.target().size()));
        if (!path) return send_text(http::status::not_found, "not found\n", keep_alive);

        http::file_body::value_type body;
        beast::error_code ec;
        body.open(path->string().c_str(), beast::file_mode::scan, ec);
        if (ec) return send_text(http::status::not_found, "not found\n", keep_alive);
        auto res = std::make_shared<http::response<http::file_body>>(
            std::piecewise_construct, std::make_tuple(std::move(body)),
            std::make_tuple(http::status::ok, req_.version()));
        res->set(http::field::server, "ctrlroom");
        res->set(http::field::content_type, std::string(mime_type(*path)));
        res->keep_alive(keep_alive);
        res->prepare_payload();
        write(res, keep_alive);
    }

    void send_text(http::status status, std::string text, bool keep_alive) {
        auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
        res->set(http::field::server, "ctrlroom");
        res->set(http::field::content_type, "text/plain");
        res->keep_alive(keep_alive);
        res->body() = std::move(text);
        res->prepare_payload();
        write(res, keep_alive);
    }

    template <class Response>
    void write(std::shared_ptr<Response> res, bool keep_alive) {
        http::async_write(stream_, *res, [self = shared_from_this(), res, keep_alive](beast::error_code ec, std::size_t) {
            if (ec || !keep_alive) return self->shutdown();
            self->read();
        });
    }

    void shutdown() {
        beast::error_code ec;
        stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
    }

    beast::tcp_stream stream_;
    std::shared_ptr<Shared> shared_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
};

}  // namespace

struct Server::Impl {
    net::io_context ioc{1};
    tcp::acceptor acceptor{ioc};
    std::shared_ptr<Shared> shared;
    std::shared_ptr<Ticker> ticker;

    void accept() {
        acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
            if (ec == net::error::operation_aborted) return;
            if (!ec) std::make_shared<HttpSession>(std::move(socket), shared)->run();
            accept();
        });
    }
};

Server::Server(harness::PipelineConfig config, ServerOptions options) : impl_(std::make_unique<Impl>()) {
    if (!options.clock) options.clock = steady_clock();
    if (!config.model) config.model = harness::default_model();
    auto shared = std::make_shared<Shared>(Shared{std::move(config), std::move(options), nullptr});
    if (shared->options.room_mode == RoomMode::shared) {
        shared->room = std::make_shared<Room>(shared->config, shared->options.clock, shared->options.outbox_capacity);
    }
    impl_->shared = shared;

    const tcp::endpoint endpoint(net::ip::make_address(shared->options.address), shared->options.port);
    auto& acceptor = impl_->acceptor;
    acceptor.open(endpoint.protocol());
    acceptor.set_option(net::socket_base::reuse_address(true));
    acceptor.bind(endpoint);
    acceptor.listen(net::socket_base::max_listen_connections);
}

Server::~Server() = default;

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() {
    if (impl_->shared->room) {
        impl_->ticker = std::make_shared<Ticker>(impl_->ioc.get_executor(), impl_->shared->room,
                                                 impl_->shared->options.tick_interval);
        impl_->ticker->start();
    }
    impl_->accept();
    impl_->ioc.run();
}

void Server::stop() { impl_->ioc.stop(); }

}  // namespace ctrlroom::gateway
