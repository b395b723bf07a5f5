#pragma once

#include "scm/clock.hpp"
#include "scm/encoding.hpp"
#include "scm/engine.hpp"
#include "scm/error.hpp"

#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace scm {

struct ServiceOptions {
    std::string host = "127.0.0.1";
    int port = 8750;  // 0 picks a free port
    std::string snapshot_path;
    std::string audit_log_path;
    std::string cors_origin = "*";  // empty disables CORS headers
    double tick_seconds = 0.0;      // > 0 runs the trigger check periodically
    bool simulated_clock = false;
    EncoderSettings encoder;

    /// Fills port, snapshot path, clock mode and audit path from SCM_*.
    static ServiceOptions from_env();
};

/// HTTP status for an error kind.
int http_status(ErrorKind kind);

/// JSON API over one engine. The engine can be replaced wholesale by a
/// snapshot load; in-flight requests finish on the engine they started on.
class Service {
public:
    Service(std::shared_ptr<Engine> engine, std::shared_ptr<Clock> clock, ServiceOptions options);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds the listening socket; throws kIo if the port is taken.
    /// Returns the bound port.
    int bind();

    /// Serves until stop(). bind() must have succeeded.
    void run();

    /// bind() + run() on a background thread.
    int start();
    void stop();

    std::shared_ptr<Engine> engine() const;

private:
    void routes();
    void install(std::shared_ptr<Engine> engine);
    void tick_loop();

    ServiceOptions options_;
    std::shared_ptr<Clock> clock_;
    std::unique_ptr<httplib::Server> server_;

    mutable std::mutex engine_mu_;
    std::shared_ptr<Engine> engine_;
    std::mutex load_mu_;

    std::thread listener_;
    std::thread ticker_;
    std::mutex tick_mu_;
    std::condition_variable tick_cv_;
    bool stopping_ = false;
    int port_ = -1;
};

}  // namespace scm
