#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "verifai/engine.hpp"

namespace httplib {
class Server;
}

namespace verifai::cli {

/// HTTP front end over one engine:
///   POST /verify            DataObject record -> VerificationReport record
///   GET  /provenance/{id}   stored report, 404 when unknown
///   GET  /healthz           "ok"
class Service {
public:
    /// A null engine makes every pipeline endpoint answer 503.
    explicit Service(std::shared_ptr<const Engine> engine);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Returns the bound port, or -1.
    int bind(const std::string& host, int port);
    /// Blocks until stop() is called.
    bool listen_after_bind();
    void stop();
    bool is_running() const;

private:
    std::shared_ptr<const Engine> engine_;
    std::unique_ptr<httplib::Server> server_;
};

/// Serves until SIGINT or SIGTERM. Returns an exit code.
int run_service(std::shared_ptr<const Engine> engine, const std::string& host, int port, std::ostream& err);

}  // namespace verifai::cli
