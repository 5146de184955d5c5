#include "cli/server.hpp"

#include <csignal>
#include <ostream>
#include <thread>

#include "httplib.h"
#include "verifai/error.hpp"
#include "verifai/json_io.hpp"
#include "verifai/provenance.hpp"

namespace verifai::cli {

namespace {

void reply_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json error_record(const std::string& kind, const std::string& message) {
    return json{{"error", kind}, {"message", message}};
}

}  // namespace

Service::Service(std::shared_ptr<const Engine> engine)
    : engine_(std::move(engine)), server_(std::make_unique<httplib::Server>()) {
    server_->Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        res.status = 200;
        res.set_content("ok", "text/plain");
    });

    server_->Post("/verify", [this](const httplib::Request& req, httplib::Response& res) {
        if (!engine_) return reply_json(res, 503, error_record("unavailable", "engine is not loaded"));
        DataObject g;
        try {
            g = json::parse(req.body).get<DataObject>();
            g.validate();
        } catch (const json::exception& e) {
            return reply_json(res, 400, error_record("malformed_object", e.what()));
        } catch (const Error& e) {
            return reply_json(res, 400, error_record("malformed_object", e.what()));
        }
        try {
            const auto outcome = engine_->verify(g);
            json body = outcome.report;
            if (outcome.lineage_id) body["lineage_id"] = *outcome.lineage_id;
            reply_json(res, 200, body);
        } catch (const std::exception& e) {
            reply_json(res, 503, error_record("unavailable", e.what()));
        }
    });

    server_->Get(R"(/provenance/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
        if (!engine_) return reply_json(res, 503, error_record("unavailable", "engine is not loaded"));
        const auto* log = engine_->log();
        if (log == nullptr) return reply_json(res, 404, error_record("not_found", "no lineage log configured"));
        try {
            const auto id = std::stoull(req.matches[1].str());
            json body = load_lineage(log->path(), id);
            body["lineage_id"] = id;
            reply_json(res, 200, body);
        } catch (const NotFoundError& e) {
            reply_json(res, 404, error_record("not_found", e.what()));
        } catch (const std::out_of_range& e) {
            reply_json(res, 404, error_record("not_found", "lineage id out of range"));
        } catch (const CorruptionError& e) {
            reply_json(res, 500, error_record("corruption", e.what()));
        } catch (const std::exception& e) {
            reply_json(res, 503, error_record("unavailable", e.what()));
        }
    });
}

Service::~Service() = default;

int Service::bind(const std::string& host, int port) {
    if (port == 0) return server_->bind_to_any_port(host);
    return server_->bind_to_port(host, port) ? port : -1;
}

bool Service::listen_after_bind() { return server_->listen_after_bind(); }

void Service::stop() { server_->stop(); }

bool Service::is_running() const { return server_->is_running(); }

int run_service(std::shared_ptr<const Engine> engine, const std::string& host, int port, std::ostream& err) {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    Service service(std::move(engine));
    const int bound = service.bind(host, port);
    if (bound < 0) {
        err << "error: cannot bind " << host << ":" << port << "\n";
        return 2;
    }
    err << "listening on http://" << host << ":" << bound << "\n" << std::flush;

    std::thread waiter([&service, set] {
        int sig = 0;
        sigwait(&set, &sig);
        service.stop();
    });
    const bool ok = service.listen_after_bind();
    if (waiter.joinable()) {
        pthread_kill(waiter.native_handle(), SIGTERM);
        waiter.join();
    }
    err << "server stopped\n";
    return ok ? 0 : 3;
}

}  // namespace verifai::cli
