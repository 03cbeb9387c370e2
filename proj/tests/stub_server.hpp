#pragma once

// Local HTTP server answering every POST with a fixed body.

#include <string>
#include <thread>

#include <httplib.h>

class StubServer {
public:
    explicit StubServer(std::string reply, int status = 200) : reply_(std::move(reply)), status_(status) {
        server_.Post(".*", [this](const httplib::Request& req, httplib::Response& res) {
            last_body_ = req.body;
            last_auth_ = req.get_header_value("Authorization");
            res.status = status_;
            res.set_content(reply_, "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/generate"; }
    const std::string& last_body() const { return last_body_; }
    const std::string& last_auth() const { return last_auth_; }

private:
    httplib::Server server_;
    std::string reply_;
    int status_;
    int port_ = 0;
    std::thread thread_;
    std::string last_body_;
    std::string last_auth_;
};
