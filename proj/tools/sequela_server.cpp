// sequela-server: HTTP front end for the analysis session.
#include <iostream>

// Eigen before httplib: <resolv.h> defines a _res macro that breaks Eigen.
#include "sequela/api/config.hpp"
#include "sequela/api/service.hpp"
#include "sequela/error.hpp"

#include <CLI11.hpp>
#include <httplib.h>

namespace {

void reply(const sequela::api::Response& r, httplib::Response& res) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serve the cohort-analysis and modeling API"};
  std::string config_path;
  std::optional<int> port;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--port", port, "listen port (overrides config and SEQUELA_PORT)");
  CLI11_PARSE(app, argc, argv);

  try {
    auto config = sequela::api::load_config(config_path.empty() ? std::nullopt : std::optional(config_path));
    if (port) config.port = *port;
    sequela::api::Service service(config);

    httplib::Server server;
    if (config.static_dir && !server.set_mount_point("/", *config.static_dir)) {
      std::cerr << "sequela-server: static directory " << *config.static_dir << " not found\n";
      return 1;
    }
    server.Get(".*", [&](const httplib::Request& req, httplib::Response& res) {
      reply(service.handle("GET", req.path), res);
    });
    server.Post(".*", [&](const httplib::Request& req, httplib::Response& res) {
      reply(service.handle("POST", req.path, req.body), res);
    });
    std::cerr << "sequela-server: listening on " << config.host << ":" << config.port << "\n";
    if (!server.listen(config.host, config.port)) {
      std::cerr << "sequela-server: cannot listen on " << config.host << ":" << config.port << "\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "sequela-server: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
