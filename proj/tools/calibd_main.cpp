#include "calib/service.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <iostream>
#include <optional>

int main(int argc, char** argv) {
  CLI::App app{"Calibration HTTP service", "calibd"};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir;
  app.add_option("--host", host, "Listen address");
  app.add_option("--port", port, "Listen port");
  app.add_option("--data-dir", data_dir, "Directory for persisted projects and blobs");
  CLI11_PARSE(app, argc, argv);

  std::optional<std::filesystem::path> dir;
  if (!data_dir.empty()) dir = data_dir;
  calib::ProjectStore store(dir);
  calib::CalibService service(store);
  httplib::Server server;
  service.bind(server);
  std::cerr << "calibd listening on " << host << ':' << port << '\n';
  if (!server.listen(host, port)) {
    std::cerr << "error: IoFailure: cannot listen on " << host << ':' << port << '\n';
    return 4;
  }
  return 0;
}
