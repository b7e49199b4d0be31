#ifndef CAUSALMINE_SERVER_H_
#define CAUSALMINE_SERVER_H_

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "causalmine/config.h"
#include "causalmine/feedback.h"

namespace httplib {
class Server;
}

namespace causalmine {

// HTTP status for a library error.
int http_status(ErrorCode code);

// JSON API over the runs found under a root directory (every subdirectory
// holding a run.json; the directory name is the run id).
//
//   GET  /health
//   GET  /runs
//   GET  /runs/{id}/candidates?status=pending|reviewed|all&page_token=&page_size=
//   POST /runs/{id}/feedback
//   POST /runs/{id}/evolve
//   GET  /runs/{id}/metrics
//   GET  /runs/{id}/blocklist
//
// With a non-empty api token every route but /health requires
// "Authorization: Bearer <token>".
class ApiServer {
 public:
  ApiServer(std::string runs_root, std::string api_token = "");
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Serves on the calling thread until stop().
  bool listen(const std::string& host, int port);
  void stop();

 private:
  struct RunState {
    std::mutex mu;
    std::unique_ptr<VerdictLog> log;
    std::shared_ptr<const Resources> resources;
  };

  void install_routes();
  std::string run_dir(const std::string& id) const;
  std::shared_ptr<RunState> state(const std::string& id);
  std::shared_ptr<const Resources> resources(const std::string& id, RunState& st);

  std::string root_;
  std::string token_;
  std::unique_ptr<httplib::Server> http_;
  std::mutex states_mu_;
  std::map<std::string, std::shared_ptr<RunState>> states_;
  std::unique_ptr<std::thread> thread_;
};

}  // namespace causalmine

#endif  // CAUSALMINE_SERVER_H_
