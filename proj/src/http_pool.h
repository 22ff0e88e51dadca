// Copyright 2026 The sdlm Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <vector>

namespace httplib {
class Client;
}

namespace sdlm {

struct HttpResponse {
  // 0 on transport failure; `error` then says why.
  int status = 0;
  std::string body;
  std::multimap<std::string, std::string> headers;
  std::string error;

  bool ok() const { return status >= 200 && status < 300; }
  std::string header(const std::string& name) const;
};

using HttpHeaders = std::multimap<std::string, std::string>;

// Bounded pool of keep-alive clients for one endpoint. At most
// `max_connections` requests are in flight; further callers block.
class HttpPool {
 public:
  HttpPool(const std::string& endpoint, std::chrono::milliseconds timeout,
           std::size_t max_connections);
  ~HttpPool();

  HttpResponse get(const std::string& path, const HttpHeaders& headers = {});
  HttpResponse post_json(const std::string& path, const std::string& body,
                         const HttpHeaders& headers = {});

  const std::string& endpoint() const { return endpoint_; }

 private:
  std::unique_ptr<httplib::Client> acquire();
  void release(std::unique_ptr<httplib::Client> client);

  std::string endpoint_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::chrono::milliseconds timeout_;
  std::counting_semaphore<> slots_;
  std::mutex mutex_;
  std::vector<std::unique_ptr<httplib::Client>> idle_;
};

}  // namespace sdlm
