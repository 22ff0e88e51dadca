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

#include "http_pool.h"

#include <algorithm>
#include <cctype>

#include <httplib.h>

#include "sdlm/error.h"

namespace sdlm {

namespace {

HttpResponse convert(const httplib::Result& result) {
  HttpResponse response;
  if (!result) {
    response.error = httplib::to_string(result.error());
    return response;
  }
  response.status = result->status;
  response.body = result->body;
  for (const auto& [k, v] : result->headers) response.headers.emplace(k, v);
  return response;
}

}  // namespace

std::string HttpResponse::header(const std::string& name) const {
  for (const auto& [k, v] : headers) {
    if (k.size() != name.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < k.size() && same; ++i) {
      same = std::tolower(static_cast<unsigned char>(k[i])) ==
             std::tolower(static_cast<unsigned char>(name[i]));
    }
    if (same) return v;
  }
  return {};
}

HttpPool::HttpPool(const std::string& endpoint, std::chrono::milliseconds timeout,
                   std::size_t max_connections)
    : endpoint_(endpoint),
      timeout_(timeout),
      slots_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, max_connections))) {
  const std::string scheme = "http://";
  if (endpoint.rfind(scheme, 0) != 0) {
    throw ConfigError("endpoint \"" + endpoint + "\" must start with http://");
  }
  auto slash = endpoint.find('/', scheme.size());
  scheme_host_port_ = endpoint.substr(0, slash);
  if (slash != std::string::npos) {
    path_prefix_ = endpoint.substr(slash);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
  if (scheme_host_port_.size() == scheme.size()) {
    throw ConfigError("endpoint \"" + endpoint + "\" has no host");
  }
}

HttpPool::~HttpPool() = default;

std::unique_ptr<httplib::Client> HttpPool::acquire() {
  slots_.acquire();
  std::lock_guard lock(mutex_);
  if (!idle_.empty()) {
    auto client = std::move(idle_.back());
    idle_.pop_back();
    return client;
  }
  auto client = std::make_unique<httplib::Client>(scheme_host_port_);
  client->set_keep_alive(true);
  client->set_tcp_nodelay(true);
  client->set_connection_timeout(timeout_);
  client->set_read_timeout(timeout_);
  client->set_write_timeout(timeout_);
  return client;
}

void HttpPool::release(std::unique_ptr<httplib::Client> client) {
  {
    std::lock_guard lock(mutex_);
    idle_.push_back(std::move(client));
  }
  slots_.release();
}

HttpResponse HttpPool::get(const std::string& path, const HttpHeaders& headers) {
  auto client = acquire();
  httplib::Headers h(headers.begin(), headers.end());
  HttpResponse response = convert(client->Get(path_prefix_ + path, h));
  release(std::move(client));
  return response;
}

HttpResponse HttpPool::post_json(const std::string& path, const std::string& body,
                                 const HttpHeaders& headers) {
  auto client = acquire();
  httplib::Headers h(headers.begin(), headers.end());
  HttpResponse response =
      convert(client->Post(path_prefix_ + path, h, body, "application/json"));
  release(std::move(client));
  return response;
}

}  // namespace sdlm
