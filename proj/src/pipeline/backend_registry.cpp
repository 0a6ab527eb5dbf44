#include <cstdlib>

#include "deepsound/pipeline.hpp"

namespace deepsound::pipeline {

BackendRegistry& BackendRegistry::global() {
  static BackendRegistry* registry = [] {
    auto* r = new BackendRegistry();
    r->add("stub", [](const BackendOptions&) { return std::make_unique<StubBackend>(); });
    r->add("http", [](const BackendOptions& o) {
      return std::make_unique<HttpBackend>(resolve_endpoint(o.endpoint), o.timeout_seconds);
    });
    return r;
  }();
  return *registry;
}

void BackendRegistry::add(const std::string& id, Factory factory) {
  std::lock_guard lock(mutex_);
  factories_[id] = std::move(factory);
}

bool BackendRegistry::contains(const std::string& id) const {
  std::lock_guard lock(mutex_);
  return factories_.count(id) > 0;
}

std::vector<std::string> BackendRegistry::ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : factories_) out.push_back(id);
  return out;
}

std::unique_ptr<V2ABackend> BackendRegistry::create(const std::string& id,
                                                    const BackendOptions& options) const {
  Factory factory;
  {
    std::lock_guard lock(mutex_);
    const auto it = factories_.find(id);
    if (it == factories_.end()) {
      throw BackendError(BackendErrorKind::unknown_backend, "no backend registered as '" + id + "'");
    }
    factory = it->second;
  }
  return factory(options);
}

std::string resolve_endpoint(const std::string& configured) {
  if (const char* env = std::getenv(std::string(kEndpointEnv).c_str()); env && *env) return env;
  return configured;
}

}  // namespace deepsound::pipeline
