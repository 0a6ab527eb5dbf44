#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>

#include <httplib.h>
#include <json.hpp>

#include "deepsound/pipeline.hpp"
#include "util/base64.hpp"

namespace deepsound::pipeline {
namespace {

using nlohmann::json;

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw BackendError(BackendErrorKind::connection, "endpoint must be an absolute URL: " + url);
  }
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

void set_timeout(httplib::Client& client, double seconds) {
  const auto whole = static_cast<time_t>(seconds);
  const auto usec = static_cast<time_t>((seconds - static_cast<double>(whole)) * 1e6);
  client.set_connection_timeout(whole, usec);
  client.set_read_timeout(whole, usec);
  client.set_write_timeout(whole, usec);
}

}  // namespace

std::string_view to_string(BackendErrorKind kind) noexcept {
  switch (kind) {
    case BackendErrorKind::connection: return "connection";
    case BackendErrorKind::timeout: return "timeout";
    case BackendErrorKind::status: return "status";
    case BackendErrorKind::payload: return "payload";
    case BackendErrorKind::unknown_backend: return "unknown_backend";
  }
  return "?";
}

std::string encode_v2a_request(const V2ARequest& request) {
  json j;
  j["video_descriptor"] = json::parse(detect::descriptor_to_json(request.video));
  j["prompt"] = request.prompt;
  j["negative_prompt"] = request.negative_prompt ? json(*request.negative_prompt) : json(nullptr);
  j["seed"] = request.seed;
  return j.dump();
}

std::string encode_v2a_response(const audio::Waveform& w) {
  std::vector<unsigned char> bytes;
  bytes.reserve(w.size() * 4);
  for (float s : w.samples()) {
    const auto bits = std::bit_cast<std::uint32_t>(s);
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xFF));
  }
  json j;
  j["sample_rate"] = w.sample_rate();
  j["samples_b64"] = util::base64_encode(bytes);
  return j.dump();
}

audio::Waveform decode_v2a_response(std::string_view body) {
  int sample_rate = 0;
  std::string encoded;
  try {
    const auto j = json::parse(body);
    sample_rate = j.at("sample_rate").get<int>();
    encoded = j.at("samples_b64").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(BackendErrorKind::payload, std::string("malformed response JSON: ") + e.what());
  }
  if (sample_rate <= 0) throw BackendError(BackendErrorKind::payload, "non-positive sample_rate");
  const auto bytes = util::base64_decode(encoded);
  if (!bytes) throw BackendError(BackendErrorKind::payload, "samples_b64 is not valid base64");
  if (bytes->size() % 4 != 0) {
    throw BackendError(BackendErrorKind::payload, "sample payload is not a whole number of float32");
  }
  std::vector<float> samples(bytes->size() / 4);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 3; b >= 0; --b) bits = (bits << 8) | (*bytes)[i * 4 + static_cast<std::size_t>(b)];
    samples[i] = std::bit_cast<float>(bits);
    if (!std::isfinite(samples[i])) throw BackendError(BackendErrorKind::payload, "non-finite sample");
  }
  return audio::to_canonical(audio::Waveform(std::move(samples), sample_rate));
}

audio::Waveform http_v2a_client(const std::string& endpoint, const V2ARequest& request,
                                double timeout_seconds) {
  if (endpoint.empty()) throw BackendError(BackendErrorKind::connection, "no endpoint configured");
  const auto ep = split_endpoint(endpoint);
  httplib::Client client(ep.base);
  set_timeout(client, timeout_seconds);

  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(ep.path, encode_v2a_request(request), "application/json");
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (!res) {
    const auto err = res.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           ((err == httplib::Error::Read || err == httplib::Error::Write) &&
                            elapsed >= 0.9 * timeout_seconds);
    if (timed_out) {
      throw BackendError(BackendErrorKind::timeout,
                         "request to " + endpoint + " timed out after " +
                             std::to_string(timeout_seconds) + " s");
    }
    throw BackendError(BackendErrorKind::connection,
                       "request to " + endpoint + " failed: " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendError(BackendErrorKind::status,
                       "backend returned HTTP " + std::to_string(res->status), res->status);
  }
  return decode_v2a_response(res->body);
}

HttpBackend::HttpBackend(std::string endpoint, double timeout_seconds)
    : endpoint_(std::move(endpoint)), timeout_seconds_(timeout_seconds) {}

audio::Waveform HttpBackend::generate(const V2ARequest& request) const {
  return http_v2a_client(endpoint_, request, timeout_seconds_);
}

}  // namespace deepsound::pipeline
