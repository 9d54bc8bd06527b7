#include "sisnet/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>
#include <stdexcept>

#ifndef SISNET_VERSION
#define SISNET_VERSION "0.0.0"
#endif

namespace sisnet {

std::string software_version() { return SISNET_VERSION; }

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1)
    throw std::runtime_error("SHA-256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string RunManifest::config_digest() const {
  std::string canonical;
  for (const auto& [k, v] : config) canonical += k + " = " + v + "\n";
  return sha256_hex(canonical);
}

std::string RunManifest::render() const {
  std::ostringstream out;
  out << "command = " << quoted(command) << '\n';
  out << "version = " << quoted(software_version()) << '\n';
  out << "seed = " << seed << '\n';
  out << "config_digest = " << quoted("sha256:" + config_digest()) << '\n';
  out << "\n[config]\n";
  for (const auto& [k, v] : config) out << k << " = " << quoted(v) << '\n';
  out << "\n[inputs]\n";
  for (const auto& p : inputs)
    out << quoted(p.generic_string()) << " = " << quoted("sha256:" + sha256_file(p)) << '\n';
  out << "\n[outputs]\n";
  for (const auto& p : outputs)
    out << quoted(p.generic_string()) << " = " << quoted("sha256:" + sha256_file(p)) << '\n';
  if (!results.empty()) {
    out << "\n[results]\n";
    for (const auto& [k, v] : results) out << k << " = " << quoted(v) << '\n';
  }
  return out.str();
}

void RunManifest::write(const std::filesystem::path& path) const {
  const std::string text = render();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace sisnet
