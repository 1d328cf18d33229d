#include "manifest.hpp"

#include <boost/version.hpp>
#include <gmp.h>
#include <mpfr.h>
#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <sstream>

#include "qnormal/numeric.hpp"

namespace qn::cli {

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw InvariantError("SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

std::string file_sha256(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

nlohmann::json RunManifest::to_json() const {
  auto files = [](const std::vector<std::string>& paths) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : paths) out.push_back({{"path", p}, {"sha256", file_sha256(p)}});
    return out;
  };
  std::string boost_version = BOOST_LIB_VERSION;
  return {{"command_line", command_line},
          {"config", config},
          {"config_digest", sha256_hex(config.dump())},
          {"precision_bits", precision_bits},
          {"module_versions",
           {{"qnormal", kVersion}, {"boost", boost_version}, {"mpfr", mpfr_get_version()}, {"gmp", gmp_version}}},
          {"inputs", files(inputs)},
          {"outputs", files(outputs)}};
}

void write_with_manifest(const std::string& path, const std::string& content, RunManifest manifest) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write '" + path + "'");
    out << content;
  }
  manifest.outputs.push_back(path);
  std::ofstream m(path + ".manifest.json", std::ios::binary);
  if (!m) throw DomainError("cannot write '" + path + ".manifest.json'");
  m << manifest.to_json().dump(2) << "\n";
}

}  // namespace qn::cli
