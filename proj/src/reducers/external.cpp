#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "fsr/errors.hpp"
#include "fsr/reducers.hpp"

namespace fsr {

namespace {

// Temporary file removed on scope exit.
class TempFile {
 public:
  TempFile() {
    const auto dir = std::filesystem::temp_directory_path();
    std::string pattern = (dir / "fsr-reducer-XXXXXX").string();
    const int fd = ::mkstemp(pattern.data());
    if (fd < 0) throw DataError("external reducer: cannot create temporary file");
    ::close(fd);
    path_ = pattern;
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

Matrix external_reducer(const std::string& command, const Matrix& x, int target_dim,
                        std::uint64_t seed) {
  if (command.empty()) throw DataError("external reducer: no command configured");
  const Eigen::Index n = x.rows(), d = x.cols();

  TempFile input;
  {
    std::ofstream os(input.path());
    os << fmt::format("{} {} {} {}\n", n, d, target_dim, seed);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) {
        os << (c ? " " : "") << fmt::format("{:.17g}", x(r, c));
      }
      os << '\n';
    }
    if (!os) throw DataError("external reducer: cannot write input file");
  }

  const std::string shell = "(" + command + ") < " + shell_quote(input.path());
  FILE* pipe = ::popen(shell.c_str(), "r");
  if (pipe == nullptr) throw DataError("external reducer: cannot launch '" + command + "'");
  std::string output;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) output.append(buf.data(), got);
  const int status = ::pclose(pipe);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw DataError("external reducer: '" + command + "' exited with status " +
                    std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : status));
  }

  Matrix out(n, target_dim);
  std::istringstream is(output);
  std::string line;
  Eigen::Index row = 0;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (row >= n) throw DataError("external reducer: more than " + std::to_string(n) + " rows");
    std::istringstream ls(line);
    int c = 0;
    double v;
    while (ls >> v) {
      if (c >= target_dim) break;
      out(row, c++) = v;
    }
    if (c != target_dim || !(ls >> std::ws).eof()) {
      throw DataError("external reducer: malformed output row " + std::to_string(row + 1));
    }
    ++row;
  }
  if (row != n) {
    throw DataError("external reducer: expected " + std::to_string(n) + " rows, got " +
                    std::to_string(row));
  }
  require_finite(out, "external reducer output");
  return out;
}

}  // namespace fsr
