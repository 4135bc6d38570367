#include <doctest.h>

#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "b92/cli.hpp"

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = b92::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("configuration errors exit with 2") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"session", "--mode", "quantum"}).code == 2);
  CHECK(cli({"session", "--eve", "sometimes"}).code == 2);
  CHECK(cli({"session", "--visibility", "1.5", "--mode", "physical"}).code == 2);
  CHECK(cli({"session", "--profile", "/nonexistent.cfg"}).code == 2);
  CHECK(cli({"session", "--dark-hz", "1e10", "--mode", "physical"}).code == 2);
  CHECK(cli({"sweep", "--step", "0"}).code == 2);
  CHECK(cli({"chat", "--role", "carol"}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
}

TEST_CASE("session subcommand") {
  const auto a = cli({"session", "--blocks", "4"});
  CHECK(a.code == 0);
  CHECK(a.out.find("alarm: false") != std::string::npos);
  CHECK(a.out == cli({"session", "--blocks", "4"}).out);
  const auto e = cli({"session", "--eve", "fixed"});
  CHECK(e.code == 0);
  CHECK(e.out.find("alarm: true (BER") != std::string::npos);
}

TEST_CASE("sweep subcommand") {
  const auto r = cli({"sweep", "--atten-db-km", "0.60206", "--start", "0", "--stop", "40", "--step",
                      "10", "--pulses", "20000"});
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0][0] == "distance_km");
  CHECK(rows[0][2] == "key_rate_bits_per_pulse");
  double prev = 1.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double rate = std::stod(rows[i][2]);
    CHECK(rate < prev);
    prev = rate;
  }
  CHECK(std::stod(rows[2][1]) == doctest::Approx(0.25).epsilon(1e-4));
  CHECK(std::stod(rows[2][2]) == doctest::Approx(3.1e-4).epsilon(0.2));
  CHECK(r.err.find("BER") != std::string::npos);
}

TEST_CASE("histogram subcommand") {
  const auto r = cli({"histogram", "--pulses", "2000", "--mu", "1"});
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(r.out);
  CHECK(rows[0] == std::vector<std::string>{"time_bin_seconds", "counts"});
  long total = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) total += std::stol(rows[i][1]);
  CHECK(total > 0);
}

TEST_CASE("chat over TCP") {
  const std::string ep = "127.0.0.1:47393";
  Run alice{};
  std::thread t([&] { alice = cli({"chat", "--role", "alice", "--listen", ep, "--message", "meet at the usual place at nine"}); });
  const auto bob = cli({"chat", "--role", "bob", "--connect", ep});
  t.join();
  CHECK(alice.code == 0);
  CHECK(bob.code == 0);
  CHECK(bob.out.find("message: meet at the usual place at nine\n") != std::string::npos);
  const auto cipher_line = [](const std::string& s) {
    const auto p = s.find("ciphertext: ");
    return s.substr(p, s.find('\n', p) - p);
  };
  CHECK(cipher_line(alice.out) == cipher_line(bob.out));
}

TEST_CASE("chat aborts cleanly on a dropped link") {
  const std::string ep = "127.0.0.1:47394";
  Run alice{};
  std::thread t([&] {
    alice = cli({"chat", "--role", "alice", "--listen", ep, "--message", "hello", "--drop-after-frames", "3"});
  });
  const auto bob = cli({"chat", "--role", "bob", "--connect", ep});
  t.join();
  CHECK(alice.code == 3);
  CHECK(bob.code == 3);
  CHECK(bob.out.find("no key used") != std::string::npos);
  CHECK(bob.out.find("message:") == std::string::npos);
}
