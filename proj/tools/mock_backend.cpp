// Line-protocol server around MockBackend, with optional fault injection for
// exercising the subprocess adapter.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include "corpusforge/backend.hpp"
#include "corpusforge/error.hpp"

using namespace corpusforge;
using namespace corpusforge::backend;

int main(int argc, char** argv) {
  CLI::App app{"Deterministic mock model backend speaking the corpusforge line protocol"};
  std::uint64_t seed = 0;
  long malformed_after = -1, crash_after = -1, hang_after = -1, orphan_after = -1;
  int delay_ms = 0;
  std::string capabilities = "VAD,TRANSCRIBE,ALIGN";
  bool no_handshake = false;
  app.add_option("--seed", seed, "Generator seed");
  app.add_option("--capabilities", capabilities, "Advertised ops, comma separated");
  app.add_option("--delay-ms", delay_ms, "Sleep before each response");
  app.add_option("--malformed-after", malformed_after, "Emit a garbage line instead of response N+1");
  app.add_option("--crash-after", crash_after, "Exit without answering request N+1");
  app.add_option("--hang-after", hang_after, "Stop answering after N requests");
  app.add_option("--orphan-after", orphan_after, "Answer request N+1 with an id nobody asked for");
  app.add_flag("--no-handshake", no_handshake, "Start without a hello line");
  CLI11_PARSE(app, argc, argv);

  MockBackend mock(seed);
  Handshake hello = mock.handshake();
  hello.capabilities.clear();
  for (std::size_t pos = 0; pos <= capabilities.size();) {
    auto comma = capabilities.find(',', pos);
    if (comma == std::string::npos) comma = capabilities.size();
    if (auto op = op_from_string(capabilities.substr(pos, comma - pos))) hello.capabilities.push_back(*op);
    pos = comma + 1;
  }

  std::ios::sync_with_stdio(false);
  if (!no_handshake) std::cout << encode_handshake(hello) << '\n' << std::flush;

  long served = 0;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    if (served == crash_after) std::_Exit(1);
    if (served == hang_after) {
      for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
    }
    if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
    if (served == malformed_after) {
      std::cout << "{\"protocol_version\": 1, \"id\": oops\n" << std::flush;
      ++served;
      continue;
    }
    std::uint64_t id = 0;
    try {
      auto request = decode_request(line);
      id = request.id;
      if (!hello.supports(request.op))
        raise(ErrorCode::ProtocolViolation, "op " + std::string(to_string(request.op)) + " not advertised");
      auto response = mock.call(request);
      response.id = served == orphan_after ? id + 1000000 : id;
      std::cout << encode_response(response) << '\n';
    } catch (const Error& e) {
      std::cout << encode_failure({id, std::string(to_string(e.code())), e.what()}) << '\n';
    }
    std::cout << std::flush;
    ++served;
  }
  return 0;
}
