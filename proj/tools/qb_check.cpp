// Linearizability check of a history dump.
// Exit status: 0 linearizable, 1 not linearizable, 2 unreadable or malformed.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "quadboost/checker/history.hpp"
#include "quadboost/checker/linearizability.hpp"

int main(int argc, char** argv) {
  using namespace quadboost::checker;

  CLI::App app{"check a recorded history for linearizability"};
  std::string path = "-";
  std::size_t max_states = 0;
  bool quiet = false;
  app.add_option("history", path, "history dump, or - for stdin")->capture_default_str();
  app.add_option("--max-states", max_states, "search budget, 0 for unbounded")
      ->capture_default_str();
  app.add_flag("-q,--quiet", quiet, "print nothing, report through the exit status");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::vector<HistoryEvent> events;
  CheckResult result;
  try {
    if (path == "-") {
      events = read_history(std::cin);
    } else {
      std::ifstream in(path);
      if (!in) {
        std::cerr << "cannot open " << path << '\n';
        return 2;
      }
      events = read_history(in);
    }
    result = check_history(events, {}, CheckOptions{max_states});
  } catch (const std::invalid_argument& e) {
    std::cerr << "malformed history: " << e.what() << '\n';
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "inconclusive: " << e.what() << '\n';
    return 2;
  }
  if (!quiet) {
    std::cout << (result.linearizable ? "linearizable" : "NOT linearizable") << ": "
              << result.events << " events, " << result.states << " states explored";
    if (!result.linearizable) std::cout << ", longest legal prefix " << result.deepest;
    std::cout << '\n';
  }
  return result.linearizable ? 0 : 1;
}
