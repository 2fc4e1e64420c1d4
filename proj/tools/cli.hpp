#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "dergame/game.hpp"

namespace dergame::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kOutEnv = "DERGAME_OUT";

enum Exit { kOk = 0, kPartial = 1, kInvalid = 2 };

struct RunOptions {
  std::string base;                  // scenario name under the data dir, or a path
  std::vector<std::string> ids;      // empty: the whole (filtered) matrix
  MatrixFilter filter;
  std::string out;                   // empty: $DERGAME_OUT, else "results"
  int jobs = 1;
  bool trace = false;
};

std::string resolve_base(const std::string& base);
std::string default_out();

nlohmann::json result_json(const Scenario& s, const GameOutcome& o, bool trace);
// One summary row per result, in the fixed column order of summary_header().
std::string summary_header();
std::string summary_row(const nlohmann::json& r);

int cmd_run(const RunOptions& opt, std::ostream& log, std::ostream& err);
int cmd_report(const std::string& in, const std::string& out, std::ostream& log, std::ostream& err);
int cmd_validate(const std::string& path, std::ostream& log, std::ostream& err);

}  // namespace dergame::cli
