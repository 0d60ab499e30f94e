#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace embodepth::cli {

struct Globals {
  unsigned jobs = 0;  // 0 = hardware threads
  bool strict = false;
};

// Exit status: 0 when every requested artifact was written, 1 on runtime
// failure, 2 on usage or configuration errors.
int cmd_compute(const RunConfig& c, const Globals& g, std::ostream& out, std::ostream& err);
int cmd_evaluate(const RunConfig& c, const Globals& g, std::ostream& out, std::ostream& err);
int cmd_describe(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_synth(const RunConfig& c, const std::vector<std::string>& names, std::ostream& out,
              std::ostream& err);
int cmd_report(const std::vector<std::string>& inputs, const std::string& region,
               const std::string& csv_path, std::ostream& out, std::ostream& err);

// Parses argv and dispatches.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Output path for one stage of one frame, without extension.
std::string stage_path(const std::string& output_dir, Stage stage, const std::string& stem);

}  // namespace embodepth::cli
