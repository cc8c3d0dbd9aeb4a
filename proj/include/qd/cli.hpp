#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qd/models.hpp"
#include "qd/procedures.hpp"

namespace qd::cli {

// Runs one command line (without the program name) and returns the process
// exit status: 0 on success, 2 for invalid input, 3 for numerical failure.
// Reports go to `out`; one-line diagnostics go to `err`; `in` stands in for
// standard input when a subcommand reads an observation stream from "-".
int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err, std::istream& in);

// Online detection over a newline-delimited stream of observation values.
// Lines are consumed one at a time and reading stops at the alarm, so no
// value past the stopping index is ever extracted; horizon 0 means "until
// the stream ends".  Malformed lines are domain errors naming the line.
struct StreamDetection {
  bool alarm = false;
  long stopping_time = -1;  // -1 when censored (horizon or end of stream)
  long n_consumed = 0;
  std::optional<double> statistic;  // last statistic value, if any step ran
  std::vector<double> trajectory;   // filled when keep_trajectory is set
};

StreamDetection detect_stream(const procedures::Procedure& proc,
                              const models::Model& model, std::istream& in,
                              long horizon, double start,
                              bool keep_trajectory);

}  // namespace qd::cli
