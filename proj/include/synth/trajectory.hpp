#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace synth {

// One row of the frozen trajectory CSV schema:
// elapsed_s,iteration,phase,temperature,c_score,psi_score,best_psi,program_len
struct TrajectoryRow {
  double elapsed_s = 0.0;
  int64_t iteration = 0;
  std::string phase;
  std::optional<double> temperature;
  std::optional<double> c_score;
  std::optional<double> psi_score;
  double best_psi = 0.0;
  int program_len = 0;
};

class TrajectoryLog {
 public:
  void append(TrajectoryRow row) { rows_.push_back(std::move(row)); }
  const std::vector<TrajectoryRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }

  static const char* header();
  // manifest_id "-" for runs outside the CLI
  void write_csv(std::ostream& out, const std::string& manifest_id) const;

 private:
  std::vector<TrajectoryRow> rows_;
};

std::string format_double(double v);

}  // namespace synth
