#include "synth/trajectory.hpp"

#include <cstdio>

namespace synth {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

const char* TrajectoryLog::header() {
  return "elapsed_s,iteration,phase,temperature,c_score,psi_score,best_psi,program_len";
}

void TrajectoryLog::write_csv(std::ostream& out, const std::string& manifest_id) const {
  out << "# manifest " << manifest_id << "\n" << header() << "\n";
  for (const TrajectoryRow& r : rows_) {
    out << format_double(r.elapsed_s) << ',' << r.iteration << ',' << r.phase << ',';
    if (r.temperature) out << format_double(*r.temperature);
    out << ',';
    if (r.c_score) out << format_double(*r.c_score);
    out << ',';
    if (r.psi_score) out << format_double(*r.psi_score);
    out << ',' << format_double(r.best_psi) << ',' << r.program_len << "\n";
  }
}

}  // namespace synth
