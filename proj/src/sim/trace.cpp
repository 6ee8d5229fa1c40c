#include "raceplan/sim/trace.hpp"

#include <fstream>

#include "raceplan/csv.hpp"
#include "raceplan/errors.hpp"

namespace raceplan::sim {

std::string format_trace(const std::vector<TraceRecord>& trace) {
  std::string out(kTraceHeader);
  out += '\n';
  for (const auto& r : trace) {
    out += csv::format_double(r.t) + ',' + csv::format_double(r.ego_s) + ',' + csv::format_double(r.ego_l) + ',' +
           csv::format_double(r.ego_v) + ',' + r.primitive + ',' + std::to_string(r.n_candidates) + ',' +
           csv::format_double(r.cycle_ms) + ',';
    if (r.lead_s) out += csv::format_double(*r.lead_s);
    out += ',';
    if (r.lead_l) out += csv::format_double(*r.lead_l);
    out += '\n';
  }
  return out;
}

std::vector<TraceRecord> parse_trace(std::string_view text, const std::string& source) {
  const auto t = csv::parse(text, source);
  std::string header;
  for (std::size_t i = 0; i < t.header.size(); ++i) header += (i ? "," : "") + t.header[i];
  if (header != kTraceHeader) throw ParseError(source, 1, "unexpected trace header");
  std::vector<TraceRecord> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    const auto& f = row.fields;
    TraceRecord r;
    r.t = t.number(row, 0);
    r.ego_s = t.number(row, 1);
    r.ego_l = t.number(row, 2);
    r.ego_v = t.number(row, 3);
    r.primitive = f[4];
    const double n = t.number(row, 5);
    if (n < 0.0 || n != static_cast<int>(n)) throw ParseError(source, row.line, "n_candidates must be a count");
    r.n_candidates = static_cast<int>(n);
    r.cycle_ms = t.number(row, 6);
    if (!f[7].empty()) r.lead_s = t.number(row, 7);
    if (!f[8].empty()) r.lead_l = t.number(row, 8);
    out.push_back(std::move(r));
  }
  return out;
}

void write_trace(const std::vector<TraceRecord>& trace, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  f << format_trace(trace);
}

std::vector<TraceRecord> read_trace(const std::filesystem::path& path) {
  return parse_trace(csv::read_file(path), path.string());
}

}  // namespace raceplan::sim
