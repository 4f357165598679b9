#include "netrl/tracer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace netrl {
namespace {

constexpr const char* kTraceMagic = "netrl-trace";
constexpr int kTraceVersion = 1;

std::uint64_t parse_u64(std::string_view s, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw TraceFormatError("line " + std::to_string(line) + ": bad integer '" + std::string(s) +
                           "'");
  }
  return v;
}

}  // namespace

double latency_ms(Timestamp send_ts, Timestamp recv_ts) {
  const auto diff = static_cast<std::int64_t>(recv_ts.micros - send_ts.micros);
  return static_cast<double>(diff) / 1000.0;
}

const LatencySample& LatencyTrace::record(Timestamp send_ts, Timestamp recv_ts, SeqNum seq) {
  rows_.push_back({false, samples_.size()});
  samples_.push_back({seq, send_ts, recv_ts, latency_ms(send_ts, recv_ts)});
  return samples_.back();
}

void LatencyTrace::record_drop(Timestamp send_ts, SeqNum seq) {
  rows_.push_back({true, drops_.size()});
  drops_.push_back({seq, send_ts});
}

void LatencyTrace::append_realized(std::span<const RealizedRecord> records) {
  for (const auto& r : records) {
    if (r.dropped()) {
      record_drop(r.submitted, r.seq);
    } else {
      const auto delay_us = static_cast<std::uint64_t>(std::llround(*r.delay_ms * 1000.0));
      record(r.submitted, Timestamp{r.submitted.micros + delay_us}, r.seq);
    }
  }
}

std::vector<double> LatencyTrace::latencies_ms() const {
  std::vector<double> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.latency_ms);
  return out;
}

TraceSummary LatencyTrace::summary() const { return summarize(latencies_ms(), drops_.size()); }

double percentile(std::span<const double> samples, double q) {
  if (samples.empty()) throw EmptyTraceError();
  if (!(q >= 0.0 && q <= 100.0)) throw std::invalid_argument("percentile q must lie in [0, 100]");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * n));
  if (rank == 0) rank = 1;
  return sorted[std::min(rank, sorted.size()) - 1];
}

TraceSummary summarize(std::span<const double> latencies, std::size_t dropped) {
  TraceSummary s;
  s.count = latencies.size();
  s.dropped = dropped;
  const std::size_t total = s.count + dropped;
  s.loss_rate = total == 0 ? 0.0 : static_cast<double>(dropped) / static_cast<double>(total);
  if (latencies.empty()) return s;

  double sum = 0.0;
  for (double v : latencies) sum += v;
  s.mean_ms = sum / static_cast<double>(s.count);
  double ss = 0.0;
  for (double v : latencies) ss += (v - s.mean_ms) * (v - s.mean_ms);
  s.std_ms = std::sqrt(ss / static_cast<double>(s.count));
  s.p50_ms = percentile(latencies, 50.0);
  s.p95_ms = percentile(latencies, 95.0);
  return s;
}

void export_trace(const LatencyTrace& trace, const std::filesystem::path& path) {
  if (trace.empty()) throw ExportError("refusing to export an empty trace");
  std::ofstream out(path);
  if (!out) throw ExportError("cannot open " + path.string() + " for writing");
  out << kTraceMagic << " v" << kTraceVersion << " delivered=" << trace.samples_.size()
      << " dropped=" << trace.drops_.size() << '\n';
  for (const auto& row : trace.rows_) {
    if (row.dropped) {
      const auto& d = trace.drops_[row.index];
      out << d.seq.value << ',' << d.send_ts.micros << ",DROPPED\n";
    } else {
      const auto& s = trace.samples_[row.index];
      out << s.seq.value << ',' << s.send_ts.micros << ',' << s.recv_ts.micros << '\n';
    }
  }
  if (!out) throw ExportError("write failed for " + path.string());
}

LatencyTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TraceFormatError("cannot open " + path.string());

  std::string header;
  if (!std::getline(in, header)) throw TraceFormatError("missing header");
  std::istringstream hs(header);
  std::string magic, version, delivered_kv, dropped_kv;
  hs >> magic >> version >> delivered_kv >> dropped_kv;
  if (magic != kTraceMagic) throw TraceFormatError("not a trace file");
  if (version != "v" + std::to_string(kTraceVersion)) {
    throw TraceFormatError("unsupported trace version " + version);
  }
  if (delivered_kv.rfind("delivered=", 0) != 0 || dropped_kv.rfind("dropped=", 0) != 0) {
    throw TraceFormatError("malformed header");
  }
  const auto want_delivered = parse_u64(std::string_view(delivered_kv).substr(10), 1);
  const auto want_dropped = parse_u64(std::string_view(dropped_kv).substr(8), 1);

  LatencyTrace trace;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos) {
      throw TraceFormatError("line " + std::to_string(line_no) + ": expected three fields");
    }
    const std::string_view sv(line);
    const auto seq = parse_u64(sv.substr(0, c1), line_no);
    const auto send = parse_u64(sv.substr(c1 + 1, c2 - c1 - 1), line_no);
    const auto tail = sv.substr(c2 + 1);
    if (seq > 0xffffffffULL) throw TraceFormatError("sequence number out of range");
    const SeqNum sn{static_cast<std::uint32_t>(seq)};
    if (tail == "DROPPED") {
      trace.record_drop(Timestamp{send}, sn);
    } else {
      trace.record(Timestamp{send}, Timestamp{parse_u64(tail, line_no)}, sn);
    }
  }
  if (trace.samples().size() != want_delivered || trace.drops().size() != want_dropped) {
    throw TraceFormatError("record counts do not match header");
  }
  return trace;
}

TraceModel to_trace_model(const LatencyTrace& trace) {
  TraceModel model;
  model.delays_ms = trace.latencies_ms();
  const auto s = trace.summary();
  model.p_loss = s.loss_rate;
  if (model.delays_ms.empty()) throw TraceFormatError("trace has no delivered samples");
  return model;
}

TraceModel load_trace(const std::filesystem::path& path) { return to_trace_model(read_trace(path)); }

}  // namespace netrl
