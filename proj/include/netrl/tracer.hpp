#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "netrl/netshim.hpp"
#include "netrl/wire.hpp"

namespace netrl {

class EmptyTraceError : public std::invalid_argument {
 public:
  EmptyTraceError() : std::invalid_argument("no latency samples") {}
};

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ExportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LatencySample {
  SeqNum seq;
  Timestamp send_ts;
  Timestamp recv_ts;
  // Signed: cross-host clocks may put recv before send.
  double latency_ms = 0.0;
};

struct DroppedSample {
  SeqNum seq;
  Timestamp send_ts;
};

struct TraceSummary {
  std::size_t count = 0;  // delivered samples
  std::size_t dropped = 0;
  double mean_ms = 0.0;
  double std_ms = 0.0;  // population std
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double loss_rate = 0.0;
};

// Single-recorder log of per-message one-way latencies.
class LatencyTrace {
 public:
  const LatencySample& record(Timestamp send_ts, Timestamp recv_ts, SeqNum seq);
  void record_drop(Timestamp send_ts, SeqNum seq);

  // Appends a shim's realized log (delivered at submit + rounded delay).
  void append_realized(std::span<const RealizedRecord> records);

  const std::vector<LatencySample>& samples() const { return samples_; }
  const std::vector<DroppedSample>& drops() const { return drops_; }
  std::vector<double> latencies_ms() const;
  bool empty() const { return samples_.empty() && drops_.empty(); }

  TraceSummary summary() const;

 private:
  struct Row {
    bool dropped;
    std::size_t index;
  };
  friend void export_trace(const LatencyTrace&, const std::filesystem::path&);
  std::vector<LatencySample> samples_;
  std::vector<DroppedSample> drops_;
  std::vector<Row> rows_;  // insertion order across both lists
};

double latency_ms(Timestamp send_ts, Timestamp recv_ts);

// Nearest-rank percentile: element ceil(q/100 * n) - 1 of the sorted samples.
double percentile(std::span<const double> samples, double q);

TraceSummary summarize(std::span<const double> latencies_ms, std::size_t dropped);

// Text format: a header line, then one "seq,send_us,recv_us" or
// "seq,send_us,DROPPED" record per line.
void export_trace(const LatencyTrace& trace, const std::filesystem::path& path);
LatencyTrace read_trace(const std::filesystem::path& path);
TraceModel load_trace(const std::filesystem::path& path);
TraceModel to_trace_model(const LatencyTrace& trace);

}  // namespace netrl
