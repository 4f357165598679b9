#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "netrl/tracer.hpp"

using namespace netrl;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "netrl-tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("tracer") {

TEST_CASE("nearest-rank percentile on small hand cases") {
  const std::vector<double> v{15, 20, 35, 40, 50};
  CHECK(percentile(v, 5) == 15);
  CHECK(percentile(v, 30) == 20);
  CHECK(percentile(v, 40) == 20);
  CHECK(percentile(v, 50) == 35);
  CHECK(percentile(v, 100) == 50);
  CHECK(percentile(v, 0) == 15);
  CHECK_THROWS_AS(percentile(std::vector<double>{}, 50), EmptyTraceError);
  CHECK_THROWS_AS(percentile(v, 101), std::invalid_argument);
}

TEST_CASE("record computes signed one-way latency") {
  LatencyTrace t;
  CHECK(t.record(Timestamp{1000}, Timestamp{4500}, SeqNum{0}).latency_ms == doctest::Approx(3.5));
  CHECK(t.record(Timestamp{5000}, Timestamp{4000}, SeqNum{1}).latency_ms == doctest::Approx(-1.0));
  t.record_drop(Timestamp{6000}, SeqNum{2});
  const auto s = t.summary();
  CHECK(s.count == 2);
  CHECK(s.dropped == 1);
  CHECK(s.loss_rate == doctest::Approx(1.0 / 3.0));
  CHECK(s.mean_ms == doctest::Approx(1.25));
  CHECK(s.std_ms == doctest::Approx(2.25));
}

TEST_CASE("export and read round-trip preserves order and drops") {
  LatencyTrace t;
  for (std::uint32_t i = 0; i < 50; ++i) {
    if (i % 7 == 3) {
      t.record_drop(Timestamp{i * 20000ULL}, SeqNum{i});
    } else {
      t.record(Timestamp{i * 20000ULL}, Timestamp{i * 20000ULL + 1000 + i * 37}, SeqNum{i});
    }
  }
  const auto path = temp_file("roundtrip.trace");
  export_trace(t, path);
  const auto back = read_trace(path);
  REQUIRE(back.samples().size() == t.samples().size());
  REQUIRE(back.drops().size() == t.drops().size());
  for (std::size_t i = 0; i < t.samples().size(); ++i) {
    CHECK(back.samples()[i].seq == t.samples()[i].seq);
    CHECK(back.samples()[i].latency_ms == t.samples()[i].latency_ms);
  }
  // Re-export is byte-identical.
  const auto again = temp_file("roundtrip2.trace");
  export_trace(back, again);
  std::ifstream a(path), b(again);
  CHECK(std::string(std::istreambuf_iterator<char>(a), {}) ==
        std::string(std::istreambuf_iterator<char>(b), {}));

  const auto model = to_trace_model(back);
  CHECK(model.delays_ms.size() == t.samples().size());
  CHECK(model.p_loss == doctest::Approx(t.drops().size() / 50.0));
}

TEST_CASE("realized shim logs become trace rows") {
  const std::vector<RealizedRecord> log{
      {SeqNum{0}, Timestamp{0}, 12.3456},
      {SeqNum{1}, Timestamp{20000}, std::nullopt},
  };
  LatencyTrace t;
  t.append_realized(log);
  REQUIRE(t.samples().size() == 1);
  CHECK(t.samples()[0].recv_ts.micros == 12346);
  CHECK(t.drops().size() == 1);
}

TEST_CASE("malformed trace files are rejected") {
  const auto path = temp_file("bad.trace");
  {
    std::ofstream(path) << "netrl-trace v1 delivered=2 dropped=0\n0,0,100\n";
  }
  CHECK_THROWS_AS(read_trace(path), TraceFormatError);
  {
    std::ofstream(path) << "something else\n";
  }
  CHECK_THROWS_AS(read_trace(path), TraceFormatError);
  {
    std::ofstream(path) << "netrl-trace v1 delivered=1 dropped=0\n0,abc,100\n";
  }
  CHECK_THROWS_AS(read_trace(path), TraceFormatError);
  CHECK_THROWS_AS(read_trace(temp_file("does-not-exist.trace")), TraceFormatError);
}

TEST_CASE("a trace of only drops has no model") {
  LatencyTrace t;
  t.record_drop(Timestamp{0}, SeqNum{0});
  CHECK_THROWS(to_trace_model(t));
}

TEST_CASE("exporting an empty trace fails") {
  CHECK_THROWS_AS(export_trace(LatencyTrace{}, temp_file("empty.trace")), ExportError);
}

}
