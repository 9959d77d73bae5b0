// Acceptance checks 1-10.
//   acceptance <sim> <unit_tests> [--known-infeasible N]...
// Prints one PASS/FAIL line per criterion. Exits non-zero if any criterion
// fails, except those listed as known infeasible (still printed as FAIL).

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "edcasim/analytic_oracle.hpp"
#include "edcasim/runner.hpp"
#include "edcasim/simulation.hpp"
#include "oracles/bianchi_oracle.hpp"
#include "oracles/quantile_oracle.hpp"

using namespace edcasim;
namespace fs = std::filesystem;

namespace {

const std::vector<std::uint64_t> kSeeds = {1, 2, 3, 4, 5};

struct Result {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [" << what << "]";
    }
  }
};

std::string f2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

int shell(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// Runs `scenario` for each seed concurrently.
template <typename T>
std::vector<T> per_seed(const std::function<T(std::uint64_t)>& job) {
  std::vector<std::future<T>> futures;
  for (auto seed : kSeeds) futures.push_back(std::async(std::launch::async, job, seed));
  std::vector<T> out;
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

double mean_of(const std::vector<RunSummary>& runs, std::int32_t flow_id) {
  double sum = 0;
  for (const auto& r : runs) sum += r.flow(flow_id).throughput_Bps;
  return sum / static_cast<double>(runs.size());
}

double mean_loss(const std::vector<RunSummary>& runs) {
  double sum = 0;
  for (const auto& r : runs) sum += static_cast<double>(r.total_dropped());
  return sum / static_cast<double>(runs.size());
}

Result determinism(const std::string& sim) {
  Result r;
  const fs::path base = fs::temp_directory_path() / "edcasim-acceptance-det";
  fs::remove_all(base);
  for (const char* preset : {"A", "C"}) {
    const fs::path one = base / preset / "1", two = base / preset / "2";
    for (const auto& dir : {one, two}) {
      const std::string cmd = "'" + sim + "' run --scenario " + preset + " --seed 11 --trace --out '" +
                              dir.string() + "' > /dev/null";
      r.require(shell(cmd) == 0, std::string("sim run failed for ") + preset);
    }
    int files = 0;
    for (const auto& entry : fs::directory_iterator(one)) {
      const auto name = entry.path().filename();
      const bool same = fs::exists(two / name) &&
                        sha256_hex(read_file(one / name)) == sha256_hex(read_file(two / name));
      r.require(same, std::string(preset) + "/" + name.string() + " differs");
      ++files;
    }
    r.require(files == 5, std::string(preset) + ": expected 5 output files");
  }
  r.detail << " presets A,C seed 11, 5 files each";
  fs::remove_all(base);
  return r;
}

Result conservation(const std::map<std::string, std::vector<RunSummary>>& runs,
                    const std::vector<std::string>& audit_errors) {
  Result r;
  for (const auto& e : audit_errors) r.require(false, e);
  std::size_t checked = 0;
  for (const auto& [name, list] : runs) {
    for (const auto& s : list) {
      for (const auto& f : s.flows) {
        ++checked;
        r.require(f.generated == f.delivered + f.dropped_total() + f.in_flight,
                  name + " seed " + std::to_string(s.seed) + " flow " + std::to_string(f.flow_id));
      }
    }
  }
  r.detail << " " << checked << " flow/seed identities";
  return r;
}

Result dcf_equivalence() {
  Result r;
  const AcParams dcf = dcf_mode_params();
  const double w = dcf.cw_min + 1.0;
  std::uint32_t m = 0;
  while (((dcf.cw_min + 1u) << m) < dcf.cw_max + 1u) ++m;
  std::vector<std::future<DcfValidation>> jobs;
  for (std::uint32_t n : {5u, 10u, 20u}) {
    jobs.push_back(std::async(std::launch::async, [n] { return validate_dcf(n, 800, 1, 60.0); }));
  }
  for (auto& j : jobs) {
    const auto v = j.get();
    const double tau_ref = ::oracle::grid_scan_tau(v.n_stations, w, m);
    r.require(std::abs(v.tau - tau_ref) < 1e-9, "tau disagrees with grid scan for n=" + std::to_string(v.n_stations));
    r.require(v.relative_error <= 0.10, "n=" + std::to_string(v.n_stations) + " off by " + f2(v.relative_error));
    r.detail << " n=" << v.n_stations << ": sim " << f2(v.simulated_bps) << " vs " << f2(v.analytic_bps)
             << " bps (err " << f2(v.relative_error * 100) << "%)";
  }
  return r;
}

Result static_differentiation(const std::vector<RunSummary>& saturated) {
  Result r;
  for (const auto& s : saturated) {
    const double t1 = s.flow(1).throughput_Bps, t2 = s.flow(2).throughput_Bps,
                 t3 = s.flow(3).throughput_Bps, t4 = s.flow(4).throughput_Bps;
    const std::string seed = "seed " + std::to_string(s.seed);
    r.require(t1 > t2 && t2 > t3 && t3 > t4, seed + " order " + f2(t1) + " " + f2(t2) + " " + f2(t3) + " " + f2(t4));
    const double di = differentiation_index(t1, t4);
    r.require(di >= 0.5, seed + " DI " + f2(di));
  }
  r.detail << " mean B/s F1..F4: " << f2(mean_of(saturated, 1)) << " " << f2(mean_of(saturated, 2)) << " "
           << f2(mean_of(saturated, 3)) << " " << f2(mean_of(saturated, 4));
  return r;
}

Result static_low_loss(const std::vector<RunSummary>& nominal) {
  Result r;
  for (const auto& s : nominal) {
    const double frac = static_cast<double>(s.total_dropped()) / static_cast<double>(s.total_generated());
    r.require(frac < 0.005, "seed " + std::to_string(s.seed) + " loss " + f2(frac));
    r.detail << " seed " << s.seed << ": " << s.total_dropped() << "/" << s.total_generated();
  }
  return r;
}

Result mobility_degradation(const std::vector<RunSummary>& a, const std::vector<RunSummary>& b) {
  Result r;
  for (std::int32_t f = 1; f <= 4; ++f) {
    const double ma = mean_of(a, f), mb = mean_of(b, f);
    r.require(mb < ma, "F" + std::to_string(f) + " " + f2(mb) + " >= " + f2(ma));
    r.detail << " F" << f << " " << f2(mb) << "<" << f2(ma);
  }
  const double la = mean_loss(a), lb = mean_loss(b);
  r.require(lb >= 50.0 * la && lb > 0.0, "loss " + f2(lb) + " vs " + f2(la));
  r.detail << "; mean loss B " << f2(lb) << " vs A " << f2(la);
  return r;
}

struct RoamingRun {
  std::uint64_t seed = 0;
  std::vector<RoamingEvent> log;
  std::map<NodeId, std::vector<SimTime>> unassociated_drops;  // by dropping station
  std::vector<std::uint64_t> f1_bins;
  SimTime series_start, bin_width;
};

Result roaming(const std::vector<RoamingRun>& runs, double f1_static_mean, SimTime end) {
  Result r;
  std::size_t gaps = 0, recoveries = 0;
  for (const auto& run : runs) {
    const std::string seed = "seed " + std::to_string(run.seed);
    std::map<NodeId, int> disassociations;
    std::map<NodeId, SimTime> gap_start;
    for (const auto& e : run.log) {
      if (e.kind == RoamingEvent::Kind::Disassociated) {
        ++disassociations[e.station];
        gap_start[e.station] = e.time;
      } else if (e.kind == RoamingEvent::Kind::Associated) {
        if (auto it = gap_start.find(e.station); it != gap_start.end()) {
          const auto& drops = run.unassociated_drops.count(e.station) ? run.unassociated_drops.at(e.station)
                                                                      : std::vector<SimTime>{};
          const bool any = std::any_of(drops.begin(), drops.end(),
                                       [&](SimTime t) { return t >= it->second && t <= e.time; });
          r.require(any, seed + " station " + std::to_string(e.station) + " gap without drops");
          ++gaps;
          gap_start.erase(it);
        }
        if (e.station == 1 && e.bs == 101) {
          // Full 1 s bins inside (association, association + 5 s].
          bool recovered = false;
          for (std::size_t i = 0; i < run.f1_bins.size(); ++i) {
            const SimTime b0 = run.series_start + run.bin_width * i, b1 = b0 + run.bin_width;
            if (b0 < e.time || b1 > e.time + SimTime::seconds(5.0) || b1 > end) continue;
            const double rate = static_cast<double>(run.f1_bins[i]) / run.bin_width.seconds();
            if (rate >= 0.8 * f1_static_mean) recovered = true;
          }
          r.require(recovered, seed + " F1 no recovery after " + f2(e.time.seconds()) + " s");
          ++recoveries;
        }
      }
    }
    for (NodeId id = 1; id <= 4; ++id) {
      r.require(disassociations[id] >= 2, seed + " station " + std::to_string(id) + " disassociated " +
                                              std::to_string(disassociations[id]) + "x");
    }
  }
  r.require(gaps > 0 && recoveries > 0, "no gap traversals observed");
  r.detail << " " << gaps << " gap traversals, " << recoveries << " F1 handshakes at BS 101";
  return r;
}

Result delay_ordering(const std::vector<RunSummary>& saturated) {
  Result r;
  for (const auto& s : saturated) {
    const std::string seed = "seed " + std::to_string(s.seed);
    std::vector<std::uint64_t> med;
    for (std::int32_t f = 1; f <= 4; ++f) med.push_back(s.flow(f).delay_p50_us.value_or(~0ull));
    r.require(std::is_sorted(med.begin(), med.end()), seed + " medians " + std::to_string(med[0]) + " " +
                                                          std::to_string(med[1]) + " " + std::to_string(med[2]) +
                                                          " " + std::to_string(med[3]));
    r.require(s.flow(4).delay_p99_us.value_or(0) > s.flow(1).delay_p99_us.value_or(~0ull), seed + " p99");
  }
  const auto& s = saturated.front();
  r.detail << " seed 1 p50 us: " << *s.flow(1).delay_p50_us << " " << *s.flow(2).delay_p50_us << " "
           << *s.flow(3).delay_p50_us << " " << *s.flow(4).delay_p50_us;
  return r;
}

Result mac_properties(const std::string& unit_tests) {
  Result r;
  const int rc = shell("'" + unit_tests + "' -ts=mac-properties -nv > /dev/null 2>&1");
  r.require(rc == 0, "property suite exit code " + std::to_string(rc));
  r.detail << " unit_tests -ts=mac-properties";
  return r;
}

Result metrics_kernels() {
  Result r;
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<std::uint64_t> value(0, 5'000'000);
  std::vector<SimTime> samples;
  for (int i = 0; i < 10'000; ++i) samples.push_back(SimTime(value(gen)));
  int mismatches = 0;
  for (int k = 1; k <= 1000; ++k) {
    const double q = k / 1000.0;
    if (delay_quantile(samples, q)->us() != ::oracle::nearest_rank_by_count(samples, q)) ++mismatches;
  }
  r.require(mismatches == 0, std::to_string(mismatches) + " quantile mismatches");
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> size(1, 400);
    std::uniform_int_distribution<std::uint64_t> small(0, 50);
    std::vector<SimTime> xs(static_cast<std::size_t>(size(gen)));
    for (auto& x : xs) x = SimTime(small(gen));
    const auto pts = DelayCdf(xs).points();
    bool ok = !pts.empty() && pts.back().second == 1.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      ok = ok && pts[i].first > pts[i - 1].first && pts[i].second > pts[i - 1].second;
    }
    for (const auto& [d, frac] : pts) {
      const auto below = std::count_if(xs.begin(), xs.end(), [d = d](SimTime x) { return x <= d; });
      ok = ok && frac == static_cast<double>(below) / static_cast<double>(xs.size());
    }
    r.require(ok, "CDF not monotone in trial " + std::to_string(trial));
  }
  r.detail << " 1000 quantiles on 10^4 samples, 200 random CDFs";
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <sim> <unit_tests>\n";
    return 2;
  }
  const std::string sim = argv[1], unit_tests = argv[2];
  std::set<std::size_t> known_infeasible;
  for (int i = 3; i + 1 < argc; i += 2) {
    if (std::string(argv[i]) == "--known-infeasible") known_infeasible.insert(std::stoul(argv[i + 1]));
  }

  std::vector<std::string> audit_errors;
  std::mutex audit_mutex;
  auto guarded = [&](const Scenario& sc) {
    return [&, sc](std::uint64_t seed) {
      try {
        return run_summary(sc, seed);
      } catch (const AuditError& e) {
        std::lock_guard lock(audit_mutex);
        audit_errors.push_back(sc.name + " seed " + std::to_string(seed) + ": " + e.what());
        return RunSummary{};
      }
    };
  };

  Scenario saturated_a = preset("A");
  saturated_a.load_multiplier = 2.5;
  const auto runs_a = per_seed<RunSummary>(guarded(preset("A")));
  const auto runs_b = per_seed<RunSummary>(guarded(preset("B")));
  const auto runs_sat = per_seed<RunSummary>(guarded(saturated_a));

  const Scenario c = preset("C");
  std::vector<RunSummary> runs_c;
  std::vector<RoamingRun> roaming_runs = per_seed<RoamingRun>([&](std::uint64_t seed) {
    RoamingRun out;
    out.seed = seed;
    Simulation s(c, seed);
    s.set_observer([&](const FrameEvent& ev) {
      if (ev.kind == FrameEventKind::Dropped && ev.reason == DropReason::Unassociated && ev.flow_id >= 0) {
        out.unassociated_drops[ev.station].push_back(ev.time);
      }
    });
    try {
      s.run();
    } catch (const AuditError& e) {
      std::lock_guard lock(audit_mutex);
      audit_errors.push_back("C seed " + std::to_string(seed) + ": " + e.what());
    }
    out.log = s.roaming_log();
    out.f1_bins = s.metrics().series().bins(1);
    out.series_start = s.metrics().series().start();
    out.bin_width = s.metrics().series().bin_width();
    return out;
  });
  for (auto seed : kSeeds) runs_c.push_back(run_summary(c, seed));

  const std::vector<std::pair<const char*, std::function<Result()>>> criteria = {
      {"determinism", [&] { return determinism(sim); }},
      {"conservation", [&] { return conservation({{"A", runs_a}, {"B", runs_b}, {"C", runs_c}}, audit_errors); }},
      {"dcf-analytic-equivalence", [&] { return dcf_equivalence(); }},
      {"static-differentiation", [&] { return static_differentiation(runs_sat); }},
      {"static-low-loss", [&] { return static_low_loss(runs_a); }},
      {"mobility-degradation", [&] { return mobility_degradation(runs_a, runs_b); }},
      {"roaming", [&] { return roaming(roaming_runs, mean_of(runs_a, 1), c.duration()); }},
      {"delay-ordering", [&] { return delay_ordering(runs_sat); }},
      {"mac-properties", [&] { return mac_properties(unit_tests); }},
      {"metrics-kernels", [&] { return metrics_kernels(); }},
  };

  int failures = 0, tolerated = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail << " exception: " << e.what();
    }
    const bool tolerate = !r.pass && known_infeasible.count(i + 1);
    if (tolerate) {
      ++tolerated;
    } else if (!r.pass) {
      ++failures;
    }
    std::cout << (r.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ":"
              << r.detail.str() << (tolerate ? " (known infeasible, see README)" : "") << "\n";
  }
  std::cout << (criteria.size() - failures - tolerated) << "/" << criteria.size() << " criteria passed";
  if (tolerated) std::cout << ", " << tolerated << " known infeasible";
  std::cout << "\n";
  return failures == 0 ? 0 : 1;
}
