#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace dergame::cli {

namespace {

// Shortest round-trip form, so tables reproduce the result files exactly.
std::string num(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string cell(const json& j) { return j.is_number() ? num(j.get<double>()) : ""; }

json per_node(const Scenario& s, const std::vector<double>& v) {
  json o = json::object();
  for (std::size_t b = 0; b < v.size(); ++b) o[s.network.nodes[b]] = v[b];
  return o;
}

json per_node(const Scenario& s, const std::vector<std::vector<double>>& v) {
  json o = json::object();
  for (std::size_t b = 0; b < v.size(); ++b) o[s.network.nodes[b]] = v[b];
  return o;
}

json residuals(const GameDiagnostics& d) {
  return {{"stationarity", d.kkt.stationarity},
          {"complementarity", d.kkt.complementarity},
          {"feasibility", d.kkt.feasibility},
          {"pair_min_form", d.complementarity.min_form},
          {"pair_sign", d.complementarity.sign}};
}

json stages(const GameDiagnostics& d) {
  json t = json::array();
  for (const auto& r : d.trace)
    t.push_back({{"rho", r.rho}, {"start", r.start}, {"status", to_string(r.status)},
                 {"iterations", r.iterations}, {"objective", r.objective},
                 {"min_form", r.complementarity.min_form}, {"polish", r.polish}});
  return t;
}

bool write_file(const fs::path& p, const std::string& text) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) return false;
    f << text;
    if (!f) return false;
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  return !ec;
}

// Creates the directory and proves it takes a file before anything is solved.
bool writable_dir(const fs::path& dir, std::string& why) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    why = "cannot create output directory '" + dir.string() + "'";
    return false;
  }
  const fs::path probe = dir / ".dergame-probe";
  {
    std::ofstream f(probe);
    if (!f || !(f << "x")) {
      why = "output directory '" + dir.string() + "' is not writable";
      return false;
    }
  }
  fs::remove(probe, ec);
  return true;
}

double mean(const json& a) {
  double t = 0.0;
  for (const auto& v : a) t += v.get<double>();
  return a.empty() ? 0.0 : t / static_cast<double>(a.size());
}

}  // namespace

std::string resolve_base(const std::string& base) {
  if (fs::exists(base)) return base;
  for (const char* ext : {".yaml", ".yml", ""}) {
    const fs::path p = fs::path(DERGAME_DATA_DIR) / (base + ext);
    if (fs::exists(p)) return p.string();
  }
  throw ParseError("unknown scenario base '" + base + "'");
}

std::string default_out() {
  const char* e = std::getenv(kOutEnv);
  return e && *e ? e : "results";
}

json result_json(const Scenario& s, const GameOutcome& o, bool trace) {
  json r;
  r["schema"] = "dergame.result";
  r["schema_version"] = kSchemaVersion;
  r["id"] = s.id;
  r["policy"] = to_string(s.policy);
  r["case"] = to_string(s.info);
  r["stance"] = to_string(s.stance);
  r["carbon"] = s.carbon;
  r["status"] = o.ok() ? "ok" : "failed";
  r["seconds"] = o.seconds;
  r["diagnostics"] = o.diagnostics;
  if (!o.ok()) {
    r["error"] = o.error;
    return r;
  }
  const auto& w = *o.welfare;
  double cap = 0.0;
  for (double g : w.capacity) cap += g;
  r["capacity"] = {{"total", cap}, {"by_node", per_node(s, w.capacity)}};
  r["compensation"] = per_node(s, w.compensation);
  r["tariff"] = {{"peak", w.tariff_peak}, {"offpeak", w.tariff_offpeak}};
  r["welfare"] = {{"consumer_surplus", w.consumer_surplus}, {"utility_surplus", w.utility_surplus},
                  {"aggregator_surplus", w.aggregator_surplus}, {"emissions_damage", w.emissions_damage},
                  {"total", w.total}, {"revenue", w.revenue},
                  {"revenue_adequacy_gap", w.revenue_adequacy_gap}, {"emissions", w.emissions}};
  const auto& a = *o.slsf1;
  std::vector<double> capped(a.capped.begin(), a.capped.end());
  r["first_game"] = {{"g_max", per_node(s, a.g_max)}, {"tariff", a.tariff},
                     {"compensation", per_node(s, a.pi_der)}, {"capped", per_node(s, capped)},
                     {"objective", a.objective}};
  const auto& b = *o.slsf2;
  r["second_game"] = {{"dlmp", per_node(s, b.dlmp)}, {"tau_bar", b.tau_bar},
                      {"stranded", per_node(s, b.stranded)}, {"objective", b.objective}};
  r["residuals"] = {{"first_game", residuals(a.diag)}, {"second_game", residuals(b.diag)}};
  if (trace) r["trace"] = {{"first_game", stages(a.diag)}, {"second_game", stages(b.diag)}};
  return r;
}

std::string summary_header() {
  return "policy,case,stance,carbon,id,status,capacity,welfare,consumer_surplus,utility_surplus,"
         "aggregator_surplus,emissions_damage,revenue_adequacy_gap";
}

std::string summary_row(const json& r) {
  std::ostringstream os;
  os << r["policy"].get<std::string>() << ',' << r["case"].get<std::string>() << ','
     << r["stance"].get<std::string>() << ',' << (r["carbon"].get<bool>() ? "on" : "off") << ','
     << r["id"].get<std::string>() << ',' << r["status"].get<std::string>();
  const bool ok = r["status"] == "ok";
  os << ',' << (ok ? cell(r["capacity"]["total"]) : "");
  for (const char* k : {"total", "consumer_surplus", "utility_surplus", "aggregator_surplus", "emissions_damage",
                        "revenue_adequacy_gap"})
    os << ',' << (ok ? cell(r["welfare"][k]) : "");
  return os.str();
}

int cmd_run(const RunOptions& opt, std::ostream& log, std::ostream& err) {
  std::vector<Scenario> todo;
  try {
    const Scenario base = load_scenario(resolve_base(opt.base));
    if (opt.ids.empty()) {
      todo = case_matrix(base, opt.filter);
    } else {
      for (const auto& id : opt.ids) todo.push_back(matrix_scenario(base, id));
    }
  } catch (const std::exception& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalid;
  }
  if (opt.jobs < 1) {
    err << "invalid input: --jobs must be >= 1\n";
    return kInvalid;
  }
  const fs::path dir = opt.out.empty() ? default_out() : opt.out;
  std::string why;
  if (!writable_dir(dir, why)) {
    err << "error: " << why << '\n';
    return kInvalid;
  }

  std::vector<json> rows(todo.size());
  std::vector<std::string> failures(todo.size());
  std::atomic<std::size_t> next{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < todo.size();) {
      const auto& s = todo[i];
      const GameOutcome o = run_case(s);
      json r = result_json(s, o, opt.trace);
      const bool written = write_file(dir / (s.id + ".json"), r.dump(2) + "\n");
      std::lock_guard<std::mutex> lock(io);
      if (!written) failures[i] = s.id + ": cannot write result file";
      else if (!o.ok()) failures[i] = s.id + ": " + o.error;
      log << s.id << (o.ok() ? " ok " : " FAILED ") << num(std::round(o.seconds * 10.0) / 10.0) << " s\n";
      rows[i] = std::move(r);
    }
  };
  const int n = std::min<int>(opt.jobs, static_cast<int>(todo.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::string summary = summary_header() + "\n";
  for (const auto& r : rows) summary += summary_row(r) + "\n";
  std::string report;
  for (const auto& f : failures)
    if (!f.empty()) report += f + "\n";
  if (!write_file(dir / "summary.csv", summary)) report += "summary.csv: cannot write\n";
  if (!report.empty()) {
    write_file(dir / "failures.txt", report);
    err << "failed scenarios:\n" << report;
    return kPartial;
  }
  std::error_code ec;
  fs::remove(dir / "failures.txt", ec);
  log << todo.size() << " scenario(s) written to " << dir.string() << '\n';
  return kOk;
}

int cmd_report(const std::string& in, const std::string& out, std::ostream& log, std::ostream& err) {
  if (!fs::is_directory(in)) {
    err << "invalid input: '" << in << "' is not a directory\n";
    return kInvalid;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(in))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::map<std::string, json> results;  // by id
  std::vector<std::string> problems;
  for (const auto& p : files) {
    try {
      std::ifstream f(p);
      json r = json::parse(f);
      if (r.value("schema", "") != "dergame.result" || r.value("schema_version", 0) != kSchemaVersion)
        throw std::runtime_error("not a version " + std::to_string(kSchemaVersion) + " result file");
      summary_row(r);
      const std::string id = r.at("id").get<std::string>();
      results[id] = std::move(r);
    } catch (const std::exception& e) {
      problems.push_back(p.filename().string() + ": corrupt (" + e.what() + ")");
    }
  }
  // Scenarios listed in the run summary but without a result file.
  if (std::ifstream sf(fs::path(in) / "summary.csv"); sf) {
    std::string line;
    std::getline(sf, line);
    while (std::getline(sf, line)) {
      std::vector<std::string> cols;
      std::stringstream ss(line);
      for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
      if (cols.size() > 4 && !fs::exists(fs::path(in) / (cols[4] + ".json")))
        problems.push_back(cols[4] + ".json: missing");
    }
  }
  for (const auto& p : problems) err << p << '\n';
  if (results.empty()) {
    err << "error: no result files in '" << in << "' (" << files.size() << " inputs read)\n";
    return kInvalid;
  }
  std::string why;
  if (!writable_dir(out, why)) {
    err << "error: " << why << '\n';
    return kInvalid;
  }

  auto find = [&](const std::string& p, const std::string& c, const std::string& st, bool carbon) -> const json* {
    for (const auto& [id, r] : results)
      if (r["status"] == "ok" && r["policy"] == p && r["case"] == c && r["stance"] == st && r["carbon"] == carbon)
        return &r;
    return nullptr;
  };
  const std::vector<std::string> policies{to_string(Policy::NEM), to_string(Policy::VS), to_string(Policy::DLMP)};
  const std::string complete = to_string(InfoCase::CompleteInfo), na = to_string(Stance::NotApplicable);

  // (a) capacity and welfare, complete information
  std::string a = "policy,carbon,capacity,welfare\n";
  for (const auto& p : policies)
    for (bool c : {false, true})
      if (const json* r = find(p, complete, na, c))
        a += p + "," + (c ? "on" : "off") + "," + cell((*r)["capacity"]["total"]) + "," +
             cell((*r)["welfare"]["total"]) + "\n";

  // (b) per-zone capacity and mean compensation, complete information
  std::vector<std::pair<std::string, const json*>> cols;
  for (const auto& p : policies)
    for (bool c : {false, true})
      if (const json* r = find(p, complete, na, c)) cols.emplace_back(p + "_" + (c ? "on" : "off"), r);
  std::string b = "node";
  for (const auto& [name, r] : cols) b += ",capacity_" + name + ",compensation_" + name;
  b += "\n";
  std::vector<std::string> nodes;
  if (!cols.empty())
    for (const auto& [node, v] : (*cols.front().second)["capacity"]["by_node"].items()) nodes.push_back(node);
  for (const auto& node : nodes) {
    b += node;
    for (const auto& [name, r] : cols)
      b += "," + cell((*r)["capacity"]["by_node"][node]) + "," + num(mean((*r)["compensation"][node]));
    b += "\n";
  }

  // (c) capacity by case and stance against policy and carbon
  std::vector<std::pair<std::string, std::string>> rows{{complete, na}};
  for (InfoCase ic : {InfoCase::HostingAsym, InfoCase::ConsumerAsym, InfoCase::BothAsym})
    for (Stance st : {Stance::Optimistic, Stance::Pessimistic}) rows.emplace_back(to_string(ic), to_string(st));
  std::string c = "case,stance";
  for (const auto& p : policies)
    for (bool on : {false, true}) c += "," + p + "_" + (on ? "on" : "off");
  c += "\n";
  for (const auto& [ic, st] : rows) {
    bool any = false;
    std::string line = ic + "," + st;
    for (const auto& p : policies)
      for (bool on : {false, true}) {
        const json* r = find(p, ic, st, on);
        any = any || r;
        line += "," + (r ? cell((*r)["capacity"]["total"]) : std::string());
      }
    if (any) c += line + "\n";
  }

  // (d) welfare components relative to NEM under complete information, same carbon setting
  const std::vector<std::string> parts{"consumer_surplus", "utility_surplus", "aggregator_surplus",
                                       "emissions_damage", "total"};
  std::string d = "id,policy,case,stance,carbon";
  for (const auto& k : parts) d += ",delta_" + k;
  d += "\n";
  for (const auto& [id, r] : results) {
    if (r["status"] != "ok") continue;
    const json* ref = find(policies[0], complete, na, r["carbon"].get<bool>());
    if (!ref) continue;
    d += id + "," + r["policy"].get<std::string>() + "," + r["case"].get<std::string>() + "," +
         r["stance"].get<std::string>() + "," + (r["carbon"].get<bool>() ? "on" : "off");
    for (const auto& k : parts)
      d += "," + num(r["welfare"][k].get<double>() - (*ref)["welfare"][k].get<double>());
    d += "\n";
  }

  const fs::path o(out);
  bool ok = write_file(o / "capacity_welfare.csv", a) && write_file(o / "zones.csv", b) &&
            write_file(o / "beliefs.csv", c) && write_file(o / "welfare_deltas.csv", d);
  if (!ok) {
    err << "error: cannot write tables to '" << out << "'\n";
    return kInvalid;
  }
  log << results.size() << " result(s) read, 4 tables written to " << out << '\n';
  return problems.empty() ? kOk : kPartial;
}

int cmd_validate(const std::string& path, std::ostream& log, std::ostream& err) {
  try {
    const Scenario s = load_scenario(path);
    log << "ok " << s.id << ": " << s.network.nodes.size() << " nodes, " << s.network.lines.size() << " lines, "
        << s.times.size() << " periods\n";
    return kOk;
  } catch (const std::exception& e) {
    err << path << ": " << e.what() << '\n';
    return kInvalid;
  }
}

}  // namespace dergame::cli
