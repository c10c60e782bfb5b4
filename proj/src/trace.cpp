// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "evac/trace.hpp"

#include <zlib.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace evac {

using nlohmann::json;

namespace {

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

Vec2 json_vec(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

AgentStatus json_status(const json& j) {
  const auto s = parse_status(j.get<std::string>());
  if (!s) throw TraceError("unknown status '" + j.get<std::string>() + "'");
  return *s;
}

}  // namespace

std::filesystem::path trace_file(const std::filesystem::path& dir) {
  if (std::filesystem::exists(dir / "trace.jsonl.gz")) return dir / "trace.jsonl.gz";
  return dir / "trace.jsonl";
}

std::string encode_meta(const TraceMeta& m) {
  json j;
  j["format"] = "evacsim-trace";
  j["version"] = kTraceVersion;
  j["scenario"] = m.scenario;
  j["dt"] = m.dt;
  j["decision_every"] = m.decision_every;
  j["seed"] = m.seed;
  j["max_ticks"] = m.max_ticks;
  json classes = json::array();
  for (ClassId c : m.agent_classes) classes.push_back(std::string(class_name(c)));
  j["agent_classes"] = classes;
  json poly = json::array();
  for (Vec2 p : m.bottleneck) poly.push_back(vec_json(p));
  j["bottleneck"] = poly;
  j["has_forces"] = m.has_forces;
  j["has_paths"] = m.has_paths;
  j["part_layout"] = std::string(kPartLayoutVersion);
  return j.dump(2) + "\n";
}

TraceMeta decode_meta(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "evacsim-trace") throw TraceError("not a trace meta file");
    if (j.at("version").get<int>() != kTraceVersion)
      throw TraceError("unsupported trace version " + j.at("version").dump());
    TraceMeta m;
    m.scenario = j.at("scenario").get<std::string>();
    m.dt = j.at("dt").get<double>();
    m.decision_every = j.at("decision_every").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.max_ticks = j.at("max_ticks").get<std::int64_t>();
    for (const auto& c : j.at("agent_classes")) {
      const auto id = parse_class_name(c.get<std::string>());
      if (!id) throw TraceError("unknown class '" + c.get<std::string>() + "'");
      m.agent_classes.push_back(*id);
    }
    for (const auto& p : j.at("bottleneck")) m.bottleneck.push_back(json_vec(p));
    m.has_forces = j.value("has_forces", false);
    m.has_paths = j.value("has_paths", false);
    return m;
  } catch (const json::exception& e) {
    throw TraceError(std::string("meta: ") + e.what());
  }
}

std::string encode_frame(const TraceFrame& f) {
  json j;
  j["tick"] = f.tick;
  json agents = json::array();
  for (const AgentState& a : f.agents)
    agents.push_back({a.id, a.pos.x, a.pos.y, a.vel.x, a.vel.y, std::string(status_name(a.status)),
                      a.gait});
  j["agents"] = std::move(agents);
  j["contacts"] = {{"n", f.contacts.count},
                   {"impulse", f.contacts.total_impulse},
                   {"max", f.contacts.max_impulse}};
  if (!f.transitions.empty()) {
    json t = json::array();
    for (const StatusChange& s : f.transitions)
      t.push_back({s.id, std::string(status_name(s.from)), std::string(status_name(s.to))});
    j["transitions"] = std::move(t);
  }
  if (!f.forces.empty()) {
    json fr = json::array();
    for (const PartForceRecord& r : f.forces) fr.push_back({r.agent_id, r.force});
    j["forces"] = std::move(fr);
  }
  if (!f.components.empty()) {
    json c = json::array();
    for (const ForceComponents& fc : f.components)
      c.push_back({fc.id, fc.drive.x, fc.drive.y, fc.repulsive.x, fc.repulsive.y, fc.evasive.x,
                   fc.evasive.y});
    j["components"] = std::move(c);
  }
  if (!f.paths.empty()) {
    json p = json::array();
    for (const PathRecord& pr : f.paths) {
      json pts = json::array();
      for (Vec2 v : pr.points) pts.push_back(vec_json(v));
      p.push_back({pr.id, std::move(pts)});
    }
    j["paths"] = std::move(p);
  }
  return j.dump();
}

std::string encode_footer(std::int64_t frames) {
  return json{{"end", true}, {"frames", frames}}.dump();
}

std::optional<TraceFrame> decode_frame(const std::string& line) {
  try {
    const json j = json::parse(line);
    if (j.contains("end")) return std::nullopt;
    TraceFrame f;
    f.tick = j.at("tick").get<std::int64_t>();
    for (const auto& a : j.at("agents")) {
      AgentState s;
      s.id = a.at(0).get<int>();
      s.pos = {a.at(1).get<double>(), a.at(2).get<double>()};
      s.vel = {a.at(3).get<double>(), a.at(4).get<double>()};
      s.status = json_status(a.at(5));
      s.gait = a.at(6).get<double>();
      f.agents.push_back(s);
    }
    const json& c = j.at("contacts");
    f.contacts = {c.at("n").get<int>(), c.at("impulse").get<double>(), c.at("max").get<double>()};
    if (j.contains("transitions"))
      for (const auto& t : j["transitions"])
        f.transitions.push_back({t.at(0).get<int>(), json_status(t.at(1)), json_status(t.at(2))});
    if (j.contains("forces")) {
      for (const auto& r : j["forces"]) {
        PartForceRecord rec;
        rec.agent_id = r.at(0).get<int>();
        rec.tick = f.tick;
        const auto& vals = r.at(1);
        if (vals.size() != kPartCount) throw TraceError("force record needs 24 values");
        for (int p = 0; p < kPartCount; ++p) rec.force[p] = vals.at(p).get<double>();
        f.forces.push_back(rec);
      }
    }
    if (j.contains("components"))
      for (const auto& c2 : j["components"])
        f.components.push_back({c2.at(0).get<int>(),
                                {c2.at(1).get<double>(), c2.at(2).get<double>()},
                                {c2.at(3).get<double>(), c2.at(4).get<double>()},
                                {c2.at(5).get<double>(), c2.at(6).get<double>()}});
    if (j.contains("paths")) {
      for (const auto& p : j["paths"]) {
        PathRecord pr;
        pr.id = p.at(0).get<int>();
        for (const auto& v : p.at(1)) pr.points.push_back(json_vec(v));
        f.paths.push_back(std::move(pr));
      }
    }
    return f;
  } catch (const json::exception& e) {
    throw TraceError(std::string("frame: ") + e.what());
  }
}

struct TraceWriter::Output {
  gzFile gz = nullptr;
  std::ofstream plain;

  void put(const std::string& line) {
    if (gz) {
      if (gzwrite(gz, line.data(), static_cast<unsigned>(line.size())) !=
              static_cast<int>(line.size()) ||
          gzputc(gz, '\n') < 0)
        throw TraceError("gzip write failed");
    } else {
      plain << line << '\n';
      if (!plain) throw TraceError("trace write failed");
    }
  }
  void close() {
    if (gz) {
      gzclose(gz);
      gz = nullptr;
    }
    if (plain.is_open()) plain.close();
  }
};

TraceWriter::TraceWriter(const std::filesystem::path& dir, const TraceMeta& meta, bool gzip,
                         std::size_t queue_capacity)
    : out_(std::make_unique<Output>()), capacity_(std::max<std::size_t>(1, queue_capacity)) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream m(dir / "meta.json");
    if (!m) throw TraceError("cannot write " + (dir / "meta.json").string());
    m << encode_meta(meta);
  }
  // Never leave a stale file of the other flavour next to the new one.
  std::filesystem::remove(dir / (gzip ? "trace.jsonl" : "trace.jsonl.gz"));
  if (gzip) {
    out_->gz = gzopen((dir / "trace.jsonl.gz").c_str(), "wb6");
    if (!out_->gz) throw TraceError("cannot open gzip trace in " + dir.string());
  } else {
    out_->plain.open(dir / "trace.jsonl", std::ios::binary | std::ios::trunc);
    if (!out_->plain) throw TraceError("cannot open trace in " + dir.string());
  }
  thread_ = std::thread([this] { loop(); });
}

TraceWriter::~TraceWriter() {
  {
    std::lock_guard lock(mu_);
    closing_ = true;
  }
  not_empty_.notify_all();
  not_full_.notify_all();
  if (thread_.joinable()) thread_.join();
  out_->close();
}

void TraceWriter::write(TraceFrame frame) {
  std::unique_lock lock(mu_);
  not_full_.wait(lock, [&] { return queue_.size() < capacity_ || !error_.empty(); });
  if (!error_.empty()) throw TraceError(error_);
  queue_.push_back(std::move(frame));
  lock.unlock();
  not_empty_.notify_one();
}

void TraceWriter::finish() {
  {
    std::lock_guard lock(mu_);
    if (finished_) return;
    finished_ = true;
    closing_ = true;
  }
  not_empty_.notify_all();
  if (thread_.joinable()) thread_.join();
  if (!error_.empty()) throw TraceError(error_);
  out_->put(encode_footer(written_));
  out_->close();
}

void TraceWriter::loop() {
  for (;;) {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return !queue_.empty() || closing_; });
    if (queue_.empty()) return;
    TraceFrame f = std::move(queue_.front());
    queue_.pop_front();
    lock.unlock();
    not_full_.notify_one();
    try {
      out_->put(encode_frame(f));
      ++written_;
    } catch (const std::exception& e) {
      std::lock_guard g(mu_);
      error_ = e.what();
      queue_.clear();
      not_full_.notify_all();
      return;
    }
  }
}

TraceReader::TraceReader(const std::filesystem::path& dir) {
  std::ifstream m(dir / "meta.json");
  if (!m) throw TraceError("missing " + (dir / "meta.json").string());
  std::stringstream ss;
  ss << m.rdbuf();
  meta_ = decode_meta(ss.str());
  const auto file = trace_file(dir);
  gz_ = gzopen(file.c_str(), "rb");
  if (!gz_) throw TraceError("cannot open " + file.string());
}

TraceReader::~TraceReader() {
  if (gz_) gzclose(static_cast<gzFile>(gz_));
}

bool TraceReader::read_line(std::string& line) {
  line.clear();
  char buf[1 << 16];
  for (;;) {
    char* got = gzgets(static_cast<gzFile>(gz_), buf, sizeof buf);
    if (!got) {
      int err = 0;
      gzerror(static_cast<gzFile>(gz_), &err);
      if (err != Z_OK && err != Z_STREAM_END) throw TraceError("trace read failed");
      partial_ = !line.empty();
      return partial_;
    }
    line.append(got);
    if (!line.empty() && line.back() == '\n') {
      line.pop_back();
      return true;
    }
  }
}

bool TraceReader::next(TraceFrame& frame) {
  std::string line;
  while (!complete_ && read_line(line)) {
    ++line_no_;
    if (line.empty()) continue;
    std::optional<TraceFrame> f;
    try {
      f = decode_frame(line);
    } catch (const TraceError& e) {
      if (partial_) return false;  // cut off mid-line: truncated, not corrupt
      throw TraceError("line " + std::to_string(line_no_) + ": " + e.what());
    }
    if (!f) {
      complete_ = true;
      return false;
    }
    frame = std::move(*f);
    return true;
  }
  return false;
}

}  // namespace evac
