#include "waitk/policy.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace waitk {

void ActionTrace::validate() const {
  int last_src = 0, last_tgt = 0;
  int t = 0;
  for (const auto& ev : events) {
    if (ev.time != t++) throw DataError("ActionTrace: times must be dense and 0-based");
    if (ev.action == Action::read) {
      if (ev.pos != last_src + 1) throw DataError("ActionTrace: READ positions must be contiguous");
      last_src = ev.pos;
    } else {
      if (ev.pos != last_tgt + 1) throw DataError("ActionTrace: WRITE positions must be contiguous");
      last_tgt = ev.pos;
    }
  }
}

int ActionTrace::read_count() const {
  int n = 0;
  for (const auto& ev : events) n += ev.action == Action::read;
  return n;
}

int ActionTrace::write_count() const {
  return static_cast<int>(events.size()) - read_count();
}

std::vector<int> ActionTrace::global_delays() const {
  std::vector<int> g;
  int reads = 0;
  for (const auto& ev : events) {
    if (ev.action == Action::read)
      ++reads;
    else
      g.push_back(reads);
  }
  return g;
}

std::string ActionTrace::to_jsonl() const {
  std::ostringstream out;
  for (const auto& ev : events) {
    nlohmann::json j;
    j["time"] = ev.time;
    j["action"] = ev.action == Action::read ? "READ" : "WRITE";
    j[ev.action == Action::read ? "src_pos" : "tgt_pos"] = ev.pos;
    j["sentence"] = ev.sentence;
    out << j.dump() << '\n';
  }
  return out.str();
}

ActionTrace ActionTrace::from_jsonl(const std::string& text) {
  ActionTrace trace;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw DataError("ActionTrace: bad JSON line: " + line);
    ActionEvent ev;
    ev.time = j.at("time").get<int>();
    const std::string action = j.at("action").get<std::string>();
    if (action == "READ") {
      ev.action = Action::read;
      ev.pos = j.at("src_pos").get<int>();
    } else if (action == "WRITE") {
      ev.action = Action::write;
      ev.pos = j.at("tgt_pos").get<int>();
    } else {
      throw DataError("ActionTrace: unknown action: " + action);
    }
    ev.sentence = j.at("sentence").get<int>();
    trace.events.push_back(ev);
  }
  trace.validate();
  return trace;
}

int local_delay(const WaitKPolicy& policy, int i) {
  policy.validate();
  if (i < 1) throw DataError("local_delay: target index must be >= 1");
  return policy.k + static_cast<int>(floor_div_by(i - 1, policy.gamma));
}

int stream_delay(const WaitKPolicy& policy, const Segmentation& seg, int i) {
  policy.validate();
  if (i < 1) throw DataError("stream_delay: target index must be >= 1");
  const int n = sentence_of(seg, Side::target, i);
  const int a_n = seg.start(Side::source, n);
  const int b_n = seg.start(Side::target, n);
  return policy.k + static_cast<int>(floor_div_by(i - b_n, policy.gamma)) + a_n - 1;
}

int cap_delay(int g_raw, int available_src) {
  if (available_src < 1) throw DataError("cap_delay: available source must be >= 1");
  return std::min(g_raw, available_src);
}

ActionTrace schedule_actions(const WaitKPolicy& policy, const Segmentation& seg,
                             const std::vector<int>& src_lens,
                             const std::vector<int>& tgt_lens) {
  policy.validate();
  seg.validate();
  const Segmentation expected = Segmentation::from_lengths(src_lens, tgt_lens);
  if (seg.a != expected.a || seg.b != expected.b)
    throw DataError("schedule_actions: segmentation inconsistent with length vectors");

  ActionTrace trace;
  int time = 0, reads = 0;
  auto read_up_to = [&](int src_pos) {
    while (reads < src_pos) {
      ++reads;
      trace.events.push_back({time++, Action::read, reads, sentence_of(seg, Side::source, reads)});
    }
  };

  const int sentences = seg.sentence_count();
  for (int n = 1; n <= sentences; ++n) {
    const int src_end = seg.start(Side::source, n) + src_lens[static_cast<std::size_t>(n - 1)] - 1;
    const int b_n = seg.start(Side::target, n);
    for (int rel = 0; rel < tgt_lens[static_cast<std::size_t>(n - 1)]; ++rel) {
      const int i = b_n + rel;
      read_up_to(cap_delay(stream_delay(policy, seg, i), src_end));
      trace.events.push_back({time++, Action::write, i, n});
    }
  }
  return trace;
}

void write_trace_file(const std::string& path, const ActionTrace& trace) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << trace.to_jsonl();
}

ActionTrace read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return ActionTrace::from_jsonl(buf.str());
}

}  // namespace waitk
