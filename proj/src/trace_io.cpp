#include "cascade/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cascade {

namespace {

constexpr const char* kFormat = "cascade-traces";

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd json_to_vec(const nlohmann::json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[i] = arr.at(i).get<double>();
  return v;
}

std::string csv_vector(const std::optional<Eigen::VectorXd>& v) {
  if (!v) return "";
  std::ostringstream out;
  char buf[64];
  for (Eigen::Index i = 0; i < v->size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", (*v)[i]);
    if (i) out << ';';
    out << buf;
  }
  return out.str();
}

}  // namespace

void write_traces(const TraceSet& traces, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  nlohmann::json header;
  header["format"] = kFormat;
  header["version"] = 1;
  out << header.dump() << "\n";
  for (const InformationTrace& tr : traces) {
    validate(tr);
    nlohmann::json j;
    j["trace_id"] = tr.trace_id;
    j["label"] = tr.label;
    auto events = nlohmann::json::array();
    for (const TraceEvent& e : tr.events) {
      nlohmann::json je;
      je["parent"] = e.parent_index;
      je["type"] = e.edge_type ? nlohmann::json(*e.edge_type) : nlohmann::json();
      je["xu"] = e.xu ? vec_to_json(*e.xu) : nlohmann::json();
      je["xv"] = e.xv ? vec_to_json(*e.xv) : nlohmann::json();
      events.push_back(std::move(je));
    }
    j["events"] = std::move(events);
    out << j.dump() << "\n";
  }
}

TraceSet read_traces(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  TraceSet traces;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      if (line_no == 1 && j.contains("format")) continue;  // meta line
      InformationTrace tr;
      tr.trace_id = j.at("trace_id").get<std::string>();
      tr.label = j.at("label").get<int>();
      int index = 0;
      for (const auto& je : j.at("events")) {
        TraceEvent e;
        e.index = index++;
        e.parent_index = je.at("parent").get<int>();
        if (!je.at("type").is_null()) e.edge_type = je.at("type").get<int>();
        if (je.contains("xu") && !je.at("xu").is_null()) e.xu = json_to_vec(je.at("xu"));
        if (je.contains("xv") && !je.at("xv").is_null()) e.xv = json_to_vec(je.at("xv"));
        tr.events.push_back(std::move(e));
      }
      validate(tr);
      traces.push_back(std::move(tr));
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "parse error at line " << line_no << " of " << path << ": " << e.what();
      throw std::runtime_error(msg.str());
    }
  }
  return traces;
}

void write_traces_csv(const TraceSet& traces, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace csv: " + path);
  out << "trace_id,label,event_index,parent,type,xu,xv\n";
  for (const InformationTrace& tr : traces) {
    for (const TraceEvent& e : tr.events) {
      out << tr.trace_id << ',' << tr.label << ',' << e.index << ','
          << e.parent_index << ',';
      if (e.edge_type) out << *e.edge_type;
      out << ',' << csv_vector(e.xu) << ',' << csv_vector(e.xv) << "\n";
    }
  }
}

}  // namespace cascade
