#include "kcl/run_log.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "kcl/errors.hpp"

namespace kcl {

namespace {

constexpr const char* kHeader =
    "kind,epoch,step,batch,skp_loss,kcl_loss,t2v_terms,v2t_terms,"
    "align,unif_txt,unif_vis,r1,r5,r10,medr,v2t_r1,v2t_r5,v2t_r10,v2t_medr";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string escape_line(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '\n') out += "\\n";
    else if (c == '\\') out += "\\\\";
    else out.push_back(c);
  }
  return out;
}

std::string unescape_line(const std::string& s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      if (s[i + 1] == 'n') {
        out.push_back('\n');
        ++i;
        continue;
      }
      if (s[i + 1] == '\\') {
        out.push_back('\\');
        ++i;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::string& path, size_t line_no) {
  try {
    return std::stod(s);
  } catch (...) {
    throw DataError(path + ": line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

}  // namespace

void write_run_log(const RunLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "# config = " << escape_line(log.config_snapshot) << '\n';
  out << "# checkpoint = " << escape_line(log.checkpoint_path) << '\n';
  out << kHeader << '\n';
  for (const StepRow& r : log.steps) {
    out << "step," << r.epoch << ',' << r.step << ','
        << (r.batch_kind == BatchKind::hard ? "hard" : "random") << ',' << fmt(r.loss.skp_loss)
        << ',' << fmt(r.loss.kcl_loss) << ',' << r.loss.t2v_terms << ',' << r.loss.v2t_terms
        << ",,,,,,,,,,,\n";
  }
  for (const EvalRow& r : log.evals) {
    auto rat = [](const RetrievalReport& rep, int k) { return rep.r_at.at(k); };
    out << "eval," << r.epoch << ",,,,,,," << fmt(r.space.align) << ',' << fmt(r.space.unif_txt)
        << ',' << fmt(r.space.unif_vis) << ',' << fmt(rat(r.t2v, 1)) << ',' << fmt(rat(r.t2v, 5))
        << ',' << fmt(rat(r.t2v, 10)) << ',' << fmt(r.t2v.med_r) << ',' << fmt(rat(r.v2t, 1))
        << ',' << fmt(rat(r.v2t, 5)) << ',' << fmt(rat(r.v2t, 10)) << ',' << fmt(r.v2t.med_r)
        << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

RunLog read_run_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open run log: " + path);
  RunLog log;
  std::string line;
  size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# config = ", 0) == 0) {
      log.config_snapshot = unescape_line(line.substr(11));
      continue;
    }
    if (line.rfind("# checkpoint = ", 0) == 0) {
      log.checkpoint_path = unescape_line(line.substr(15));
      continue;
    }
    if (line[0] == '#') continue;
    if (!saw_header) {
      if (line != kHeader) throw DataError(path + ": unrecognized run log header");
      saw_header = true;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 19)
      throw DataError(path + ": line " + std::to_string(line_no) + ": expected 19 columns");
    if (f[0] == "step") {
      StepRow r;
      r.epoch = static_cast<int>(to_double(f[1], path, line_no));
      r.step = static_cast<int>(to_double(f[2], path, line_no));
      r.batch_kind = f[3] == "hard" ? BatchKind::hard : BatchKind::random;
      r.loss.skp_loss = to_double(f[4], path, line_no);
      r.loss.kcl_loss = to_double(f[5], path, line_no);
      r.loss.t2v_terms = static_cast<int>(to_double(f[6], path, line_no));
      r.loss.v2t_terms = static_cast<int>(to_double(f[7], path, line_no));
      log.steps.push_back(r);
    } else if (f[0] == "eval") {
      EvalRow r;
      r.epoch = static_cast<int>(to_double(f[1], path, line_no));
      r.space.align = to_double(f[8], path, line_no);
      r.space.unif_txt = to_double(f[9], path, line_no);
      r.space.unif_vis = to_double(f[10], path, line_no);
      r.t2v.r_at[1] = to_double(f[11], path, line_no);
      r.t2v.r_at[5] = to_double(f[12], path, line_no);
      r.t2v.r_at[10] = to_double(f[13], path, line_no);
      r.t2v.aver = (r.t2v.r_at[1] + r.t2v.r_at[5] + r.t2v.r_at[10]) / 3.0;
      r.t2v.med_r = to_double(f[14], path, line_no);
      r.v2t.r_at[1] = to_double(f[15], path, line_no);
      r.v2t.r_at[5] = to_double(f[16], path, line_no);
      r.v2t.r_at[10] = to_double(f[17], path, line_no);
      r.v2t.aver = (r.v2t.r_at[1] + r.v2t.r_at[5] + r.v2t.r_at[10]) / 3.0;
      r.v2t.med_r = to_double(f[18], path, line_no);
      log.evals.push_back(r);
    } else {
      throw DataError(path + ": line " + std::to_string(line_no) + ": unknown row kind '" +
                      f[0] + "'");
    }
  }
  if (!saw_header) throw DataError(path + ": missing run log header");
  return log;
}

std::vector<DiagnosticsRow> diagnostics_series(const RunLog& log) {
  std::map<int, std::pair<double, double>> loss_sums;  // epoch -> (skp, kcl)
  std::map<int, int> loss_counts;
  for (const StepRow& r : log.steps) {
    loss_sums[r.epoch].first += r.loss.skp_loss;
    loss_sums[r.epoch].second += r.loss.kcl_loss;
    ++loss_counts[r.epoch];
  }
  std::vector<DiagnosticsRow> out;
  for (const EvalRow& e : log.evals) {
    DiagnosticsRow row;
    row.epoch = e.epoch;
    const int n = loss_counts.count(e.epoch) ? loss_counts[e.epoch] : 0;
    if (n > 0) {
      row.skp_loss = loss_sums[e.epoch].first / n;
      row.kcl_loss = loss_sums[e.epoch].second / n;
    }
    row.align = e.space.align;
    row.unif_txt = e.space.unif_txt;
    row.unif_vis = e.space.unif_vis;
    row.r1 = e.t2v.r_at.at(1);
    row.r5 = e.t2v.r_at.at(5);
    row.r10 = e.t2v.r_at.at(10);
    row.medr = e.t2v.med_r;
    out.push_back(row);
  }
  return out;
}

void write_diagnostics_csv(const std::vector<DiagnosticsRow>& rows, std::ostream& out) {
  out << "epoch,skp_loss,kcl_loss,align,unif_txt,unif_vis,r1,r5,r10,medr\n";
  for (const auto& r : rows) {
    out << r.epoch << ',' << fmt(r.skp_loss) << ',' << fmt(r.kcl_loss) << ',' << fmt(r.align)
        << ',' << fmt(r.unif_txt) << ',' << fmt(r.unif_vis) << ',' << fmt(r.r1) << ','
        << fmt(r.r5) << ',' << fmt(r.r10) << ',' << fmt(r.medr) << '\n';
  }
}

}  // namespace kcl
