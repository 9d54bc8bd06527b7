#include "sisnet/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sisnet {

ParseError::ParseError(const std::string& source, int line, const std::string& reason)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + reason), line_(line) {}

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<std::string> split_fields(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

/// Line-oriented reader that tracks line numbers for diagnostics.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  /// Reads the header; with `exact` no columns beyond the prefix are allowed.
  std::vector<std::string> header(const std::vector<std::string>& expected_prefix,
                                  bool exact = false) {
    std::string line;
    if (!std::getline(in_, line)) fail("missing header");
    ++line_;
    auto fields = split_fields(line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (fields.size() < expected_prefix.size() || (exact && fields.size() != expected_prefix.size()) ||
        !std::equal(expected_prefix.begin(), expected_prefix.end(), fields.begin()))
      fail("unexpected header '" + line + "'");
    return fields;
  }

  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (line.empty() || line == "\r") continue;
      fields = split_fields(line);
      return true;
    }
    return false;
  }

  long to_int(const std::string& s) const {
    long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail("not an integer: '" + s + "'");
    return v;
  }

  double to_double(const std::string& s) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      fail("not a number: '" + s + "'");
    }
  }

  void expect_fields(const std::vector<std::string>& fields, std::size_t n) const {
    if (fields.size() != n)
      fail("expected " + std::to_string(n) + " fields, got " + std::to_string(fields.size()));
  }

  [[noreturn]] void fail(const std::string& reason) const { throw ParseError(source_, line_, reason); }

 private:
  std::istream& in_;
  std::string source_;
  int line_ = 0;
};

int checked_index(const CsvReader& r, long v, std::optional<int> limit, const char* what) {
  if (v < 1) r.fail(std::string(what) + " index must be >= 1, got " + std::to_string(v));
  if (limit && v > *limit)
    r.fail(std::string("unknown ") + what + " " + std::to_string(v) + " (declared " +
           std::to_string(*limit) + ")");
  return static_cast<int>(v - 1);
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// ---------------------------------------------------------------------------

DynamicNetwork read_contacts(std::istream& in, const std::string& source,
                             std::optional<int> num_agents, std::optional<int> num_steps) {
  // A zero-byte file is an empty contact list.
  if (in.peek() == std::char_traits<char>::eof()) {
    if (!num_agents || !num_steps)
      throw ParseError(source, 1, "cannot infer network dimensions from an empty file");
    return DynamicNetwork(*num_agents, *num_steps);
  }
  CsvReader reader(in, source);
  reader.header({"t", "agent_a", "agent_b"}, true);
  std::vector<std::pair<Step, Contact>> rows;
  std::set<std::pair<Step, Contact>> seen;
  int max_agent = 0;
  int max_step = 0;
  std::vector<std::string> f;
  while (reader.next(f)) {
    reader.expect_fields(f, 3);
    const Step t = checked_index(reader, reader.to_int(f[0]), num_steps, "step");
    const Agent a = checked_index(reader, reader.to_int(f[1]), num_agents, "agent");
    const Agent b = checked_index(reader, reader.to_int(f[2]), num_agents, "agent");
    if (a == b) reader.fail("self contact of agent " + f[1]);
    const Contact c = make_contact(a, b);
    if (!seen.insert({t, c}).second)
      reader.fail("duplicate contact (" + std::to_string(c.a + 1) + ", " +
                  std::to_string(c.b + 1) + ") at step " + f[0]);
    rows.push_back({t, c});
    max_agent = std::max({max_agent, a + 1, b + 1});
    max_step = std::max(max_step, t + 1);
  }
  const int n_agents = num_agents.value_or(max_agent);
  const int n_steps = num_steps.value_or(max_step);
  if (n_agents < 1 || n_steps < 1)
    throw ParseError(source, 1, "cannot infer network dimensions from an empty file");
  std::vector<std::vector<Contact>> edges(n_steps);
  for (const auto& [t, c] : rows) edges[t].push_back(c);
  return DynamicNetwork(n_agents, n_steps, std::move(edges));
}

DynamicNetwork load_contacts(const fs::path& path, std::optional<int> num_agents,
                             std::optional<int> num_steps) {
  auto in = open_input(path);
  return read_contacts(in, path.string(), num_agents, num_steps);
}

void write_contacts(std::ostream& out, const DynamicNetwork& network) {
  out << "t,agent_a,agent_b\n";
  for (Step t = 0; t < network.num_steps(); ++t)
    for (const Contact& c : network.edges(t))
      out << t + 1 << ',' << c.a + 1 << ',' << c.b + 1 << '\n';
}

void save_contacts(const fs::path& path, const DynamicNetwork& network) {
  auto out = open_output(path);
  write_contacts(out, network);
}

// ---------------------------------------------------------------------------

ObservationMatrix read_surveys(std::istream& in, const std::string& source, int num_agents,
                               int num_steps) {
  CsvReader reader(in, source);
  const auto head = reader.header({"t", "agent"});
  const int n_symptoms = static_cast<int>(head.size()) - 2;
  if (n_symptoms < 1) reader.fail("survey header lists no symptoms");
  for (int s = 0; s < n_symptoms; ++s)
    if (head[2 + s] != "s" + std::to_string(s + 1))
      reader.fail("symptom column " + std::to_string(s + 1) + " must be named s" +
                  std::to_string(s + 1));

  ObservationMatrix y(num_agents, num_steps, n_symptoms);
  std::set<std::pair<Step, Agent>> seen;
  std::vector<Report> survey(n_symptoms);
  std::vector<std::string> f;
  while (reader.next(f)) {
    reader.expect_fields(f, head.size());
    const Step t = checked_index(reader, reader.to_int(f[0]), num_steps, "step");
    const Agent n = checked_index(reader, reader.to_int(f[1]), num_agents, "agent");
    if (!seen.insert({t, n}).second)
      reader.fail("duplicate survey for agent " + f[1] + " at step " + f[0]);
    for (int s = 0; s < n_symptoms; ++s) {
      const std::string& v = f[2 + s];
      if (v == "1")
        survey[s] = Report::present;
      else if (v == "0")
        survey[s] = Report::absent;
      else if (v.empty())
        survey[s] = Report::missing;
      else
        reader.fail("symptom values must be 0 or 1, got '" + v + "'");
    }
    y.set_survey(n, t, survey);
  }
  return y;
}

ObservationMatrix load_surveys(const fs::path& path, const DynamicNetwork& network) {
  auto in = open_input(path);
  return read_surveys(in, path.string(), network.num_agents(), network.num_steps());
}

void write_surveys(std::ostream& out, const ObservationMatrix& y) {
  out << "t,agent";
  for (int s = 0; s < y.num_symptoms(); ++s) out << ",s" << s + 1;
  out << '\n';
  for (Step t = 0; t < y.num_steps(); ++t)
    for (Agent n = 0; n < y.num_agents(); ++n) {
      if (!y.surveyed(n, t)) continue;
      out << t + 1 << ',' << n + 1;
      for (Report r : y.survey(n, t))
        out << ',' << (r == Report::present ? "1" : r == Report::absent ? "0" : "");
      out << '\n';
    }
}

void save_surveys(const fs::path& path, const ObservationMatrix& y) {
  auto out = open_output(path);
  write_surveys(out, y);
}

// ---------------------------------------------------------------------------

StateMatrix load_states(const fs::path& path, int num_agents, int num_steps) {
  auto in = open_input(path);
  CsvReader reader(in, path.string());
  reader.header({"t", "agent", "state"}, true);
  StateMatrix x = StateMatrix::Zero(num_agents, num_steps);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(num_agents, num_steps, false);
  std::vector<std::string> f;
  while (reader.next(f)) {
    reader.expect_fields(f, 3);
    const Step t = checked_index(reader, reader.to_int(f[0]), num_steps, "step");
    const Agent n = checked_index(reader, reader.to_int(f[1]), num_agents, "agent");
    const long v = reader.to_int(f[2]);
    if (v != 0 && v != 1) reader.fail("state must be 0 or 1");
    if (seen(n, t)) reader.fail("duplicate state for agent " + f[1] + " at step " + f[0]);
    seen(n, t) = true;
    x(n, t) = static_cast<std::uint8_t>(v);
  }
  if (!seen.all())
    throw ParseError(path.string(), 1,
                     "state file must list every (t, agent) cell of a " + std::to_string(num_agents) +
                         " x " + std::to_string(num_steps) + " matrix");
  return x;
}

void save_states(const fs::path& path, const StateMatrix& x) {
  auto out = open_output(path);
  out << "t,agent,state\n";
  for (Eigen::Index t = 0; t < x.cols(); ++t)
    for (Eigen::Index n = 0; n < x.rows(); ++n)
      out << t + 1 << ',' << n + 1 << ',' << int(x(n, t)) << '\n';
}

StaticGraph load_friends(const fs::path& path, std::optional<int> num_agents) {
  auto in = open_input(path);
  CsvReader reader(in, path.string());
  reader.header({"agent_a", "agent_b"}, true);
  StaticGraph g;
  std::set<Contact> seen;
  int max_agent = 0;
  std::vector<std::string> f;
  while (reader.next(f)) {
    reader.expect_fields(f, 2);
    const Agent a = checked_index(reader, reader.to_int(f[0]), num_agents, "agent");
    const Agent b = checked_index(reader, reader.to_int(f[1]), num_agents, "agent");
    if (a == b) reader.fail("self friendship of agent " + f[0]);
    const Contact c = make_contact(a, b);
    if (!seen.insert(c).second) reader.fail("duplicate friendship");
    g.edges.push_back(c);
    max_agent = std::max({max_agent, a + 1, b + 1});
  }
  g.num_agents = num_agents.value_or(max_agent);
  return g;
}

// ---------------------------------------------------------------------------

LabeledMatrix load_matrix(const fs::path& path) {
  auto in = open_input(path);
  CsvReader reader(in, path.string());
  const auto head = reader.header({"agent"});
  LabeledMatrix m;
  m.col_labels.assign(head.begin() + 1, head.end());
  std::vector<std::vector<double>> rows;
  std::vector<std::string> f;
  while (reader.next(f)) {
    reader.expect_fields(f, head.size());
    m.row_labels.push_back(f[0]);
    std::vector<double> row;
    for (std::size_t j = 1; j < f.size(); ++j) row.push_back(reader.to_double(f[j]));
    rows.push_back(std::move(row));
  }
  m.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(m.col_labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

void save_matrix(const fs::path& path, const LabeledMatrix& m) {
  if (static_cast<Eigen::Index>(m.row_labels.size()) != m.values.rows() ||
      static_cast<Eigen::Index>(m.col_labels.size()) != m.values.cols())
    throw std::invalid_argument("matrix labels do not match its shape");
  auto out = open_output(path);
  out << "agent";
  for (const auto& c : m.col_labels) out << ',' << c;
  out << '\n';
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    out << m.row_labels[i];
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) out << ',' << format_number(m.values(i, j));
    out << '\n';
  }
}

LabeledMatrix marginal_table(const Eigen::MatrixXd& marginals) {
  LabeledMatrix m;
  for (Eigen::Index n = 0; n < marginals.rows(); ++n) m.row_labels.push_back(std::to_string(n + 1));
  for (Eigen::Index t = 0; t < marginals.cols(); ++t) m.col_labels.push_back(std::to_string(t + 1));
  m.values = marginals;
  return m;
}

void save_trace(const fs::path& path, const std::vector<ParamSample>& trace) {
  auto out = open_output(path);
  out << "sample,alpha,beta,gamma";
  const Eigen::Index n_symptoms = trace.empty() ? 0 : trace.front().emissions.rows();
  for (Eigen::Index s = 0; s < n_symptoms; ++s)
    out << ",theta_s" << s + 1 << "_x0,theta_s" << s + 1 << "_x1";
  out << '\n';
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& p = trace[i];
    out << i + 1 << ',' << format_number(p.alpha) << ',' << format_number(p.beta) << ','
        << format_number(p.gamma);
    for (Eigen::Index s = 0; s < n_symptoms; ++s)
      out << ',' << format_number(p.emissions(s, 0)) << ',' << format_number(p.emissions(s, 1));
    out << '\n';
  }
}

void write_roc(std::ostream& out, const std::string& method, const RocCurve& curve) {
  for (const auto& p : curve.points)
    out << method << ',' << format_number(p.fpr) << ',' << format_number(p.tpr) << ','
        << format_number(p.threshold) << '\n';
}

}  // namespace sisnet
