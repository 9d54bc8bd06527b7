#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sisnet/evaluation.hpp"
#include "sisnet/inference.hpp"
#include "sisnet/model.hpp"
#include "sisnet/network.hpp"

// Delimited text formats. Every file is UTF-8, comma separated, with a
// header line. Agent and step indices are 1-based on disk and 0-based in
// memory.
//
//   contacts   t,agent_a,agent_b        one row per contact, agent_a < agent_b
//   surveys    t,agent,s1,...,sS        one row per submitted survey, values 0/1
//   states     t,agent,state            every (t, agent) cell
//   friends    agent_a,agent_b          static graph
//   matrix     agent,<col labels...>    dense N x T real matrix

namespace sisnet {

/// Malformed input; the message carries "path:line: reason".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, int line, const std::string& reason);
  int line() const { return line_; }

 private:
  int line_;
};

namespace fs = std::filesystem;

/// Dimensions not supplied are inferred from the largest index seen.
DynamicNetwork load_contacts(const fs::path& path, std::optional<int> num_agents = std::nullopt,
                             std::optional<int> num_steps = std::nullopt);
DynamicNetwork read_contacts(std::istream& in, const std::string& source,
                             std::optional<int> num_agents, std::optional<int> num_steps);
void save_contacts(const fs::path& path, const DynamicNetwork& network);
void write_contacts(std::ostream& out, const DynamicNetwork& network);

ObservationMatrix load_surveys(const fs::path& path, const DynamicNetwork& network);
ObservationMatrix read_surveys(std::istream& in, const std::string& source, int num_agents,
                               int num_steps);
void save_surveys(const fs::path& path, const ObservationMatrix& y);
void write_surveys(std::ostream& out, const ObservationMatrix& y);

StateMatrix load_states(const fs::path& path, int num_agents, int num_steps);
void save_states(const fs::path& path, const StateMatrix& x);

StaticGraph load_friends(const fs::path& path, std::optional<int> num_agents = std::nullopt);

struct LabeledMatrix {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  Eigen::MatrixXd values;
};

LabeledMatrix load_matrix(const fs::path& path);
void save_matrix(const fs::path& path, const LabeledMatrix& m);

/// Marginals with rows labelled by 1-based agent id and columns by 1-based step.
LabeledMatrix marginal_table(const Eigen::MatrixXd& marginals);

void save_trace(const fs::path& path, const std::vector<ParamSample>& trace);

/// Rows: method,fpr,tpr,threshold.
void write_roc(std::ostream& out, const std::string& method, const RocCurve& curve);

/// Shortest round-trip decimal representation used by every writer.
std::string format_number(double v);

}  // namespace sisnet
