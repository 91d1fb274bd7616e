#include "rdopt/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rdopt/csv.hpp"
#include "rdopt/errors.hpp"

namespace rdopt {

std::string RunConfig::resolved_dataset_path() const {
  if (!dataset_path.empty()) return dataset_path;
  return out_dir + "/samples.csv";
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_num(const std::string& v, int line_no) {
  if (v == "inf") return std::numeric_limits<double>::infinity();
  const char* begin = v.c_str();
  char* end = nullptr;
  const double out = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw ParseError("config line " + std::to_string(line_no) + ": not a number: '" + v + "'");
  }
  return out;
}

int parse_int(const std::string& v, int line_no) {
  const double d = parse_num(v, line_no);
  const int i = static_cast<int>(d);
  if (static_cast<double>(i) != d) {
    throw ParseError("config line " + std::to_string(line_no) + ": expected integer: '" + v + "'");
  }
  return i;
}

bool parse_bool(const std::string& v, int line_no) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ParseError("config line " + std::to_string(line_no) + ": expected true/false: '" + v + "'");
}

std::uint64_t parse_u64(const std::string& v, int line_no) {
  const char* begin = v.c_str();
  char* end = nullptr;
  const unsigned long long out = std::strtoull(begin, &end, 10);
  if (end == begin || *end != '\0') {
    throw ParseError("config line " + std::to_string(line_no) +
                     ": expected unsigned integer: '" + v + "'");
  }
  return out;
}

std::string num_str(double v) {
  if (std::isinf(v)) return "inf";
  return fmt17(v);
}

}  // namespace

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);

  RunConfig c;
  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      if (section != "dataset" && section != "gpr" && section != "uncertainty" &&
          section != "pce" && section != "problem" && section != "output") {
        throw ParseError("config line " + std::to_string(line_no) +
                         ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string qual = section + "." + key;

    if (qual == "dataset.synthetic") c.synthetic = parse_bool(value, line_no);
    else if (qual == "dataset.path") c.dataset_path = value;
    else if (qual == "dataset.seed") c.seed = parse_u64(value, line_no);
    else if (qual == "dataset.n_boundary") c.n_boundary = parse_int(value, line_no);
    else if (qual == "dataset.n_interior") c.n_interior = parse_int(value, line_no);
    else if (qual == "gpr.alpha") c.alpha = parse_num(value, line_no);
    else if (qual == "gpr.hyperparameters") {
      if (value != "auto" && value != "fixed") {
        throw ParseError("config line " + std::to_string(line_no) +
                         ": hyperparameters must be 'auto' or 'fixed'");
      }
      c.hyperparameters = value;
    }
    else if (qual == "gpr.sigma_f") c.sigma_f = parse_num(value, line_no);
    else if (qual == "gpr.l") c.l = parse_num(value, line_no);
    else if (qual == "uncertainty.ex") c.ex = parse_num(value, line_no);
    else if (qual == "pce.order") c.order = parse_int(value, line_no);
    else if (qual == "problem.kind") c.problem = parse_int(value, line_no);
    else if (qual == "problem.omega") c.omega = parse_num(value, line_no);
    else if (qual == "problem.sigma1_bound") c.sigma1_bound = parse_num(value, line_no);
    else if (qual == "problem.sigma2_bound") c.sigma2_bound = parse_num(value, line_no);
    else if (qual == "problem.bound") c.bound = parse_num(value, line_no);
    else if (qual == "problem.k_sigma") c.k_sigma = parse_num(value, line_no);
    else if (qual == "problem.pareto_points") c.pareto_points = parse_int(value, line_no);
    else if (qual == "problem.bound_min") c.bound_min = parse_num(value, line_no);
    else if (qual == "problem.bound_max") c.bound_max = parse_num(value, line_no);
    else if (qual == "problem.bound_count") c.bound_count = parse_int(value, line_no);
    else if (qual == "output.dir") c.out_dir = value;
    else if (qual == "output.grid_n1") c.grid_n1 = parse_int(value, line_no);
    else if (qual == "output.grid_n2") c.grid_n2 = parse_int(value, line_no);
    else if (qual == "output.domain") {
      if (value != "unit" && value != "extended") {
        throw ParseError("config line " + std::to_string(line_no) +
                         ": domain must be 'unit' or 'extended'");
      }
      c.domain = value;
    }
    else {
      throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" + qual + "'");
    }
  }
  return c;
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "[dataset]\n";
  out << "synthetic = " << (c.synthetic ? "true" : "false") << "\n";
  out << "path = " << c.dataset_path << "\n";
  out << "seed = " << c.seed << "\n";
  out << "n_boundary = " << c.n_boundary << "\n";
  out << "n_interior = " << c.n_interior << "\n";
  out << "[gpr]\n";
  out << "alpha = " << num_str(c.alpha) << "\n";
  out << "hyperparameters = " << c.hyperparameters << "\n";
  out << "sigma_f = " << num_str(c.sigma_f) << "\n";
  out << "l = " << num_str(c.l) << "\n";
  out << "[uncertainty]\n";
  out << "ex = " << num_str(c.ex) << "\n";
  out << "[pce]\n";
  out << "order = " << c.order << "\n";
  out << "[problem]\n";
  out << "kind = " << c.problem << "\n";
  out << "omega = " << num_str(c.omega) << "\n";
  out << "sigma1_bound = " << num_str(c.sigma1_bound) << "\n";
  out << "sigma2_bound = " << num_str(c.sigma2_bound) << "\n";
  out << "bound = " << num_str(c.bound) << "\n";
  out << "k_sigma = " << num_str(c.k_sigma) << "\n";
  out << "pareto_points = " << c.pareto_points << "\n";
  out << "bound_min = " << num_str(c.bound_min) << "\n";
  out << "bound_max = " << num_str(c.bound_max) << "\n";
  out << "bound_count = " << c.bound_count << "\n";
  out << "[output]\n";
  out << "dir = " << c.out_dir << "\n";
  out << "grid_n1 = " << c.grid_n1 << "\n";
  out << "grid_n2 = " << c.grid_n2 << "\n";
  out << "domain = " << c.domain << "\n";
  return out.str();
}

void write_config_file(const std::string& path, const RunConfig& config) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write config file: " + path);
  out << serialize_config(config);
}

}  // namespace rdopt
