#include "sarsalab/serialize.hpp"

#include <fstream>
#include <sstream>

#include "sarsalab/errors.hpp"

namespace sarsalab {

namespace {

class TokenReader {
 public:
  explicit TokenReader(const std::string& text) : stream_(text) {}

  std::string word(const char* what) {
    std::string token;
    if (!(stream_ >> token)) throw IoError(std::string("expected ") + what);
    return token;
  }

  void expect(const std::string& literal) {
    const std::string token = word(literal.c_str());
    if (token != literal)
      throw IoError("expected '" + literal + "', found '" + token + "'");
  }

  long integer(const char* what) {
    const std::string token = word(what);
    std::size_t used = 0;
    long value = std::stol(token, &used);
    if (used != token.size()) throw IoError(std::string("bad integer for ") + what);
    return value;
  }

  double real(const char* what) {
    const std::string token = word(what);
    std::size_t used = 0;
    double value = std::stod(token, &used);
    if (used != token.size()) throw IoError(std::string("bad real for ") + what);
    return value;
  }

 private:
  std::istringstream stream_;
};

}  // namespace

std::string mdp_to_string(const FiniteMdp& mdp) {
  std::ostringstream out;
  out << "mdp v1\n";
  out << "n_states " << mdp.n_states << "\n";
  out << "n_actions " << mdp.n_actions << "\n";
  out << "gamma " << format_g17(mdp.gamma) << "\n";
  out << "r_max " << format_g17(mdp.r_max) << "\n";
  out << "kernel\n";
  for (int x = 0; x < mdp.n_states; ++x)
    for (int a = 0; a < mdp.n_actions; ++a) {
      const auto row = mdp.kernel_row(x, a);
      for (int y = 0; y < mdp.n_states; ++y)
        out << (y ? " " : "") << format_g17(row[y]);
      out << "\n";
    }
  out << "rewards\n";
  for (int x = 0; x < mdp.n_states; ++x) {
    for (int a = 0; a < mdp.n_actions; ++a)
      out << (a ? " " : "") << format_g17(mdp.reward(x, a));
    out << "\n";
  }
  return out.str();
}

FiniteMdp mdp_from_string(const std::string& text) {
  TokenReader reader(text);
  reader.expect("mdp");
  reader.expect("v1");
  FiniteMdp mdp;
  reader.expect("n_states");
  mdp.n_states = static_cast<int>(reader.integer("n_states"));
  reader.expect("n_actions");
  mdp.n_actions = static_cast<int>(reader.integer("n_actions"));
  reader.expect("gamma");
  mdp.gamma = reader.real("gamma");
  reader.expect("r_max");
  mdp.r_max = reader.real("r_max");
  if (mdp.n_states < 1 || mdp.n_actions < 1) throw IoError("mdp: bad dimensions");
  reader.expect("kernel");
  mdp.kernel.resize(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions * mdp.n_states);
  for (double& v : mdp.kernel) v = reader.real("kernel entry");
  reader.expect("rewards");
  mdp.rewards.resize(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions);
  for (double& v : mdp.rewards) v = reader.real("reward entry");
  mdp.validate();
  return mdp;
}

std::string features_to_string(const FeatureMap& fm) {
  std::ostringstream out;
  out << "features v1\n";
  out << "n_states " << fm.n_states << "\n";
  out << "n_actions " << fm.n_actions << "\n";
  out << "n_features " << fm.n_features << "\n";
  out << "table\n";
  for (int x = 0; x < fm.n_states; ++x)
    for (int a = 0; a < fm.n_actions; ++a) {
      const auto row = fm.row(x, a);
      for (int i = 0; i < fm.n_features; ++i)
        out << (i ? " " : "") << format_g17(row[i]);
      out << "\n";
    }
  return out.str();
}

FeatureMap features_from_string(const std::string& text) {
  TokenReader reader(text);
  reader.expect("features");
  reader.expect("v1");
  FeatureMap fm;
  reader.expect("n_states");
  fm.n_states = static_cast<int>(reader.integer("n_states"));
  reader.expect("n_actions");
  fm.n_actions = static_cast<int>(reader.integer("n_actions"));
  reader.expect("n_features");
  fm.n_features = static_cast<int>(reader.integer("n_features"));
  if (fm.n_states < 1 || fm.n_actions < 1 || fm.n_features < 1)
    throw IoError("features: bad dimensions");
  reader.expect("table");
  fm.table.resize(static_cast<std::size_t>(fm.n_pairs()) * fm.n_features);
  for (double& v : fm.table) v = reader.real("table entry");
  if (fm.max_norm() > 1.0 + 1e-12)
    throw IoError("features: table violates the unit-norm bound");
  return fm;
}

std::string fixed_point_to_string(const FixedPointReport& report) {
  std::ostringstream out;
  out << "fixed_point v1\n";
  out << "n_features " << report.theta_star.size() << "\n";
  out << "theta_star";
  for (Eigen::Index i = 0; i < report.theta_star.size(); ++i)
    out << " " << format_g17(report.theta_star[i]);
  out << "\n";
  out << "residual " << format_g17(report.residual) << "\n";
  out << "w_l " << format_g17(report.w_l) << "\n";
  out << "w_s " << format_g17(report.w_s) << "\n";
  out << "lambda " << format_g17(report.lambda) << "\n";
  out << "c_lipschitz " << format_g17(report.c_lipschitz) << "\n";
  out << "g_const " << format_g17(report.g_const) << "\n";
  out << "radius_used " << format_g17(report.radius_used) << "\n";
  out << "radius_bound " << format_g17(report.radius_bound) << "\n";
  out << "m " << format_g17(report.m) << "\n";
  out << "rho " << format_g17(report.rho) << "\n";
  out << "assumption2_ok " << (report.assumption2_ok ? 1 : 0) << "\n";
  out << "gram_independent " << (report.gram_independent ? 1 : 0) << "\n";
  out << "gram_min_eigenvalue " << format_g17(report.gram_min_eigenvalue) << "\n";
  out << "q_approx_error " << format_g17(report.q_approx_error) << "\n";
  out << "iterations " << report.iterations << "\n";
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void save_mdp(const FiniteMdp& mdp, const std::string& path) {
  write_text_file(path, mdp_to_string(mdp));
}

FiniteMdp load_mdp(const std::string& path) {
  return mdp_from_string(read_text_file(path));
}

void save_features(const FeatureMap& fm, const std::string& path) {
  write_text_file(path, features_to_string(fm));
}

FeatureMap load_features(const std::string& path) {
  return features_from_string(read_text_file(path));
}

void save_fixed_point(const FixedPointReport& report, const std::string& path) {
  write_text_file(path, fixed_point_to_string(report));
}

}  // namespace sarsalab
