#include "mixcde/serialize.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json_io.hpp"
#include "mixcde/errors.hpp"

namespace mixcde {

namespace detail {

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ParseError("expected a JSON array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& e : j) v[i++] = e.get<double>();
  return v;
}

nlohmann::json theta_to_json(const MixtureTheta& theta) {
  nlohmann::json j;
  j["m"] = theta.m;
  j["weights"] = vec_to_json(theta.weights);
  nlohmann::json comps = nlohmann::json::array();
  for (const Component& c : theta.comp) {
    nlohmann::json jc;
    jc["beta"] = vec_to_json(c.beta);
    jc["mu_x"] = vec_to_json(c.mu_x);
    jc["s_y"] = c.s_y;
    jc["s_x"] = vec_to_json(c.s_x);
    comps.push_back(std::move(jc));
  }
  j["components"] = std::move(comps);
  j["sigma_y"] = theta.sigma_y;
  j["sigma_x"] = vec_to_json(theta.sigma_x);
  return j;
}

MixtureTheta theta_from_json(const nlohmann::json& j) {
  MixtureTheta t;
  t.m = j.at("m").get<int>();
  t.weights = vec_from_json(j.at("weights"));
  for (const auto& jc : j.at("components")) {
    Component c;
    c.beta = vec_from_json(jc.at("beta"));
    c.mu_x = vec_from_json(jc.at("mu_x"));
    c.s_y = jc.at("s_y").get<double>();
    c.s_x = vec_from_json(jc.at("s_x"));
    t.comp.push_back(std::move(c));
  }
  t.sigma_y = j.at("sigma_y").get<double>();
  t.sigma_x = vec_from_json(j.at("sigma_x"));
  t.validate();
  return t;
}

}  // namespace detail

std::string to_json_string(const MixtureTheta& theta) {
  return detail::theta_to_json(theta).dump();
}

MixtureTheta theta_from_json_string(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("invalid JSON for MixtureTheta");
  try {
    return detail::theta_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("MixtureTheta JSON: ") + e.what());
  }
}

std::string to_json_string(const Bandwidths& bw) {
  nlohmann::json j;
  j["h_y"] = bw.h_y;
  j["h_x"] = detail::vec_to_json(bw.h_x);
  return j.dump();
}

Bandwidths bandwidths_from_json_string(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("invalid JSON for Bandwidths");
  try {
    Bandwidths bw;
    bw.h_y = j.at("h_y").get<double>();
    bw.h_x = detail::vec_from_json(j.at("h_x"));
    bw.validate();
    return bw;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("Bandwidths JSON: ") + e.what());
  }
}

void save_dataset_csv(const Dataset& data, const std::string& path) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw Error("save_dataset_csv: cannot open " + path);
  out << "# mixcde-dataset v1\n";
  out << "y";
  for (int k = 1; k <= data.d_x(); ++k) out << ",x" << k;
  out << "\n";
  char buf[40];
  for (int i = 0; i < data.n(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", data.y[i]);
    out << buf;
    for (int k = 0; k < data.d_x(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.x(i, k));
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out) throw Error("save_dataset_csv: write failed for " + path);
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_dataset_csv: cannot open " + path);
  std::string line;
  long line_no = 0;
  // Comment lines (format-version and the like) may precede the header.
  do {
    if (!std::getline(in, line)) throw ParseError("load_dataset_csv: missing header", line_no);
    ++line_no;
  } while (line.empty() || line.front() == '#');

  long n_cols = 1;
  for (char ch : line)
    if (ch == ',') ++n_cols;
  if (line.rfind("y", 0) != 0) throw ParseError("load_dataset_csv: missing header", line_no);
  const long d = n_cols - 1;

  std::vector<double> ys;
  std::vector<double> xs;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ss(line);
    std::string cell;
    for (long c = 0; c < n_cols; ++c) {
      if (!std::getline(ss, cell, ','))
        throw ParseError("load_dataset_csv: short row", line_no);
      try {
        const double v = std::stod(cell);
        if (c == 0)
          ys.push_back(v);
        else
          xs.push_back(v);
      } catch (const std::exception&) {
        throw ParseError("load_dataset_csv: bad number '" + cell + "'", line_no);
      }
    }
    if (std::getline(ss, cell, ','))
      throw ParseError("load_dataset_csv: too many cells", line_no);
  }

  Dataset data;
  data.y = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  data.x.resize(static_cast<Eigen::Index>(ys.size()), d);
  for (size_t i = 0; i < ys.size(); ++i)
    for (long k = 0; k < d; ++k) data.x(static_cast<Eigen::Index>(i), k) = xs[i * d + k];
  data.validate();
  return data;
}

}  // namespace mixcde
