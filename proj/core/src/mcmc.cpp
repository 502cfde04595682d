#include "mixcde/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json_io.hpp"
#include "mixcde/distributions.hpp"
#include "mixcde/errors.hpp"

namespace mixcde {

namespace {

constexpr int kChainFormatVersion = 1;

const char* const kStepNames[] = {"beta", "mu_x", "local_scale", "global_scale", "weights"};

struct SweepCount {
  long proposed = 0;
  long accepted = 0;
};

class Sampler {
 public:
  Sampler(const Dataset& data, const PriorHyper& hyper, const McmcOptions& opt)
      : data_(data), hyper_(hyper), opt_(opt), rng_(make_rng(opt.seed, 0)) {}

  Chain run() {
    if (opt_.n_iter < 1) throw DomainError("run_chain: n_iter must be >= 1");
    if (opt_.burn_in < 0 || opt_.burn_in >= opt_.n_iter)
      throw DomainError("run_chain: need 0 <= burn_in < n_iter");
    if (opt_.m_max < 1) throw DomainError("run_chain: m_max must be >= 1");
    hyper_.validate();
    data_.validate();
    if (data_.n() > 0 && data_.d_x() != hyper_.d_x())
      throw DimensionError("run_chain: dataset d_x != hyper d_x");

    for (const char* name : kStepNames) logstep_[name] = std::log(0.1);
    init_state();

    Chain chain;
    chain.n_iter = opt_.n_iter;
    chain.burn_in = opt_.burn_in;
    chain.m_max = opt_.m_max;
    chain.seed = opt_.seed;
    chain.draws.reserve(static_cast<size_t>(opt_.n_iter - opt_.burn_in));
    chain.m_trace.reserve(static_cast<size_t>(opt_.n_iter));
    std::vector<double> logposts;
    logposts.reserve(static_cast<size_t>(opt_.n_iter - opt_.burn_in));

    if (opt_.burn_in == 0)
      for (const char* name : kStepNames) chain.step_at_burnin[name] = std::exp(logstep_[name]);

    for (int iter = 0; iter < opt_.n_iter; ++iter) {
      sweep_.clear();
      update_components();
      update_global_scales();
      update_weights();
      if (!opt_.fix_m) birth_death();

      if (iter < opt_.burn_in) {
        adapt(iter);
        if (iter == opt_.burn_in - 1)
          for (const char* name : kStepNames)
            chain.step_at_burnin[name] = std::exp(logstep_[name]);
      }

      chain.m_trace.push_back(theta_.m);
      if (iter >= opt_.burn_in) {
        chain.draws.push_back(theta_);
        logposts.push_back(loglik_ + logprior_);
      }
    }

    chain.logposts =
        Eigen::Map<Eigen::VectorXd>(logposts.data(), static_cast<Eigen::Index>(logposts.size()));
    for (const char* name : kStepNames) chain.step_final[name] = std::exp(logstep_[name]);
    chain.moves = moves_;
    return chain;
  }

 private:
  double norm() { return normal_(rng_); }
  double unif() { return u01_(rng_); }

  // Occasional wide proposals let the walk cross between separated modes.
  // The implied proposal kernel is a symmetric two-scale mixture, so no
  // Hastings correction is needed.
  double wide() { return unif() < 0.1 ? 8.0 : 1.0; }

  void refresh_logw() {
    logw_.resize(theta_.m);
    for (int j = 0; j < theta_.m; ++j)
      logw_[j] = theta_.weights[j] > 0.0 ? std::log(theta_.weights[j]) : kNegInf;
  }

  void fill_columns(MixtureTheta& theta, Eigen::MatrixXd& gate, Eigen::MatrixXd& resp, int j) {
    detail::fill_gate_column(theta, data_.x, j, gate.col(j));
    detail::fill_resp_column(theta, data_.y, data_.x, j, resp.col(j));
  }

  void rebuild_all() {
    gate_.resize(data_.n(), theta_.m);
    resp_.resize(data_.n(), theta_.m);
    for (int j = 0; j < theta_.m; ++j) fill_columns(theta_, gate_, resp_, j);
    refresh_logw();
  }

  double cached_loglik() const { return detail::loglik_from_columns(logw_, gate_, resp_); }

  void init_state() {
    const int m0 = std::clamp(opt_.init_m, 1, opt_.m_max);
    if (data_.n() > 0 && init_from_data(m0)) return;
    for (int attempt = 0; attempt < 100; ++attempt) {
      theta_ = MixtureTheta{};
      theta_.m = m0;
      theta_.weights =
          sample_dirichlet(Eigen::VectorXd::Constant(m0, hyper_.a / m0), rng_);
      theta_.comp.clear();
      for (int j = 0; j < m0; ++j) theta_.comp.push_back(sample_component(hyper_, rng_));
      theta_.sigma_y = 1.0 / sample_gamma(hyper_.sigma_y_inv.shape, hyper_.sigma_y_inv.rate, rng_);
      theta_.sigma_x.resize(hyper_.d_x());
      for (int k = 0; k < hyper_.d_x(); ++k)
        theta_.sigma_x[k] =
            1.0 / sample_gamma(hyper_.sigma_x_inv[k].shape, hyper_.sigma_x_inv[k].rate, rng_);
      rebuild_all();
      logprior_ = log_prior_density(theta_, hyper_, opt_.m_max);
      loglik_ = cached_loglik();
      if (std::isfinite(logprior_ + loglik_)) return;
    }
    throw Error(
        "run_chain: log-posterior not finite after 100 initialization draws; "
        "data scale likely incompatible with the prior hyperparameters");
  }

  // Spreads components over the data quantiles with unit local scales and
  // residual-scale globals. Falls back to prior draws (return false) if the
  // resulting log-posterior is not finite.
  bool init_from_data(int m0) {
    const int d = hyper_.d_x();
    theta_ = MixtureTheta{};
    theta_.m = m0;
    theta_.weights = Eigen::VectorXd::Constant(m0, 1.0 / m0);
    theta_.sigma_y = hyper_.sigma_y_inv.rate / hyper_.sigma_y_inv.shape;
    theta_.sigma_x.resize(d);
    for (int k = 0; k < d; ++k)
      theta_.sigma_x[k] = hyper_.sigma_x_inv[k].rate / hyper_.sigma_x_inv[k].shape;
    for (int j = 0; j < m0; ++j) {
      const double p = (j + 0.5) / m0;
      Component c;
      c.beta = Eigen::VectorXd::Zero(d + 1);
      c.beta[0] = (m0 > 1 ? empirical_quantile(data_.y, p) : data_.y.mean()) +
                  0.01 * theta_.sigma_y * norm();
      c.mu_x.resize(d);
      c.s_x = Eigen::VectorXd::Ones(d);
      c.s_y = 1.0;
      for (int k = 0; k < d; ++k)
        c.mu_x[k] = (m0 > 1 ? empirical_quantile(data_.x.col(k), p) : data_.x.col(k).mean()) +
                    0.05 * theta_.sigma_x[k] * norm();
      theta_.comp.push_back(std::move(c));
    }
    rebuild_all();
    logprior_ = log_prior_density(theta_, hyper_, opt_.m_max);
    loglik_ = cached_loglik();
    return std::isfinite(logprior_ + loglik_);
  }

  // Shared acceptance step; extra carries Hastings/Jacobian corrections.
  bool try_accept(const char* name, double loglik_new, double logprior_new, double extra) {
    moves_[name].proposed += 1;
    sweep_[name].proposed += 1;
    const double log_ratio = (loglik_new - loglik_) + (logprior_new - logprior_) + extra;
    bool ok;
    if (std::isnan(log_ratio))
      ok = false;
    else if (log_ratio >= 0.0)
      ok = true;
    else
      ok = std::log(unif()) < log_ratio;
    if (ok) {
      loglik_ = loglik_new;
      logprior_ = logprior_new;
      moves_[name].accepted += 1;
      sweep_[name].accepted += 1;
    }
    return ok;
  }

  void update_components() {
    const int d = theta_.d_x();
    const double s_beta = std::exp(logstep_["beta"]);
    const double s_mu = std::exp(logstep_["mu_x"]);
    const double s_loc = std::exp(logstep_["local_scale"]);

    for (int j = 0; j < theta_.m; ++j) {
      {  // beta: response column only
        Eigen::VectorXd old = theta_.comp[j].beta;
        col_bak_ = resp_.col(j);
        const double sb = s_beta * wide();
        for (Eigen::Index i = 0; i < old.size(); ++i)
          theta_.comp[j].beta[i] += sb * norm();
        detail::fill_resp_column(theta_, data_.y, data_.x, j, resp_.col(j));
        const double lp = log_prior_density(theta_, hyper_, opt_.m_max);
        const double ll = cached_loglik();
        if (!try_accept("beta", ll, lp, 0.0)) {
          theta_.comp[j].beta = std::move(old);
          resp_.col(j) = col_bak_;
        }
      }
      if (d > 0) {  // gate location: gate column only
        Eigen::VectorXd old = theta_.comp[j].mu_x;
        col_bak_ = gate_.col(j);
        const double sm = s_mu * wide();
        for (Eigen::Index i = 0; i < old.size(); ++i)
          theta_.comp[j].mu_x[i] += sm * norm();
        detail::fill_gate_column(theta_, data_.x, j, gate_.col(j));
        const double lp = log_prior_density(theta_, hyper_, opt_.m_max);
        const double ll = cached_loglik();
        if (!try_accept("mu_x", ll, lp, 0.0)) {
          theta_.comp[j].mu_x = std::move(old);
          gate_.col(j) = col_bak_;
        }
      }
      {  // local scales, jointly on logs; random walk in log space
        const double old_sy = theta_.comp[j].s_y;
        Eigen::VectorXd old_sx = theta_.comp[j].s_x;
        col_bak_ = resp_.col(j);
        col_bak2_ = gate_.col(j);
        const double sl = s_loc * wide();
        double extra = 0.0;
        {
          const double inc = sl * norm();
          theta_.comp[j].s_y = old_sy * std::exp(inc);
          extra += inc;
        }
        for (int k = 0; k < d; ++k) {
          const double inc = sl * norm();
          theta_.comp[j].s_x[k] = old_sx[k] * std::exp(inc);
          extra += inc;
        }
        fill_columns(theta_, gate_, resp_, j);
        const double lp = log_prior_density(theta_, hyper_, opt_.m_max);
        const double ll = cached_loglik();
        if (!try_accept("local_scale", ll, lp, extra)) {
          theta_.comp[j].s_y = old_sy;
          theta_.comp[j].s_x = std::move(old_sx);
          resp_.col(j) = col_bak_;
          gate_.col(j) = col_bak2_;
        }
      }
    }
  }

  void update_global_scales() {
    const int d = theta_.d_x();
    const double s = std::exp(logstep_["global_scale"]) * wide();
    const double old_sy = theta_.sigma_y;
    Eigen::VectorXd old_sx = theta_.sigma_x;
    gate_bak_ = gate_;
    resp_bak_ = resp_;

    double extra = 0.0;
    {
      const double inc = s * norm();
      theta_.sigma_y = old_sy * std::exp(inc);
      extra += inc;
    }
    for (int k = 0; k < d; ++k) {
      const double inc = s * norm();
      theta_.sigma_x[k] = old_sx[k] * std::exp(inc);
      extra += inc;
    }
    for (int j = 0; j < theta_.m; ++j) fill_columns(theta_, gate_, resp_, j);
    const double lp = log_prior_density(theta_, hyper_, opt_.m_max);
    const double ll = cached_loglik();
    if (!try_accept("global_scale", ll, lp, extra)) {
      theta_.sigma_y = old_sy;
      theta_.sigma_x = std::move(old_sx);
      gate_.swap(gate_bak_);
      resp_.swap(resp_bak_);
    }
  }

  void update_weights() {
    const int m = theta_.m;
    if (m < 2) return;
    const double s = std::exp(logstep_["weights"]) * wide();

    Eigen::VectorXd old_w = theta_.weights;
    Eigen::VectorXd old_logw = logw_;

    // Additive logistic coordinates relative to the last component.
    Eigen::VectorXd lv(m);
    for (int j = 0; j < m - 1; ++j) lv[j] = (logw_[j] - logw_[m - 1]) + s * norm();
    lv[m - 1] = 0.0;
    const double mx = lv.maxCoeff();
    Eigen::VectorXd w = (lv.array() - mx).exp();
    w /= w.sum();

    // Transform density factor: d alpha / d v = prod_j alpha_j.
    double extra = 0.0;
    for (int j = 0; j < m; ++j) {
      if (!(w[j] > 0.0)) {
        extra = kNegInf;
        break;
      }
      extra += std::log(w[j]) - old_logw[j];
    }

    theta_.weights = w;
    refresh_logw();
    const double lp = log_prior_density(theta_, hyper_, opt_.m_max);
    const double ll = cached_loglik();
    if (!try_accept("weights", ll, lp, extra)) {
      theta_.weights = std::move(old_w);
      logw_ = std::move(old_logw);
    }
  }

  void birth_death() {
    const int m = theta_.m;
    const int n = data_.n();
    if (unif() < 0.5) {
      moves_["birth"].proposed += 1;
      if (m >= opt_.m_max) return;

      Component fresh = sample_component(hyper_, rng_);
      const double u = sample_beta(1.0, static_cast<double>(m), rng_);
      if (!(u > 0.0 && u < 1.0)) return;

      MixtureTheta tnew = theta_;
      tnew.m = m + 1;
      tnew.weights.conservativeResize(m + 1);
      tnew.weights.head(m) *= (1.0 - u);
      tnew.weights[m] = u;
      tnew.weights /= tnew.weights.sum();
      tnew.comp.push_back(fresh);

      Eigen::MatrixXd gate(n, m + 1), resp(n, m + 1);
      gate.leftCols(m) = gate_;
      resp.leftCols(m) = resp_;
      fill_columns(tnew, gate, resp, m);
      Eigen::VectorXd logw(m + 1);
      for (int j = 0; j <= m; ++j)
        logw[j] = tnew.weights[j] > 0.0 ? std::log(tnew.weights[j]) : kNegInf;

      const double lp = log_prior_density(tnew, hyper_, opt_.m_max);
      const double ll = detail::loglik_from_columns(logw, gate, resp);
      // Proposal terms: the fresh component's prior density cancels against
      // its factor inside lp; the Beta(1, m) density of u collapses with the
      // weight-rescaling Jacobian (1-u)^(m-1) to 1/m.
      const double log_ratio = (ll - loglik_) + (lp - logprior_) -
                               log_component_prior(fresh, hyper_) -
                               std::log(static_cast<double>(m));
      bool ok;
      if (std::isnan(log_ratio))
        ok = false;
      else if (log_ratio >= 0.0)
        ok = true;
      else
        ok = std::log(unif()) < log_ratio;
      if (ok) {
        moves_["birth"].accepted += 1;
        theta_ = std::move(tnew);
        gate_ = std::move(gate);
        resp_ = std::move(resp);
        logw_ = std::move(logw);
        loglik_ = ll;
        logprior_ = lp;
      }
    } else {
      moves_["death"].proposed += 1;
      if (m <= 1) return;

      std::uniform_int_distribution<int> pick(0, m - 1);
      const int k = pick(rng_);
      const double ak = theta_.weights[k];
      if (!(1.0 - ak > 0.0)) return;

      MixtureTheta tnew = theta_;
      tnew.m = m - 1;
      tnew.comp.erase(tnew.comp.begin() + k);
      Eigen::VectorXd w(m - 1);
      for (int j = 0, c = 0; j < m; ++j)
        if (j != k) w[c++] = theta_.weights[j] / (1.0 - ak);
      w /= w.sum();
      tnew.weights = w;

      Eigen::MatrixXd gate(n, m - 1), resp(n, m - 1);
      for (int j = 0, c = 0; j < m; ++j) {
        if (j == k) continue;
        gate.col(c) = gate_.col(j);
        resp.col(c) = resp_.col(j);
        ++c;
      }
      Eigen::VectorXd logw(m - 1);
      for (int j = 0; j < m - 1; ++j)
        logw[j] = tnew.weights[j] > 0.0 ? std::log(tnew.weights[j]) : kNegInf;

      const double lp = log_prior_density(tnew, hyper_, opt_.m_max);
      const double ll = detail::loglik_from_columns(logw, gate, resp);
      const double log_ratio = (ll - loglik_) + (lp - logprior_) +
                               log_component_prior(theta_.comp[k], hyper_) +
                               std::log(static_cast<double>(m - 1));
      bool ok;
      if (std::isnan(log_ratio))
        ok = false;
      else if (log_ratio >= 0.0)
        ok = true;
      else
        ok = std::log(unif()) < log_ratio;
      if (ok) {
        moves_["death"].accepted += 1;
        theta_ = std::move(tnew);
        gate_ = std::move(gate);
        resp_ = std::move(resp);
        logw_ = std::move(logw);
        loglik_ = ll;
        logprior_ = lp;
      }
    }
  }

  void adapt(int iter) {
    const double gamma = std::pow(static_cast<double>(iter + 1), -0.6);
    for (auto& [name, sc] : sweep_) {
      auto it = logstep_.find(name);
      if (it == logstep_.end() || sc.proposed == 0) continue;
      const double rate = static_cast<double>(sc.accepted) / static_cast<double>(sc.proposed);
      it->second = std::clamp(it->second + gamma * (rate - opt_.target_accept), -14.0, 7.0);
    }
  }

  const Dataset& data_;
  const PriorHyper& hyper_;
  McmcOptions opt_;
  Rng rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> u01_{0.0, 1.0};

  MixtureTheta theta_;
  Eigen::MatrixXd gate_, resp_;
  Eigen::VectorXd logw_;
  double loglik_ = 0.0;
  double logprior_ = 0.0;

  std::map<std::string, double> logstep_;
  std::map<std::string, MoveStats> moves_;
  std::map<std::string, SweepCount> sweep_;
  Eigen::VectorXd col_bak_, col_bak2_;
  Eigen::MatrixXd gate_bak_, resp_bak_;
};

}  // namespace

Chain run_chain(const Dataset& data, const PriorHyper& hyper, const McmcOptions& opt) {
  return Sampler(data, hyper, opt).run();
}

Chain run_chain(const Dataset& data, const PriorHyper& hyper, int n_iter, int burn_in, int m_max,
                std::uint64_t seed) {
  McmcOptions opt;
  opt.n_iter = n_iter;
  opt.burn_in = burn_in;
  opt.m_max = m_max;
  opt.seed = seed;
  return run_chain(data, hyper, opt);
}

double effective_sample_size(const Eigen::VectorXd& series) {
  const Eigen::Index n = series.size();
  if (n == 0) throw DomainError("effective_sample_size: empty series");
  if (n == 1) return 1.0;
  const Eigen::VectorXd c = series.array() - series.mean();
  const double g0 = c.squaredNorm() / static_cast<double>(n);
  if (!(g0 > 0.0)) return static_cast<double>(n);

  auto gamma_k = [&](Eigen::Index k) {
    double s = 0.0;
    for (Eigen::Index i = 0; i + k < n; ++i) s += c[i] * c[i + k];
    return s / static_cast<double>(n);
  };

  // Initial positive sequence: sum paired autocovariances while positive.
  double acc = 0.0;
  for (Eigen::Index t = 0; 2 * t < n; ++t) {
    const double pair = gamma_k(2 * t) + (2 * t + 1 < n ? gamma_k(2 * t + 1) : 0.0);
    if (pair <= 0.0) break;
    acc += pair;
    if (2 * t > n / 2) break;
  }
  const double tau = std::max(1.0, 2.0 * acc / g0 - 1.0);
  return std::min(static_cast<double>(n), static_cast<double>(n) / tau);
}

ChainDiagnostics diagnostics(const Chain& chain) {
  if (chain.draws.empty()) throw DomainError("diagnostics: empty chain");
  ChainDiagnostics d;
  for (const auto& [name, stats] : chain.moves) d.acceptance[name] = stats.rate();
  const double inc = 1.0 / static_cast<double>(chain.draws.size());
  for (const MixtureTheta& t : chain.draws) d.m_histogram[t.m] += inc;
  d.logpost_mean = chain.logposts.mean();
  d.logpost_sd = std::sqrt(
      (chain.logposts.array() - d.logpost_mean).square().sum() /
      static_cast<double>(chain.logposts.size()));
  d.ess_logpost = effective_sample_size(chain.logposts);
  return d;
}

void save_chain(const Chain& chain, const std::string& path) {
  nlohmann::json header;
  header["format"] = "mixcde-chain";
  header["version"] = kChainFormatVersion;
  header["n_iter"] = chain.n_iter;
  header["burn_in"] = chain.burn_in;
  header["m_max"] = chain.m_max;
  header["seed"] = chain.seed;
  header["n_draws"] = chain.draws.size();
  nlohmann::json moves = nlohmann::json::object();
  for (const auto& [name, stats] : chain.moves)
    moves[name] = {{"proposed", stats.proposed}, {"accepted", stats.accepted}};
  header["moves"] = std::move(moves);
  header["step_at_burnin"] = chain.step_at_burnin;
  header["step_final"] = chain.step_final;
  header["m_trace"] = chain.m_trace;
  nlohmann::json lps = nlohmann::json::array();
  for (Eigen::Index i = 0; i < chain.logposts.size(); ++i) lps.push_back(chain.logposts[i]);
  header["logposts"] = std::move(lps);

  std::ofstream out(path);
  if (!out) throw Error("save_chain: cannot open " + path);
  out << header.dump() << "\n";
  for (const MixtureTheta& t : chain.draws) out << detail::theta_to_json(t).dump() << "\n";
  if (!out) throw Error("save_chain: write failed for " + path);
}

Chain load_chain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_chain: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("load_chain: empty file", 1);

  nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded()) throw ParseError("load_chain: malformed header", 1);

  Chain chain;
  try {
    if (header.at("format").get<std::string>() != "mixcde-chain")
      throw ParseError("load_chain: not a chain file", 1);
    const int version = header.at("version").get<int>();
    if (version != kChainFormatVersion)
      throw UnsupportedVersionError(
          "load_chain: unsupported chain format version " + std::to_string(version), 1);
    chain.n_iter = header.at("n_iter").get<int>();
    chain.burn_in = header.at("burn_in").get<int>();
    chain.m_max = header.at("m_max").get<int>();
    chain.seed = header.at("seed").get<std::uint64_t>();
    for (const auto& [name, j] : header.at("moves").items()) {
      MoveStats s;
      s.proposed = j.at("proposed").get<long>();
      s.accepted = j.at("accepted").get<long>();
      chain.moves[name] = s;
    }
    chain.step_at_burnin =
        header.at("step_at_burnin").get<std::map<std::string, double>>();
    chain.step_final = header.at("step_final").get<std::map<std::string, double>>();
    chain.m_trace = header.at("m_trace").get<std::vector<int>>();
    const auto& lps = header.at("logposts");
    chain.logposts.resize(static_cast<Eigen::Index>(lps.size()));
    Eigen::Index i = 0;
    for (const auto& v : lps) chain.logposts[i++] = v.get<double>();

    const size_t n_draws = header.at("n_draws").get<size_t>();
    chain.draws.reserve(n_draws);
    long line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) throw ParseError("load_chain: malformed draw", line_no);
      chain.draws.push_back(detail::theta_from_json(j));
    }
    if (chain.draws.size() != n_draws)
      throw ParseError("load_chain: draw count mismatch (truncated file?)", line_no);
    if (chain.logposts.size() != static_cast<Eigen::Index>(n_draws))
      throw ParseError("load_chain: logposts length mismatch", 1);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("load_chain: ") + e.what(), 1);
  }
  return chain;
}

}  // namespace mixcde
