// Copyright 2026 The Tutorlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tutorlab/analytics/afm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tutorlab/common/error.hpp"

namespace tutorlab::analytics {
namespace {

// Dense view of an AfmModel over one table: x = [theta | beta | gamma].
struct Problem {
  const OpportunityTable& table;
  double lambda = 1.0;
  std::vector<double> penalty;  // per KC
  bool zero_based = false;

  std::size_t students() const { return table.students.size(); }
  std::size_t kcs() const { return table.kcs.size(); }
  std::size_t size() const { return students() + 2 * kcs(); }
  std::size_t beta(int k) const { return students() + k; }
  std::size_t gamma(int k) const { return students() + kcs() + k; }

  double practice(int t) const { return zero_based ? t - 1 : t; }

  double eta(const std::vector<double>& x, const OpportunityRow& row) const {
    double e = x[row.student];
    for (std::size_t j = 0; j < row.kcs.size(); ++j) {
      e += x[beta(row.kcs[j])] + x[gamma(row.kcs[j])] * practice(row.opportunities[j]);
    }
    return e;
  }

  // log p(y | eta), computed without overflow.
  static double log_lik(int y, double e) {
    const double softplus = std::max(e, 0.0) + std::log1p(std::exp(-std::abs(e)));
    return y * e - softplus;
  }

  static double logistic(double e) {
    if (e >= 0) return 1.0 / (1.0 + std::exp(-e));
    const double z = std::exp(e);
    return z / (1.0 + z);
  }

  double data_ll(const std::vector<double>& x) const {
    double ll = 0.0;
    for (const auto& row : table.rows) ll += log_lik(row.y, eta(x, row));
    return ll;
  }

  double objective(const std::vector<double>& x) const {
    double f = data_ll(x);
    for (std::size_t i = 0; i < students(); ++i) f -= 0.5 * lambda * x[i] * x[i];
    for (std::size_t k = 0; k < kcs(); ++k) {
      f -= 0.5 * penalty[k] * (x[beta(k)] * x[beta(k)] + x[gamma(k)] * x[gamma(k)]);
    }
    return f;
  }

  // Gradient, and the diagonal of the negated Hessian when `curvature` is set.
  std::vector<double> gradient(const std::vector<double>& x, std::vector<double>* curvature) const {
    std::vector<double> g(size(), 0.0);
    if (curvature) curvature->assign(size(), 0.0);
    for (const auto& row : table.rows) {
      const double p = logistic(eta(x, row));
      const double r = row.y - p;
      const double w = p * (1.0 - p);
      g[row.student] += r;
      if (curvature) (*curvature)[row.student] += w;
      for (std::size_t j = 0; j < row.kcs.size(); ++j) {
        const double t = practice(row.opportunities[j]);
        g[beta(row.kcs[j])] += r;
        g[gamma(row.kcs[j])] += r * t;
        if (curvature) {
          (*curvature)[beta(row.kcs[j])] += w;
          (*curvature)[gamma(row.kcs[j])] += w * t * t;
        }
      }
    }
    for (std::size_t i = 0; i < students(); ++i) {
      g[i] -= lambda * x[i];
      if (curvature) (*curvature)[i] += lambda;
    }
    for (std::size_t k = 0; k < kcs(); ++k) {
      g[beta(k)] -= penalty[k] * x[beta(k)];
      g[gamma(k)] -= penalty[k] * x[gamma(k)];
      if (curvature) {
        (*curvature)[beta(k)] += penalty[k];
        (*curvature)[gamma(k)] += penalty[k];
      }
    }
    return g;
  }
};

double lookup(const std::map<std::string, double>& m, const std::string& key) {
  const auto it = m.find(key);
  return it == m.end() ? 0.0 : it->second;
}

Problem problem_for(const AfmModel& model, const OpportunityTable& table) {
  Problem p{table, model.lambda_theta, {}, model.zero_based};
  for (const auto& kc : table.kcs) p.penalty.push_back(lookup(model.kc_penalty, kc));
  return p;
}

std::vector<double> pack(const AfmModel& model, const Problem& p) {
  std::vector<double> x(p.size(), 0.0);
  for (std::size_t i = 0; i < p.students(); ++i) x[i] = lookup(model.theta, p.table.students[i]);
  for (std::size_t k = 0; k < p.kcs(); ++k) {
    x[p.beta(k)] = lookup(model.beta, p.table.kcs[k]);
    x[p.gamma(k)] = lookup(model.gamma, p.table.kcs[k]);
  }
  return x;
}

void unpack(const std::vector<double>& x, const Problem& p, std::map<std::string, double>& theta,
            std::map<std::string, double>& beta, std::map<std::string, double>& gamma) {
  for (std::size_t i = 0; i < p.students(); ++i) theta[p.table.students[i]] = x[i];
  for (std::size_t k = 0; k < p.kcs(); ++k) {
    beta[p.table.kcs[k]] = x[p.beta(k)];
    gamma[p.table.kcs[k]] = x[p.gamma(k)];
  }
}

double projected_max_norm(const std::vector<double>& x, const std::vector<double>& g,
                          const Problem& p) {
  double norm = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const bool at_bound = j >= p.gamma(0) && x[j] <= 0.0 && g[j] < 0.0;
    if (!at_bound) norm = std::max(norm, std::abs(g[j]));
  }
  return norm;
}


// Dense Cholesky solve of A x = b in place; false if A is not positive
// definite.
bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    a[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = v / d;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= a[i * n + k] * b[k];
    b[i] /= a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) b[i] -= a[k * n + i] * b[k];
    b[i] /= a[i * n + i];
  }
  return true;
}

// Newton direction on the free variables (gamma at its bound with a
// negative gradient stays put). Each row touches one theta, so the theta
// block of the Hessian is diagonal and is eliminated via its Schur
// complement; only the KC block is factored.
std::optional<std::vector<double>> newton_direction(const Problem& p, const std::vector<double>& x,
                                                    const std::vector<double>& g) {
  const std::size_t s = p.students();
  std::vector<int> slot(p.size() - s, -1);  // KC parameter -> free index
  std::size_t m = 0;
  for (std::size_t j = s; j < p.size(); ++j) {
    const bool fixed = j >= p.gamma(0) && x[j] <= 0.0 && g[j] <= 0.0;
    if (!fixed) slot[j - s] = static_cast<int>(m++);
  }
  std::vector<double> dtheta(s, 0.0);
  std::vector<double> cross(s * m, 0.0);  // student x free KC parameter
  std::vector<double> hkk(m * m, 0.0);
  std::vector<std::pair<int, double>> touched;
  for (const auto& row : p.table.rows) {
    const double e = p.eta(x, row);
    const double pr = Problem::logistic(e);
    const double w = pr * (1.0 - pr);
    dtheta[row.student] += w;
    touched.clear();
    for (std::size_t j = 0; j < row.kcs.size(); ++j) {
      const int k = row.kcs[j];
      if (int a = slot[p.beta(k) - s]; a >= 0) touched.emplace_back(a, 1.0);
      if (int a = slot[p.gamma(k) - s]; a >= 0) touched.emplace_back(a, p.practice(row.opportunities[j]));
    }
    for (const auto& [a, da] : touched) {
      cross[row.student * m + a] += w * da;
      for (const auto& [b, db] : touched) hkk[a * m + b] += w * da * db;
    }
  }
  constexpr double kDamping = 1e-9;
  for (std::size_t i = 0; i < s; ++i) dtheta[i] += p.lambda + kDamping;
  for (std::size_t k = 0; k < p.kcs(); ++k) {
    for (std::size_t j : {p.beta(k), p.gamma(k)}) {
      if (int a = slot[j - s]; a >= 0) hkk[a * m + a] += p.penalty[k] + kDamping;
    }
  }
  std::vector<double> rhs(m, 0.0);
  for (std::size_t j = s; j < p.size(); ++j) {
    if (int a = slot[j - s]; a >= 0) rhs[a] = g[j];
  }
  for (std::size_t i = 0; i < s; ++i) {
    const double* c = &cross[i * m];
    for (std::size_t a = 0; a < m; ++a) {
      if (c[a] == 0.0) continue;
      rhs[a] -= c[a] * g[i] / dtheta[i];
      for (std::size_t b = 0; b < m; ++b) hkk[a * m + b] -= c[a] * c[b] / dtheta[i];
    }
  }
  if (!cholesky_solve(hkk, rhs, m)) return std::nullopt;
  std::vector<double> d(p.size(), 0.0);
  for (std::size_t j = s; j < p.size(); ++j) {
    if (int a = slot[j - s]; a >= 0) d[j] = rhs[a];
  }
  for (std::size_t i = 0; i < s; ++i) {
    double v = g[i];
    for (std::size_t a = 0; a < m; ++a) v -= cross[i * m + a] * rhs[a];
    d[i] = v / dtheta[i];
  }
  return d;
}

}  // namespace

std::vector<double> afm_predict(const AfmModel& model, const OpportunityTable& table) {
  const Problem p = problem_for(model, table);
  const auto x = pack(model, p);
  std::vector<double> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) out.push_back(Problem::logistic(p.eta(x, row)));
  return out;
}

double afm_data_log_likelihood(const AfmModel& model, const OpportunityTable& table) {
  const Problem p = problem_for(model, table);
  return p.data_ll(pack(model, p));
}

double afm_objective(const AfmModel& model, const OpportunityTable& table) {
  const Problem p = problem_for(model, table);
  return p.objective(pack(model, p));
}

AfmGradient afm_gradient(const AfmModel& model, const OpportunityTable& table) {
  const Problem p = problem_for(model, table);
  const auto g = p.gradient(pack(model, p), nullptr);
  AfmGradient out;
  unpack(g, p, out.theta, out.beta, out.gamma);
  return out;
}

AfmFit fit_afm(const OpportunityTable& table, const AfmConfig& config) {
  if (table.students.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "AFM needs at least two students");
  }
  if (table.kcs.empty()) throw Error(ErrorCode::kInvalidArgument, "AFM needs at least one KC");
  if (!(config.lambda_theta >= 0.0) || !(config.degenerate_penalty > 0.0) || config.max_iter < 0) {
    throw Error(ErrorCode::kInvalidArgument, "AFM configuration out of range");
  }

  AfmFit fit;
  fit.model.lambda_theta = config.lambda_theta;
  fit.model.zero_based = config.zero_based;
  std::vector<int> correct(table.kcs.size(), 0);
  std::vector<int> seen(table.kcs.size(), 0);
  for (const auto& row : table.rows) {
    for (int k : row.kcs) {
      correct[k] += row.y;
      seen[k] += 1;
    }
  }
  for (std::size_t k = 0; k < table.kcs.size(); ++k) {
    if (correct[k] == 0 || correct[k] == seen[k]) {
      fit.degenerate_kcs.push_back(table.kcs[k]);
      fit.model.kc_penalty[table.kcs[k]] = config.degenerate_penalty;
    }
  }

  const Problem p = problem_for(fit.model, table);
  const std::size_t first_gamma = p.gamma(0);
  std::vector<double> x(p.size(), 0.0);
  double f = p.objective(x);
  fit.objective_trace.push_back(f);
  std::vector<double> curvature;
  std::vector<double> g = p.gradient(x, &curvature);
  std::vector<double> next(x.size());

  for (fit.iterations = 0; fit.iterations < config.max_iter; ++fit.iterations) {
    if (projected_max_norm(x, g, p) < config.tol) {
      fit.converged = true;
      break;
    }
    auto line_search = [&](const std::vector<double>& direction) {
      double step = 1.0;
      for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5) {
        double ascent = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
          next[j] = x[j] + step * direction[j];
          if (j >= first_gamma) next[j] = std::max(next[j], 0.0);
          ascent += g[j] * (next[j] - x[j]);
        }
        const double f_next = p.objective(next);
        if (std::isfinite(f_next) && ascent >= 0.0 && f_next >= f + 1e-4 * ascent) {
          x.swap(next);
          f = f_next;
          return true;
        }
      }
      return false;
    };
    // Newton when the reduced Hessian factors; the scaled gradient otherwise.
    const auto newton = newton_direction(p, x, g);
    bool accepted = newton && line_search(*newton);
    if (!accepted) {
      std::vector<double> scaled(x.size());
      for (std::size_t j = 0; j < x.size(); ++j) scaled[j] = g[j] / std::max(curvature[j], 1e-12);
      accepted = line_search(scaled);
    }
    if (!accepted) break;  // no representable improvement left
    fit.objective_trace.push_back(f);
    if (config.on_iterate) {
      AfmModel snapshot = fit.model;
      unpack(x, p, snapshot.theta, snapshot.beta, snapshot.gamma);
      config.on_iterate(snapshot, f);
    }
    g = p.gradient(x, &curvature);
  }
  if (!fit.converged && projected_max_norm(x, g, p) < config.tol) fit.converged = true;

  unpack(x, p, fit.model.theta, fit.model.beta, fit.model.gamma);
  fit.log_likelihood = f;
  fit.data_log_likelihood = p.data_ll(x);
  return fit;
}

KcModelComparison compare_kc_models(const log::LogStore& store,
                                    const std::vector<KcModelCandidate>& models,
                                    const AfmConfig& config) {
  if (models.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "comparing KC models needs at least two candidates");
  }
  KcModelComparison out;
  for (const auto& candidate : models) {
    const auto table = build_opportunity_table(
        store, candidate.relabeling ? &*candidate.relabeling : nullptr);
    const auto fit = fit_afm(table, config);
    KcModelScore score;
    score.name = candidate.name;
    score.log_likelihood = fit.data_log_likelihood;
    score.parameters = static_cast<int>(table.students.size() + 2 * table.kcs.size());
    score.observations = static_cast<int>(table.rows.size());
    score.aic = 2.0 * score.parameters - 2.0 * score.log_likelihood;
    score.bic = score.parameters * std::log(static_cast<double>(score.observations)) -
                2.0 * score.log_likelihood;
    score.converged = fit.converged;
    score.degenerate_kcs = fit.degenerate_kcs;
    out.scores.push_back(std::move(score));
  }
  out.by_aic.resize(out.scores.size());
  std::iota(out.by_aic.begin(), out.by_aic.end(), 0);
  out.by_bic = out.by_aic;
  std::stable_sort(out.by_aic.begin(), out.by_aic.end(),
                   [&](auto a, auto b) { return out.scores[a].aic < out.scores[b].aic; });
  std::stable_sort(out.by_bic.begin(), out.by_bic.end(),
                   [&](auto a, auto b) { return out.scores[a].bic < out.scores[b].bic; });
  return out;
}

std::vector<KcModelCandidate> kc_models_from_json(const nlohmann::json& doc) {
  auto bad = [](const std::string& why) { return Error(ErrorCode::kParseError, "KC models: " + why); };
  if (!doc.is_object() || !doc.contains("models") || !doc["models"].is_array()) {
    throw bad("expected an object with a \"models\" array");
  }
  std::vector<KcModelCandidate> out;
  for (const auto& m : doc["models"]) {
    if (!m.is_object() || !m.contains("name") || !m["name"].is_string()) {
      throw bad("every model needs a string \"name\"");
    }
    KcModelCandidate c{m["name"].get<std::string>(), std::nullopt};
    if (m.contains("steps")) {
      if (!m["steps"].is_object()) throw bad("\"steps\" of " + c.name + " must be an object");
      KcRelabeling map;
      for (const auto& [step, kcs] : m["steps"].items()) {
        if (kcs.is_string()) {
          map[step] = {kcs.get<std::string>()};
        } else if (kcs.is_array() && std::all_of(kcs.begin(), kcs.end(),
                                                 [](const auto& v) { return v.is_string(); })) {
          map[step] = kcs.get<std::vector<std::string>>();
        } else {
          throw bad("KCs of step '" + step + "' must be a string or list of strings");
        }
      }
      c.relabeling = std::move(map);
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace tutorlab::analytics
