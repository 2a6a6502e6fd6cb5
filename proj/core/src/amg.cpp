#include "tch/amg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

namespace tch {

CsrMatrix classical_strength(const CsrMatrix& a, double theta) {
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto av = a.values();
  std::vector<Index> row_ptr(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<Index> col_idx;
  std::vector<double> values;
  for (Index i = 0; i < a.rows(); ++i) {
    double amax = 0.0;
    for (Index p = rp[i]; p < rp[i + 1]; ++p) {
      if (ci[p] != i) amax = std::max(amax, std::abs(av[p]));
    }
    if (amax > 0.0) {
      const double cut = theta * amax;
      for (Index p = rp[i]; p < rp[i + 1]; ++p) {
        if (ci[p] != i && av[p] != 0.0 && std::abs(av[p]) >= cut) {
          col_idx.push_back(ci[p]);
          values.push_back(av[p]);
        }
      }
    }
    row_ptr[i + 1] = static_cast<Index>(col_idx.size());
  }
  return CsrMatrix(a.rows(), a.cols(), std::move(row_ptr), std::move(col_idx), std::move(values));
}

std::vector<PointType> rs_splitting(const CsrMatrix& s, bool second_pass) {
  const Index n = s.rows();
  const CsrMatrix st = transpose(s);
  const auto srp = s.row_ptr();
  const auto sci = s.col_idx();
  const auto trp = st.row_ptr();
  const auto tci = st.col_idx();

  std::vector<PointType> type(static_cast<std::size_t>(n), PointType::undecided);
  std::vector<Index> lambda(static_cast<std::size_t>(n));
  // Ordered by (measure, -index): the largest measure wins, ties go to the
  // lowest index.
  std::set<std::pair<Index, Index>> queue;
  for (Index i = 0; i < n; ++i) {
    lambda[i] = trp[i + 1] - trp[i];
    if (lambda[i] == 0 && srp[i + 1] == srp[i]) {
      type[i] = PointType::fine;  // isolated: the smoother handles it
    } else {
      queue.insert({lambda[i], -i});
    }
  }
  const auto bump = [&](Index k, Index delta) {
    queue.erase({lambda[k], -k});
    lambda[k] += delta;
    queue.insert({lambda[k], -k});
  };

  while (!queue.empty()) {
    const auto top = std::prev(queue.end());
    const Index i = -top->second;
    queue.erase(top);
    type[i] = PointType::coarse;
    for (Index p = trp[i]; p < trp[i + 1]; ++p) {
      const Index j = tci[p];
      if (type[j] != PointType::undecided) continue;
      queue.erase({lambda[j], -j});
      type[j] = PointType::fine;
      for (Index q = srp[j]; q < srp[j + 1]; ++q) {
        const Index k = sci[q];
        if (type[k] == PointType::undecided) bump(k, 1);
      }
    }
    for (Index p = srp[i]; p < srp[i + 1]; ++p) {
      const Index j = sci[p];
      if (type[j] == PointType::undecided) bump(j, -1);
    }
  }

  if (second_pass) {
    std::vector<Index> mark(static_cast<std::size_t>(n), -1);
    for (Index i = 0; i < n; ++i) {
      if (type[i] != PointType::fine) continue;
      for (Index p = srp[i]; p < srp[i + 1]; ++p) {
        if (type[sci[p]] == PointType::coarse) mark[sci[p]] = i;
      }
      for (Index p = srp[i]; p < srp[i + 1]; ++p) {
        const Index j = sci[p];
        if (type[j] != PointType::fine) continue;
        bool common = false;
        for (Index q = srp[j]; q < srp[j + 1] && !common; ++q) common = mark[sci[q]] == i;
        if (!common) {
          type[j] = PointType::coarse;
          mark[j] = i;
        }
      }
    }
  }
  return type;
}

CsrMatrix classical_interpolation(const CsrMatrix& a, const CsrMatrix& s,
                                  std::span<const PointType> type) {
  const Index n = a.rows();
  std::vector<Index> coarse_id(static_cast<std::size_t>(n), -1);
  Index nc = 0;
  for (Index i = 0; i < n; ++i) {
    if (type[i] == PointType::coarse) coarse_id[i] = nc++;
  }
  const auto arp = a.row_ptr();
  const auto aci = a.col_idx();
  const auto av = a.values();
  const auto srp = s.row_ptr();
  const auto sci = s.col_idx();

  std::vector<Index> row_ptr(static_cast<std::size_t>(n) + 1, 0);
  std::vector<Index> col_idx;
  std::vector<double> values;
  // Scratch marking of the strong C set of the current row.
  std::vector<Index> in_ci(static_cast<std::size_t>(n), -1);
  std::vector<double> weight(static_cast<std::size_t>(n), 0.0);
  std::vector<char> is_strong(static_cast<std::size_t>(n), 0);
  std::vector<Index> cset;

  for (Index i = 0; i < n; ++i) {
    if (type[i] == PointType::coarse) {
      col_idx.push_back(coarse_id[i]);
      values.push_back(1.0);
      row_ptr[i + 1] = static_cast<Index>(col_idx.size());
      continue;
    }
    cset.clear();
    for (Index p = srp[i]; p < srp[i + 1]; ++p) {
      is_strong[sci[p]] = 1;
      if (type[sci[p]] == PointType::coarse) {
        cset.push_back(sci[p]);
        in_ci[sci[p]] = i;
        weight[sci[p]] = 0.0;
      }
    }
    if (!cset.empty()) {
      double diag = 0.0;
      for (Index p = arp[i]; p < arp[i + 1]; ++p) {
        const Index j = aci[p];
        const double aij = av[p];
        if (j == i) {
          diag += aij;
        } else if (in_ci[j] == i) {
          weight[j] += aij;
        } else if (is_strong[j] && type[j] == PointType::fine) {
          // Distribute a_ij over the strong C points of i that j couples to
          // with the sign opposite to its own diagonal.
          double ajj = 0.0;
          double denom = 0.0;
          for (Index q = arp[j]; q < arp[j + 1]; ++q) {
            if (aci[q] == j) ajj = av[q];
          }
          for (Index q = arp[j]; q < arp[j + 1]; ++q) {
            const Index k = aci[q];
            if (in_ci[k] == i && av[q] * ajj < 0.0) denom += av[q];
          }
          if (denom == 0.0) {
            diag += aij;
          } else {
            for (Index q = arp[j]; q < arp[j + 1]; ++q) {
              const Index k = aci[q];
              if (in_ci[k] == i && av[q] * ajj < 0.0) weight[k] += aij * av[q] / denom;
            }
          }
        } else {
          diag += aij;  // weak connection
        }
      }
      std::sort(cset.begin(), cset.end());
      for (Index j : cset) {
        const double wij = diag != 0.0 ? -weight[j] / diag : 0.0;
        col_idx.push_back(coarse_id[j]);
        values.push_back(wij);
      }
    }
    for (Index p = srp[i]; p < srp[i + 1]; ++p) is_strong[sci[p]] = 0;
    row_ptr[i + 1] = static_cast<Index>(col_idx.size());
  }
  // Columns are sorted because coarse ids are monotone in fine ids.
  return CsrMatrix(n, nc, std::move(row_ptr), std::move(col_idx), std::move(values));
}

namespace {

std::vector<double> inverse_diagonal(const CsrMatrix& a) {
  auto d = a.diagonal_values();
  for (double& v : d) {
    if (v == 0.0 || !std::isfinite(v)) {
      throw std::invalid_argument("amg_setup: zero or non-finite diagonal entry");
    }
    v = 1.0 / v;
  }
  return d;
}

void gs_forward(const CsrMatrix& a, std::span<const double> inv_diag, std::span<const double> b,
                std::span<double> x) {
  const Index* rp = a.row_ptr().data();
  const Index* ci = a.col_idx().data();
  const double* av = a.values().data();
  for (Index i = 0; i < a.rows(); ++i) {
    double s = b[i];
    for (Index p = rp[i]; p < rp[i + 1]; ++p) s -= av[p] * x[ci[p]];
    x[i] += s * inv_diag[i];
  }
}

void gs_backward(const CsrMatrix& a, std::span<const double> inv_diag, std::span<const double> b,
                 std::span<double> x) {
  const Index* rp = a.row_ptr().data();
  const Index* ci = a.col_idx().data();
  const double* av = a.values().data();
  for (Index i = a.rows() - 1; i >= 0; --i) {
    double s = b[i];
    for (Index p = rp[i]; p < rp[i + 1]; ++p) s -= av[p] * x[ci[p]];
    x[i] += s * inv_diag[i];
  }
}

// (A + A^T) / 2 on the union pattern; removes roundoff asymmetry of R A P.
CsrMatrix symmetrized(const CsrMatrix& a) {
  CsrMatrix s = add(0.5, a, 0.5, transpose(a));
  s.set_symmetric(true);
  return s;
}

}  // namespace

AmgHierarchy amg_setup(const CsrMatrix& a, const AmgOptions& options) {
  if (a.rows() != a.cols()) throw std::invalid_argument("amg_setup: matrix must be square");
  if (a.rows() == 0) throw std::invalid_argument("amg_setup: empty matrix");

  AmgHierarchy h;
  h.options_ = options;
  h.levels_.push_back({a, {}, {}, inverse_diagonal(a)});

  while (h.levels_.back().a.rows() > options.max_coarse &&
         static_cast<int>(h.levels_.size()) < options.max_levels) {
    const CsrMatrix& fine = h.levels_.back().a;
    const CsrMatrix strength = classical_strength(fine, options.strength_threshold);
    const auto split = rs_splitting(strength, options.second_pass);
    const auto nc = std::count(split.begin(), split.end(), PointType::coarse);
    if (nc == 0 || nc == fine.rows()) break;
    CsrMatrix p = classical_interpolation(fine, strength, split);
    CsrMatrix r = transpose(p);
    CsrMatrix coarse = symmetrized(multiply(r, multiply(fine, p)));
    auto inv = inverse_diagonal(coarse);
    h.levels_.back().p = std::move(p);
    h.levels_.back().r = std::move(r);
    h.levels_.push_back({std::move(coarse), {}, {}, std::move(inv)});
  }

  h.coarse_.compute(to_dense(h.levels_.back().a));
  if (h.coarse_.info() != Eigen::Success) {
    throw std::runtime_error("amg_setup: coarse factorization failed");
  }
  return h;
}

std::vector<Index> AmgHierarchy::level_sizes() const {
  std::vector<Index> s;
  for (const auto& l : levels_) s.push_back(l.a.rows());
  return s;
}

double AmgHierarchy::operator_complexity() const {
  if (levels_.empty()) return 0.0;
  double total = 0.0;
  for (const auto& l : levels_) total += l.a.nnz();
  return total / levels_.front().a.nnz();
}

AmgWorkspace AmgHierarchy::make_workspace() const {
  AmgWorkspace ws;
  for (const auto& l : levels_) {
    const auto n = static_cast<std::size_t>(l.a.rows());
    ws.b.emplace_back(n);
    ws.x.emplace_back(n);
    ws.r.emplace_back(n);
  }
  return ws;
}

void AmgHierarchy::cycle(int l, AmgWorkspace& ws) const {
  const AmgLevel& lev = levels_[l];
  auto& b = ws.b[l];
  auto& x = ws.x[l];
  if (l + 1 == num_levels()) {
    Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())) = coarse_.solve(bv);
    return;
  }
  for (int s = 0; s < options_.presweeps; ++s) {
    gs_forward(lev.a, lev.inv_diag, b, x);
    if (options_.symmetric_sweeps) gs_backward(lev.a, lev.inv_diag, b, x);
  }
  auto& r = ws.r[l];
  lev.a.multiply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  lev.r.multiply(r, ws.b[l + 1]);
  std::fill(ws.x[l + 1].begin(), ws.x[l + 1].end(), 0.0);
  cycle(l + 1, ws);
  lev.p.multiply_add(1.0, ws.x[l + 1], 1.0, x);
  for (int s = 0; s < options_.postsweeps; ++s) {
    if (options_.symmetric_sweeps) gs_forward(lev.a, lev.inv_diag, b, x);
    gs_backward(lev.a, lev.inv_diag, b, x);
  }
}

void AmgHierarchy::vcycle(std::span<const double> b, std::span<double> x,
                          AmgWorkspace& ws) const {
  std::copy(b.begin(), b.end(), ws.b[0].begin());
  std::copy(x.begin(), x.end(), ws.x[0].begin());
  cycle(0, ws);
  std::copy(ws.x[0].begin(), ws.x[0].end(), x.begin());
}

SolveReport amg_solve(const AmgHierarchy& h, std::span<const double> b, std::span<double> x,
                      double tol, int max_cycles, AmgWorkspace* ws) {
  const auto start = std::chrono::steady_clock::now();
  if (b.size() != static_cast<std::size_t>(h.size()) || x.size() != b.size()) {
    throw std::invalid_argument("amg_solve: vector length does not match hierarchy");
  }
  AmgWorkspace local;
  if (ws == nullptr) {
    local = h.make_workspace();
    ws = &local;
  }
  SolveReport rep;
  std::fill(x.begin(), x.end(), 0.0);
  const double bnorm = norm2(b);
  rep.history.push_back(1.0);
  if (bnorm == 0.0) {
    rep.converged = true;
    rep.residual_norm = 0.0;
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
  }
  const bool fixed = tol <= 0.0;
  const CsrMatrix& a = h.level(0).a;
  std::vector<double> r(b.size());
  rep.status = SolveStatus::max_iterations;
  for (int c = 1; c <= max_cycles; ++c) {
    h.vcycle(b, x, *ws);
    rep.iterations = c;
    if (fixed) continue;
    a.multiply(x, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    rep.residual_norm = norm2(r) / bnorm;
    rep.history.push_back(rep.residual_norm);
    if (!std::isfinite(rep.residual_norm)) {
      rep.status = SolveStatus::breakdown;
      break;
    }
    if (rep.residual_norm <= tol) {
      rep.status = SolveStatus::converged;
      break;
    }
  }
  if (fixed) {
    rep.status = SolveStatus::converged;
    rep.residual_norm = std::numeric_limits<double>::quiet_NaN();
  }
  rep.converged = rep.status == SolveStatus::converged;
  rep.true_residual = rep.residual_norm;
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace tch
