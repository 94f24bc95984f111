#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <thread>
#include <vector>

#include "deimkit/constants.hpp"
#include "deimkit/haar.hpp"
#include "deimkit/ice.hpp"
#include "deimkit/matrix.hpp"
#include "deimkit/qr.hpp"
#include "deimkit/svd.hpp"

namespace deimkit {

/// Ordered interpolation indices p_1..p_m (0-based internally), standing for
/// the column-of-identity selection S; S^T U = U(indices, :).
struct SelectionOperator {
  std::vector<std::size_t> indices;
  std::size_t ambient_dim = 0;
};

enum class SamplingScheme { kUniformPermutation, kNormSortedBatches, kNormWeightedDraw };
enum class RestartPolicy { kContinue, kRestartPivoting };

struct QdeimrConfig {
  std::size_t window_k = 0;      // 0 -> m
  double c_threshold = 0.0;      // 0 -> sqrt(m) * sqrt(n - m + 1)
  SamplingScheme sampling = SamplingScheme::kUniformPermutation;
  std::uint64_t seed = 0;
  std::size_t max_row_visits = 0;  // 0 -> n
  RestartPolicy restart_policy = RestartPolicy::kContinue;
};

struct SelectionReport {
  SelectionOperator selection;
  double c_exact = 0.0;
  double c_bound_used = 0.0;
  std::size_t rows_visited = 0;
  std::size_t resample_rounds = 0;
  double wall_time = 0.0;
};

/// Thrown when Q-DEIMr exhausts its row budget (or the active set) before
/// accepting m pivots; carries what was accepted so far.
struct BudgetExceededError : Error {
  BudgetExceededError(const std::string& what, SelectionReport r)
      : Error(what), partial(std::move(r)) {}
  SelectionReport partial;
};

/// Exact c = ||(S^T U)^{-1}||_2 for a selection.
inline double selection_condition(const Matrix& u, const SelectionOperator& sel) {
  const double smin = smallest_singular_value(extract_rows(u, sel.indices));
  return 1.0 / smin;
}

namespace detail {

// argmax of |x_i|, smallest index wins ties (strict improvement required).
inline std::size_t argmax_abs(std::span<const double> x) {
  std::size_t best = 0;
  double bv = std::abs(x[0]);
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double v = std::abs(x[i]);
    if (v > bv) {
      bv = v;
      best = i;
    }
  }
  return best;
}

}  // namespace detail

/// Classical DEIM greedy selection. The interpolation system
/// S_{j-1}^T U_{j-1} z = S_{j-1}^T u_j is solved through an incrementally
/// updated LU factorization (O(j^2) per step, O(n m^2) + O(m^3) total).
inline SelectionOperator deim_select(const Matrix& u) {
  u.require_finite("deim_select");
  const std::size_t n = u.rows(), m = u.cols();
  if (m == 0 || m > n) throw DimensionError("deim_select: bad basis shape");

  SelectionOperator sel;
  sel.ambient_dim = n;
  // unit-lower L and upper Ufac of U(p, 1:j), grown a row/column at a time
  Matrix lower(m, m), upper(m, m);
  std::vector<double> z(m), tmp(m), resid(n);

  for (std::size_t j = 0; j < m; ++j) {
    auto uj = u.col(j);
    if (j == 0) {
      std::copy(uj.begin(), uj.end(), resid.begin());
    } else {
      // b = U(p, j); forward solve L y = b, back solve Ufac z = y
      for (std::size_t i = 0; i < j; ++i) {
        double s = u(sel.indices[i], j);
        for (std::size_t l = 0; l < i; ++l) s -= lower(i, l) * tmp[l];
        tmp[i] = s;
      }
      for (std::size_t i = j; i-- > 0;) {
        double s = tmp[i];
        for (std::size_t l = i + 1; l < j; ++l) s -= upper(i, l) * z[l];
        if (upper(i, i) == 0.0)
          throw RankError("deim_select: dependent basis columns");
        z[i] = s / upper(i, i);
      }
      for (std::size_t i = 0; i < n; ++i) resid[i] = uj[i];
      for (std::size_t l = 0; l < j; ++l) {
        const double zl = z[l];
        auto ul = u.col(l);
        for (std::size_t i = 0; i < n; ++i) resid[i] -= ul[i] * zl;
      }
    }
    const std::size_t p = detail::argmax_abs(resid);
    if (resid[p] == 0.0) throw RankError("deim_select: zero residual, dependent basis");
    sel.indices.push_back(p);

    // grow the LU: column tmp(=L^{-1} b) is the new upper column; new L row
    // from Ufac^T solve; new diagonal by Schur complement
    for (std::size_t i = 0; i < j; ++i) upper(i, j) = tmp[i];
    for (std::size_t l = 0; l < j; ++l) {
      double s = u(p, l);
      for (std::size_t i = 0; i < l; ++i) s -= lower(j, i) * upper(i, l);
      lower(j, l) = s / upper(l, l);
    }
    double d = u(p, j);
    for (std::size_t i = 0; i < j; ++i) d -= lower(j, i) * upper(i, j);
    lower(j, j) = 1.0;
    upper(j, j) = d;
  }
  return sel;
}

/// Gaussian elimination with partial (row) pivoting; the pivot-row indices in
/// elimination order. Equivalence oracle for deim_select.
inline SelectionOperator lu_pp_select(const Matrix& u) {
  u.require_finite("lu_pp_select");
  const std::size_t n = u.rows(), m = u.cols();
  if (m == 0 || m > n) throw DimensionError("lu_pp_select: bad shape");
  Matrix a = u;
  std::vector<bool> used(n, false);
  SelectionOperator sel;
  sel.ambient_dim = n;
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t p = n;
    double bv = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      const double v = std::abs(a(i, j));
      if (v > bv) {
        bv = v;
        p = i;
      }
    }
    if (p == n || a(p, j) == 0.0) throw RankError("lu_pp_select: singular input");
    used[p] = true;
    sel.indices.push_back(p);
    const double piv = a(p, j);
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      const double f = a(i, j) / piv;
      if (f == 0.0) continue;
      for (std::size_t l = j + 1; l < m; ++l) a(i, l) -= f * a(p, l);
    }
  }
  return sel;
}

/// Q-DEIM: the first m column-pivot indices of the pivoted QR of U^T.
inline SelectionOperator qdeim_select(const Matrix& u) {
  const std::size_t n = u.rows(), m = u.cols();
  if (m == 0 || m > n) throw DimensionError("qdeim_select: bad basis shape");
  PivotedQrFactor f = qr_column_pivoted(transpose(u));
  if (f.diag_abs.back() < static_cast<double>(n) * tol::kEps * f.diag_abs.front())
    throw RankError("qdeim_select: numerically rank-deficient basis");
  SelectionOperator sel;
  sel.ambient_dim = n;
  sel.indices.assign(f.perm.begin(), f.perm.begin() + static_cast<std::ptrdiff_t>(m));
  return sel;
}

/// Q-DEIM returning the factorization too (for refine_volume).
inline SelectionOperator qdeim_select(const Matrix& u, PivotedQrFactor& factor_out) {
  const std::size_t n = u.rows(), m = u.cols();
  if (m == 0 || m > n) throw DimensionError("qdeim_select: bad basis shape");
  factor_out = qr_column_pivoted(transpose(u));
  if (factor_out.diag_abs.back() <
      static_cast<double>(n) * tol::kEps * factor_out.diag_abs.front())
    throw RankError("qdeim_select: numerically rank-deficient basis");
  SelectionOperator sel;
  sel.ambient_dim = n;
  sel.indices.assign(factor_out.perm.begin(),
                     factor_out.perm.begin() + static_cast<std::ptrdiff_t>(m));
  return sel;
}

namespace detail {

// Draws global column indices (rows of U) for Q-DEIMr, each at most once.
class RowSampler {
 public:
  RowSampler(const Matrix& u, SamplingScheme scheme, Rng& rng) : scheme_(scheme) {
    const std::size_t n = u.rows();
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    switch (scheme) {
      case SamplingScheme::kUniformPermutation:
        rng.shuffle(order_);
        break;
      case SamplingScheme::kNormSortedBatches: {
        std::vector<double> w2(n);
        for (std::size_t i = 0; i < n; ++i) {
          double s = 0.0;
          for (std::size_t j = 0; j < u.cols(); ++j) s += u(i, j) * u(i, j);
          w2[i] = s;
        }
        std::stable_sort(order_.begin(), order_.end(),
                         [&](std::size_t a, std::size_t b) { return w2[a] > w2[b]; });
        break;
      }
      case SamplingScheme::kNormWeightedDraw: {
        weights_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          double s = 0.0;
          for (std::size_t j = 0; j < u.cols(); ++j) s += u(i, j) * u(i, j);
          weights_[i] = s;
        }
        total_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
        break;
      }
    }
  }

  bool empty() const {
    if (scheme_ == SamplingScheme::kNormWeightedDraw) return total_ <= 0.0;
    return pos_ >= order_.size();
  }

  std::size_t draw(Rng& rng) {
    if (scheme_ != SamplingScheme::kNormWeightedDraw) return order_[pos_++];
    // p_i = w_i^2 / sum w_j^2 over the active set, without replacement
    double target = rng.uniform() * total_;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      if (weights_[i] <= 0.0) continue;
      target -= weights_[i];
      if (target <= 0.0) {
        total_ -= weights_[i];
        weights_[i] = 0.0;
        return i;
      }
    }
    for (std::size_t i = weights_.size(); i-- > 0;)
      if (weights_[i] > 0.0) {
        total_ -= weights_[i];
        weights_[i] = 0.0;
        return i;
      }
    throw Error("RowSampler: draw from empty set");
  }

 private:
  SamplingScheme scheme_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  std::vector<double> weights_;
  double total_ = 0.0;
};

}  // namespace detail

/// Restricted randomized Q-DEIM: pivoted QR over a sampled m x k work array of
/// columns of W = U^T, with each pivot gated by the incremental condition
/// estimate against cfg.c_threshold. Rejected windows are refreshed from the
/// active set, after applying the accumulated reflector product. Deterministic
/// per seed.
inline SelectionReport qdeimr_select(const Matrix& u, const QdeimrConfig& cfg) {
  u.require_finite("qdeimr_select");
  const auto t_start = std::chrono::steady_clock::now();
  const std::size_t n = u.rows(), m = u.cols();
  if (m == 0 || m > n) throw DimensionError("qdeimr_select: bad basis shape");
  const std::size_t k = std::max<std::size_t>(cfg.window_k ? cfg.window_k : m, 1);
  const double threshold =
      cfg.c_threshold > 0.0
          ? cfg.c_threshold
          : std::sqrt(static_cast<double>(m)) * std::sqrt(static_cast<double>(n - m + 1));
  const std::size_t budget = cfg.max_row_visits ? cfg.max_row_visits : n;
  if (budget < m) throw DimensionError("qdeimr_select: budget < m");

  Rng rng(cfg.seed);
  detail::RowSampler sampler(u, cfg.sampling, rng);

  // The work array holds the j accepted pivot columns followed by up to k
  // trailing candidate columns; the trailing stock is replenished after every
  // acceptance so each pivot competes among k candidates (a window that only
  // drains would leave the last pivot with a single candidate and no
  // selectivity at all).
  const std::size_t cap = m + k;
  Matrix work(m, cap);            // transformed sampled columns of W
  std::vector<std::size_t> colglobal(cap, 0);
  std::size_t ncols = 0;          // valid columns in work
  Matrix xi = Matrix::identity(m);  // accumulated reflectors
  IceState ice;
  std::size_t accepted = 0;
  std::size_t visited = 0;
  std::size_t rounds = 0;

  SelectionReport report;
  report.selection.ambient_dim = n;
  report.c_bound_used = threshold;

  auto fail = [&](const char* why) -> BudgetExceededError {
    report.rows_visited = visited;
    report.resample_rounds = rounds;
    report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    if (!report.selection.indices.empty()) {
      // partial selection: 1/sigma_min of the (possibly non-square) accepted block
      const Matrix block = extract_rows(u, report.selection.indices);
      const Matrix tall = block.rows() >= block.cols() ? block : transpose(block);
      report.c_exact = 1.0 / thin_svd(tall).sigma.back();
    }
    return BudgetExceededError(why, report);
  };

  // draws one fresh column of W into slot `slot`, applying Xi
  auto draw_into = [&](std::size_t slot) -> bool {
    if (sampler.empty() || visited >= budget) return false;
    const std::size_t g = sampler.draw(rng);
    ++visited;
    colglobal[slot] = g;
    std::vector<double> w(m);
    for (std::size_t j = 0; j < m; ++j) w[j] = u(g, j);
    auto col = work.col(slot);
    // col = Xi * w
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += xi(i, j) * w[j];
      col[i] = s;
    }
    return true;
  };

  for (std::size_t slot = 0; slot < k; ++slot) {
    if (!draw_into(slot)) break;
    ++ncols;
  }
  if (ncols < m && ncols < k) {
    // not enough material to ever accept m pivots if the pool is tiny
    if (ncols < m) throw fail("qdeimr_select: active set/budget exhausted at startup");
  }

  std::vector<double> scratch;
  while (true) {
    while (accepted < m) {
      // pivot among trailing columns by the norm of rows accepted..m-1
      double best = -1.0;
      std::size_t piv = ncols;
      for (std::size_t j = accepted; j < ncols; ++j) {
        double s = 0.0;
        auto cj = work.col(j);
        for (std::size_t i = accepted; i < m; ++i) s += cj[i] * cj[i];
        if (s > best * (1.0 + 2.0 * tol::kPivotTieRel)) {
          best = s;
          piv = j;
        }
      }
      bool gate_ok = false;
      IceState trial;
      double alpha = 0.0;
      PivotedQrFactor::Reflector h;
      if (piv < ncols && best > 0.0) {
        if (piv != accepted) {
          for (std::size_t i = 0; i < m; ++i)
            std::swap(work(i, accepted), work(i, piv));
          std::swap(colglobal[accepted], colglobal[piv]);
        }
        auto cj = work.col(accepted);
        scratch.assign(cj.begin() + static_cast<std::ptrdiff_t>(accepted), cj.end());
        alpha = detail::make_reflector(scratch, h.v, h.tau);
        if (alpha != 0.0) {
          trial = ice_append(ice, cj.subspan(0, accepted), alpha);
          gate_ok = trial.gamma <= threshold;
        }
      }
  
      if (gate_ok) {
        auto cj = work.col(accepted);
        cj[accepted] = alpha;
        for (std::size_t i = accepted + 1; i < m; ++i) cj[i] = 0.0;
        for (std::size_t j = accepted + 1; j < ncols; ++j)
          detail::apply_reflector(h.v, h.tau, work.col(j).subspan(accepted));
        for (std::size_t j = 0; j < m; ++j)
          detail::apply_reflector(h.v, h.tau, xi.col(j).subspan(accepted));
        ice = trial;
        report.selection.indices.push_back(colglobal[accepted]);
        ++accepted;
        // top the trailing candidate stock back up to k
        while (ncols - accepted < k && ncols < cap && draw_into(ncols)) ++ncols;
        continue;
      }
  
      // gate failed (or window empty): refresh trailing columns from the pool
      ++rounds;
      if (cfg.restart_policy == RestartPolicy::kRestartPivoting) {
        // refresh trailing slots, then redo the whole pivoting on the raw
        // columns currently resident in the window
        std::size_t filled = accepted;
        for (std::size_t slot = accepted; slot < accepted + k; ++slot) {
          if (!draw_into(slot)) break;
          ++filled;
        }
        if (filled < m) throw fail("qdeimr_select: budget exhausted");
        ncols = filled;
        xi = Matrix::identity(m);
        for (std::size_t j = 0; j < ncols; ++j)
          for (std::size_t i = 0; i < m; ++i) work(i, j) = u(colglobal[j], i);
        ice = IceState{};
        accepted = 0;
        report.selection.indices.clear();
      } else {
        std::size_t filled = accepted;
        for (std::size_t slot = accepted; slot < accepted + k; ++slot) {
          if (!draw_into(slot)) break;
          ++filled;
        }
        if (filled <= accepted) throw fail("qdeimr_select: budget exhausted");
        ncols = filled;
      }
    }
  
    // the gate works with a lower bound of the condition number, so the exact
    // value is verified before the selection is declared done; the threshold is
    // a hard contract on the returned c
    report.c_exact = selection_condition(u, report.selection);
    if (report.c_exact <= threshold) break;
    ++rounds;
    accepted = 0;
    report.selection.indices.clear();
    xi = Matrix::identity(m);
    ice = IceState{};
    std::size_t filled = 0;
    for (std::size_t slot = 0; slot < k; ++slot) {
      if (!draw_into(slot)) break;
      ++filled;
    }
    if (filled < m) throw fail("qdeimr_select: threshold unmet within budget");
    ncols = filled;
  }

  report.rows_visited = visited;
  report.resample_rounds = rounds;
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

/// Embarrassingly parallel Q-DEIMr: workers race with distinct sub-seeds; the
/// best c among successful workers wins (lowest worker id on ties), so the
/// outcome is deterministic for a fixed seed and worker count.
inline SelectionReport qdeimr_select_parallel(const Matrix& u, const QdeimrConfig& cfg,
                                              std::size_t workers) {
  if (workers <= 1) return qdeimr_select(u, cfg);
  std::vector<std::optional<SelectionReport>> results(workers);
  std::vector<std::optional<BudgetExceededError>> failures(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      QdeimrConfig local = cfg;
      local.seed = cfg.seed * 0x9e3779b97f4a7c15ULL + w + 1;
      try {
        results[w] = qdeimr_select(u, local);
      } catch (const BudgetExceededError& e) {
        failures[w] = e;
      }
    });
  }
  for (auto& t : pool) t.join();
  std::size_t best = workers;
  for (std::size_t w = 0; w < workers; ++w) {
    if (!results[w]) continue;
    if (best == workers || results[w]->c_exact < results[best]->c_exact) best = w;
  }
  if (best == workers) {
    for (auto& f : failures)
      if (f) throw *f;
    throw Error("qdeimr_select_parallel: no worker produced a result");
  }
  return *results[best];
}

/// Best-of-`trials` uniformly random m-subsets, scored by exact c. Singular
/// draws are discarded.
inline SelectionOperator random_select(const Matrix& u, std::uint64_t seed,
                                       std::size_t trials) {
  const std::size_t n = u.rows(), m = u.cols();
  if (m > n) throw DimensionError("random_select: m > n");
  Rng rng(seed);
  std::vector<std::size_t> pool(n);
  SelectionOperator best;
  best.ambient_dim = n;
  double best_c = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    // partial Fisher-Yates: first m entries are a uniform m-subset
    for (std::size_t i = 0; i < m; ++i)
      std::swap(pool[i], pool[i + rng.below(n - i)]);
    SelectionOperator cand;
    cand.ambient_dim = n;
    cand.indices.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(m));
    const double smin = smallest_singular_value(extract_rows(u, cand.indices));
    if (smin <= 0.0) continue;  // singular draw
    const double c = 1.0 / smin;
    if (c < best_c) {
      best_c = c;
      best = std::move(cand);
    }
  }
  if (best.indices.empty()) throw RankError("random_select: all trials singular");
  return best;
}

namespace detail {

inline double binomial(std::size_t n, std::size_t m) {
  double b = 1.0;
  for (std::size_t i = 0; i < m; ++i) b = b * static_cast<double>(n - i) / (i + 1);
  return b;
}

// |det| of the m x m row submatrix via in-place partial-pivot LU.
inline double abs_det_rows(const Matrix& u, std::span<const std::size_t> rows) {
  const std::size_t m = rows.size();
  Matrix a = extract_rows(u, rows);
  double det = 1.0;
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t p = j;
    for (std::size_t i = j + 1; i < m; ++i)
      if (std::abs(a(i, j)) > std::abs(a(p, j))) p = i;
    if (a(p, j) == 0.0) return 0.0;
    if (p != j)
      for (std::size_t l = 0; l < m; ++l) std::swap(a(j, l), a(p, l));
    det *= a(j, j);
    for (std::size_t i = j + 1; i < m; ++i) {
      const double f = a(i, j) / a(j, j);
      for (std::size_t l = j + 1; l < m; ++l) a(i, l) -= f * a(j, l);
    }
  }
  return std::abs(det);
}

}  // namespace detail

/// Exhaustive volume-maximizing selection (desk-scale oracle). Among ties,
/// the lexicographically smallest index set.
inline SelectionOperator brute_force_volume_select(const Matrix& u) {
  const std::size_t n = u.rows(), m = u.cols();
  if (m > n) throw DimensionError("brute_force_volume_select: m > n");
  if (detail::binomial(n, m) > 1e6)
    throw DimensionError("brute_force_volume_select: instance too large (C(n,m) > 1e6)");
  std::vector<std::size_t> comb(m);
  std::iota(comb.begin(), comb.end(), std::size_t{0});
  SelectionOperator best;
  best.ambient_dim = n;
  double best_vol = -1.0;
  while (true) {
    const double vol = detail::abs_det_rows(u, comb);
    if (vol > best_vol * (1.0 + 1e-12)) {  // strict improvement keeps lex-smallest
      best_vol = vol;
      best.indices = comb;
    }
    // next combination in lexicographic order
    std::size_t i = m;
    while (i-- > 0) {
      if (comb[i] + (m - i) < n) {
        ++comb[i];
        for (std::size_t l = i + 1; l < m; ++l) comb[l] = comb[l - 1] + 1;
        break;
      }
      if (i == 0) return best;
    }
  }
}

/// Greedy 2x2 volume post-processing after Q-DEIM: scans column pairs of
/// R(m-1:m, m-1:n) for a larger trailing 2x2 determinant and, if found, swaps
/// the corresponding columns into the last two selection slots. Never
/// decreases the volume.
inline SelectionOperator refine_volume(const Matrix& u, const SelectionOperator& sel,
                                       const PivotedQrFactor& qr) {
  const std::size_t n = u.rows(), m = u.cols();
  if (m < 2 || n <= m) return sel;
  const Matrix& r = qr.r_factor;
  const std::size_t a = m - 2, b = m - 1;  // rows m-1, m (0-based)
  const double current = std::abs(r(a, a) * r(b, b));
  double best = current;
  std::size_t bi = a, bj = b;
  for (std::size_t i = a; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double det = r(a, i) * r(b, j) - r(a, j) * r(b, i);
      if (std::abs(det) > best * (1.0 + 1e-12)) {
        best = std::abs(det);
        bi = i;
        bj = j;
      }
    }
  }
  if (bi == a && bj == b) return sel;
  SelectionOperator out = sel;
  out.indices[a] = qr.perm[bi];
  out.indices[b] = qr.perm[bj];
  return out;
}

}  // namespace deimkit
