#include "gmmot/transport_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "gmmot/error.hpp"
#include "gmmot/simplex.hpp"

namespace gmmot {
namespace {

constexpr int kMaxPivots = 1'000'000;

// ---------------------------------------------------------------------------
// Transportation simplex
// ---------------------------------------------------------------------------

struct Cell {
  int row;
  int col;
};

class TransportationSimplex {
 public:
  TransportationSimplex(const Matrix& cost, const Vector& supply, const Vector& demand)
      : cost_(cost),
        rows_(static_cast<int>(cost.rows())),
        cols_(static_cast<int>(cost.cols())),
        flow_(Matrix::Zero(cost.rows(), cost.cols())),
        basic_(rows_ * cols_, false) {
    north_west_corner(supply, demand);
    tolerance_ = 1e-12 * (1.0 + cost_.cwiseAbs().maxCoeff());
  }

  Matrix solve() {
    for (int pivot = 0; pivot < kMaxPivots; ++pivot) {
      compute_potentials();
      const int entering = find_entering();
      if (entering < 0) {
        return flow_.cwiseMax(0.0);
      }
      pivot_on(Cell{entering / cols_, entering % cols_});
    }
    throw Error(ErrorKind::kNumericalFailure, "solve_transport: pivot limit reached");
  }

 private:
  int flat(Cell c) const { return c.row * cols_ + c.col; }

  void add_basic(Cell c) {
    basis_.push_back(c);
    basic_[flat(c)] = true;
  }

  // Staircase start: exactly rows + cols - 1 basic cells forming a spanning
  // tree, degenerate zeros included.
  void north_west_corner(Vector supply, Vector demand) {
    int i = 0;
    int j = 0;
    while (true) {
      const double amount = std::min(supply(i), demand(j));
      flow_(i, j) = amount;
      supply(i) -= amount;
      demand(j) -= amount;
      add_basic(Cell{i, j});
      if (i == rows_ - 1 && j == cols_ - 1) break;
      if (i == rows_ - 1) {
        ++j;
      } else if (j == cols_ - 1) {
        ++i;
      } else if (supply(i) <= demand(j)) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  // Nodes 0..rows-1 are rows, rows..rows+cols-1 are columns.
  std::vector<std::vector<int>> adjacency() const {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(rows_ + cols_));
    for (int b = 0; b < static_cast<int>(basis_.size()); ++b) {
      adj[static_cast<std::size_t>(basis_[b].row)].push_back(b);
      adj[static_cast<std::size_t>(rows_ + basis_[b].col)].push_back(b);
    }
    return adj;
  }

  void compute_potentials() {
    u_.assign(static_cast<std::size_t>(rows_), 0.0);
    v_.assign(static_cast<std::size_t>(cols_), 0.0);
    const auto adj = adjacency();
    std::vector<bool> seen(static_cast<std::size_t>(rows_ + cols_), false);
    std::queue<int> pending;
    pending.push(0);
    seen[0] = true;
    while (!pending.empty()) {
      const int node = pending.front();
      pending.pop();
      for (int b : adj[static_cast<std::size_t>(node)]) {
        const Cell c = basis_[static_cast<std::size_t>(b)];
        const int row_node = c.row;
        const int col_node = rows_ + c.col;
        if (node == row_node && !seen[static_cast<std::size_t>(col_node)]) {
          v_[static_cast<std::size_t>(c.col)] = cost_(c.row, c.col) - u_[static_cast<std::size_t>(c.row)];
          seen[static_cast<std::size_t>(col_node)] = true;
          pending.push(col_node);
        } else if (node == col_node && !seen[static_cast<std::size_t>(row_node)]) {
          u_[static_cast<std::size_t>(c.row)] = cost_(c.row, c.col) - v_[static_cast<std::size_t>(c.col)];
          seen[static_cast<std::size_t>(row_node)] = true;
          pending.push(row_node);
        }
      }
    }
  }

  // Bland: lowest flat index with a negative reduced cost.
  int find_entering() const {
    for (int i = 0; i < rows_; ++i) {
      for (int j = 0; j < cols_; ++j) {
        if (basic_[i * cols_ + j]) continue;
        const double reduced = cost_(i, j) - u_[static_cast<std::size_t>(i)] - v_[static_cast<std::size_t>(j)];
        if (reduced < -tolerance_) return i * cols_ + j;
      }
    }
    return -1;
  }

  // Basis indices along the tree path from column node of `entering` to its
  // row node.
  std::vector<int> tree_path(Cell entering) const {
    const auto adj = adjacency();
    const int start = rows_ + entering.col;
    const int goal = entering.row;
    std::vector<int> via(static_cast<std::size_t>(rows_ + cols_), -1);
    std::vector<int> parent(static_cast<std::size_t>(rows_ + cols_), -1);
    std::vector<bool> seen(static_cast<std::size_t>(rows_ + cols_), false);
    std::queue<int> pending;
    pending.push(start);
    seen[static_cast<std::size_t>(start)] = true;
    while (!pending.empty() && !seen[static_cast<std::size_t>(goal)]) {
      const int node = pending.front();
      pending.pop();
      for (int b : adj[static_cast<std::size_t>(node)]) {
        const Cell c = basis_[static_cast<std::size_t>(b)];
        const int other = node < rows_ ? rows_ + c.col : c.row;
        if (seen[static_cast<std::size_t>(other)]) continue;
        seen[static_cast<std::size_t>(other)] = true;
        via[static_cast<std::size_t>(other)] = b;
        parent[static_cast<std::size_t>(other)] = node;
        pending.push(other);
      }
    }
    if (!seen[static_cast<std::size_t>(goal)]) {
      throw Error(ErrorKind::kNumericalFailure, "solve_transport: basis is not a spanning tree");
    }
    std::vector<int> path;
    for (int node = goal; node != start; node = parent[static_cast<std::size_t>(node)]) {
      path.push_back(via[static_cast<std::size_t>(node)]);
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  void pivot_on(Cell entering) {
    // path[0] shares the entering column and loses flow, signs alternate.
    const std::vector<int> path = tree_path(entering);
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const Cell c = basis_[static_cast<std::size_t>(path[k])];
      theta = std::min(theta, flow_(c.row, c.col));
    }
    int leaving = -1;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const Cell c = basis_[static_cast<std::size_t>(path[k])];
      if (flow_(c.row, c.col) <= theta + 1e-15) {
        if (leaving < 0 || flat(c) < flat(basis_[static_cast<std::size_t>(leaving)])) {
          leaving = path[k];
        }
      }
    }
    theta = std::max(theta, 0.0);
    for (std::size_t k = 0; k < path.size(); ++k) {
      const Cell c = basis_[static_cast<std::size_t>(path[k])];
      flow_(c.row, c.col) += (k % 2 == 0) ? -theta : theta;
    }
    const Cell out = basis_[static_cast<std::size_t>(leaving)];
    flow_(out.row, out.col) = 0.0;
    basic_[flat(out)] = false;
    basis_[static_cast<std::size_t>(leaving)] = entering;
    basic_[flat(entering)] = true;
    flow_(entering.row, entering.col) = theta;
  }

  const Matrix& cost_;
  int rows_;
  int cols_;
  Matrix flow_;
  std::vector<bool> basic_;
  std::vector<Cell> basis_;
  std::vector<double> u_;
  std::vector<double> v_;
  double tolerance_ = 0.0;
};

// ---------------------------------------------------------------------------
// Dense revised simplex for the multi-marginal LP
// ---------------------------------------------------------------------------

// min c^T x  s.t.  A x = b, x >= 0, where column f of A has a one in the row
// of each of its indices (k_0, ..., k_{J-1}). The last row of every mode j >= 1
// is dropped, which removes the J - 1 redundant equalities.
class MultiMarginalSimplex {
 public:
  MultiMarginalSimplex(const Tensor& cost, std::span<const Vector> marginals)
      : cost_(cost), shape_(cost.shape()) {
    const int modes = static_cast<int>(shape_.size());
    row_of_.resize(static_cast<std::size_t>(modes));
    int row = 0;
    for (int j = 0; j < modes; ++j) {
      const int extent = shape_[static_cast<std::size_t>(j)];
      row_of_[static_cast<std::size_t>(j)].assign(static_cast<std::size_t>(extent), -1);
      const int kept = j == 0 ? extent : extent - 1;
      for (int k = 0; k < kept; ++k) {
        row_of_[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = row;
        rhs_.push_back(marginals[static_cast<std::size_t>(j)](k));
        ++row;
      }
    }
    rows_ = row;
    columns_ = cost.size();
    rows_of_column_.resize(columns_ * static_cast<std::size_t>(modes));
    std::vector<int> index(static_cast<std::size_t>(modes), 0);
    for (std::size_t f = 0; f < columns_; ++f) {
      for (int j = 0; j < modes; ++j) {
        rows_of_column_[f * static_cast<std::size_t>(modes) + static_cast<std::size_t>(j)] =
            row_of_[static_cast<std::size_t>(j)][static_cast<std::size_t>(index[static_cast<std::size_t>(j)])];
      }
      for (int j = modes - 1; j >= 0; --j) {
        if (++index[static_cast<std::size_t>(j)] < shape_[static_cast<std::size_t>(j)]) break;
        index[static_cast<std::size_t>(j)] = 0;
      }
    }
    double max_cost = 0.0;
    for (double c : cost.values()) max_cost = std::max(max_cost, std::abs(c));
    tolerance_ = 1e-11 * (1.0 + max_cost);
  }

  std::vector<double> solve() {
    const Eigen::Index m = rows_;
    basis_.resize(static_cast<std::size_t>(m));
    for (Eigen::Index r = 0; r < m; ++r) basis_[static_cast<std::size_t>(r)] = columns_ + static_cast<std::size_t>(r);
    binv_ = Matrix::Identity(m, m);
    xb_ = Eigen::Map<const Vector>(rhs_.data(), m);

    run_phase(true);
    double infeasibility = 0.0;
    for (Eigen::Index r = 0; r < m; ++r) {
      if (is_artificial(basis_[static_cast<std::size_t>(r)])) infeasibility += xb_(r);
    }
    if (infeasibility > 1e-9) {
      throw Error(ErrorKind::kInvalidInput, "solve_multimarginal: marginals are infeasible");
    }
    drive_out_artificials();
    run_phase(false);
    refactor();

    std::vector<double> x(columns_, 0.0);
    for (Eigen::Index r = 0; r < m; ++r) {
      const std::size_t var = basis_[static_cast<std::size_t>(r)];
      if (is_artificial(var)) continue;
      double value = xb_(r);
      if (value < -1e-10) {
        throw Error(ErrorKind::kNumericalFailure,
                    "solve_multimarginal: negative basic variable after refactorization");
      }
      x[var] = std::max(value, 0.0);
    }
    return x;
  }

 private:
  bool is_artificial(std::size_t var) const { return var >= columns_; }

  double cost_of(std::size_t var, bool phase_one) const {
    if (is_artificial(var)) return phase_one ? 1.0 : 0.0;
    return phase_one ? 0.0 : cost_[var];
  }

  // B^{-1} a_var
  Vector column(std::size_t var) const {
    if (is_artificial(var)) return binv_.col(static_cast<Eigen::Index>(var - columns_));
    Vector out = Vector::Zero(rows_);
    const std::size_t modes = shape_.size();
    for (std::size_t j = 0; j < modes; ++j) {
      const int r = rows_of_column_[var * modes + j];
      if (r >= 0) out += binv_.col(r);
    }
    return out;
  }

  double reduced_cost(std::size_t var, const Vector& duals, bool phase_one) const {
    double value = cost_of(var, phase_one);
    const std::size_t modes = shape_.size();
    for (std::size_t j = 0; j < modes; ++j) {
      const int r = rows_of_column_[var * modes + j];
      if (r >= 0) value -= duals(r);
    }
    return value;
  }

  void refactor() {
    const Eigen::Index m = rows_;
    Matrix basis_matrix = Matrix::Zero(m, m);
    const std::size_t modes = shape_.size();
    for (Eigen::Index c = 0; c < m; ++c) {
      const std::size_t var = basis_[static_cast<std::size_t>(c)];
      if (is_artificial(var)) {
        basis_matrix(static_cast<Eigen::Index>(var - columns_), c) = 1.0;
      } else {
        for (std::size_t j = 0; j < modes; ++j) {
          const int r = rows_of_column_[var * modes + j];
          if (r >= 0) basis_matrix(r, c) = 1.0;
        }
      }
    }
    Eigen::PartialPivLU<Matrix> lu(basis_matrix);
    binv_ = lu.inverse();
    xb_ = binv_ * Eigen::Map<const Vector>(rhs_.data(), m);
  }

  void pivot(Eigen::Index leave_row, std::size_t entering, const Vector& alpha) {
    const double p = alpha(leave_row);
    binv_.row(leave_row) /= p;
    xb_(leave_row) /= p;
    for (Eigen::Index i = 0; i < rows_; ++i) {
      if (i == leave_row || alpha(i) == 0.0) continue;
      binv_.row(i) -= alpha(i) * binv_.row(leave_row);
      xb_(i) -= alpha(i) * xb_(leave_row);
    }
    basis_[static_cast<std::size_t>(leave_row)] = entering;
    if (++since_refactor_ >= 50) {
      refactor();
      since_refactor_ = 0;
    }
  }

  void run_phase(bool phase_one) {
    const Eigen::Index m = rows_;
    int degenerate_run = 0;
    for (int iter = 0; iter < kMaxPivots; ++iter) {
      Vector cb(m);
      for (Eigen::Index r = 0; r < m; ++r) cb(r) = cost_of(basis_[static_cast<std::size_t>(r)], phase_one);
      const Vector duals = binv_.transpose() * cb;

      // Dantzig pricing with lowest-index ties; Bland after a long run of
      // degenerate pivots.
      const bool bland = degenerate_run > 50;
      std::size_t entering = columns_;
      double best = -tolerance_;
      for (std::size_t var = 0; var < columns_; ++var) {
        const double d = reduced_cost(var, duals, phase_one);
        if (d < best) {
          entering = var;
          best = d;
          if (bland) break;
        }
      }
      if (entering == columns_) return;

      const Vector alpha = column(entering);
      Eigen::Index leave_row = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < m; ++r) {
        if (alpha(r) <= 1e-11) continue;
        const double ratio = std::max(xb_(r), 0.0) / alpha(r);
        if (leave_row < 0 || ratio < best_ratio - 1e-14) {
          best_ratio = ratio;
          leave_row = r;
        } else if (ratio <= best_ratio + 1e-14 &&
                   basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave_row)]) {
          best_ratio = std::min(best_ratio, ratio);
          leave_row = r;
        }
      }
      if (leave_row < 0) {
        throw Error(ErrorKind::kNumericalFailure, "solve_multimarginal: LP reported unbounded");
      }
      degenerate_run = best_ratio <= 1e-14 ? degenerate_run + 1 : 0;
      pivot(leave_row, entering, alpha);
    }
    throw Error(ErrorKind::kNumericalFailure, "solve_multimarginal: pivot limit reached");
  }

  // Replace zero-level artificials by real columns where possible; rows with
  // no real entry are redundant and keep their artificial at zero.
  void drive_out_artificials() {
    const std::size_t modes = shape_.size();
    for (Eigen::Index r = 0; r < rows_; ++r) {
      if (!is_artificial(basis_[static_cast<std::size_t>(r)])) continue;
      for (std::size_t var = 0; var < columns_; ++var) {
        if (std::find(basis_.begin(), basis_.end(), var) != basis_.end()) continue;
        double entry = 0.0;
        for (std::size_t j = 0; j < modes; ++j) {
          const int row = rows_of_column_[var * modes + j];
          if (row >= 0) entry += binv_(r, row);
        }
        if (std::abs(entry) > 1e-9) {
          pivot(r, var, column(var));
          break;
        }
      }
    }
  }

  const Tensor& cost_;
  std::vector<int> shape_;
  std::vector<std::vector<int>> row_of_;
  std::vector<int> rows_of_column_;
  std::vector<double> rhs_;
  Eigen::Index rows_ = 0;
  std::size_t columns_ = 0;
  double tolerance_ = 0.0;

  std::vector<std::size_t> basis_;
  Matrix binv_;
  Vector xb_;
  int since_refactor_ = 0;
};

}  // namespace

int DiscreteCoupling::support_size(double threshold) const {
  return static_cast<int>((weights.array() > threshold).count());
}

TransportSolution solve_transport(const Matrix& cost, const Vector& pi0, const Vector& pi1) {
  require(cost.rows() == pi0.size() && cost.cols() == pi1.size(), ErrorKind::kDimensionMismatch,
          "solve_transport: cost shape does not match marginals");
  require(cost.size() > 0, ErrorKind::kInvalidInput, "solve_transport: empty problem");
  require(cost.allFinite(), ErrorKind::kInvalidInput, "solve_transport: non-finite cost");
  const Vector supply = checked_simplex(pi0, kMarginalTol, "solve_transport: pi0");
  const Vector demand = checked_simplex(pi1, kMarginalTol, "solve_transport: pi1");

  TransportationSimplex simplex(cost, supply, demand);
  TransportSolution out;
  out.coupling.weights = simplex.solve();
  out.value = (out.coupling.weights.array() * cost.array()).sum();
  return out;
}

Tensor::Tensor(std::vector<int> shape, double fill) : shape_(std::move(shape)) {
  std::size_t total = 1;
  strides_.assign(shape_.size(), 1);
  for (std::size_t j = shape_.size(); j-- > 0;) {
    require(shape_[j] > 0, ErrorKind::kInvalidInput, "Tensor: extents must be positive");
    strides_[j] = total;
    total *= static_cast<std::size_t>(shape_[j]);
  }
  values_.assign(total, fill);
}

std::size_t Tensor::flat_index(std::span<const int> index) const {
  require(index.size() == shape_.size(), ErrorKind::kDimensionMismatch,
          "Tensor: index order does not match tensor order");
  std::size_t flat = 0;
  for (std::size_t j = 0; j < shape_.size(); ++j) {
    require(index[j] >= 0 && index[j] < shape_[j], ErrorKind::kInvalidInput,
            "Tensor: index out of range");
    flat += static_cast<std::size_t>(index[j]) * strides_[j];
  }
  return flat;
}

std::vector<int> Tensor::unravel(std::size_t flat) const {
  std::vector<int> index(shape_.size());
  for (std::size_t j = 0; j < shape_.size(); ++j) {
    index[j] = static_cast<int>(flat / strides_[j]);
    flat %= strides_[j];
  }
  return index;
}

std::vector<std::size_t> MultiCoupling::support(double threshold) const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < weights.size(); ++f) {
    if (weights[f] > threshold) out.push_back(f);
  }
  return out;
}

Vector MultiCoupling::marginal(int mode) const {
  require(mode >= 0 && mode < weights.order(), ErrorKind::kInvalidInput,
          "MultiCoupling::marginal: mode out of range");
  Vector out = Vector::Zero(weights.shape()[static_cast<std::size_t>(mode)]);
  for (std::size_t f = 0; f < weights.size(); ++f) {
    out(weights.unravel(f)[static_cast<std::size_t>(mode)]) += weights[f];
  }
  return out;
}

MultiTransportSolution solve_multimarginal(const Tensor& cost, std::span<const Vector> marginals) {
  const int modes = cost.order();
  require(modes >= 1, ErrorKind::kInvalidInput, "solve_multimarginal: empty cost tensor");
  require(static_cast<int>(marginals.size()) == modes, ErrorKind::kDimensionMismatch,
          "solve_multimarginal: marginal count does not match tensor order");
  if (cost.size() > kMaxMultiMarginalSize) {
    throw Error(ErrorKind::kSizeLimit, "solve_multimarginal: tensor has " +
                                           std::to_string(cost.size()) + " entries, limit is " +
                                           std::to_string(kMaxMultiMarginalSize));
  }
  std::vector<Vector> normalized;
  normalized.reserve(marginals.size());
  for (int j = 0; j < modes; ++j) {
    require(marginals[static_cast<std::size_t>(j)].size() == cost.shape()[static_cast<std::size_t>(j)],
            ErrorKind::kDimensionMismatch,
            "solve_multimarginal: marginal " + std::to_string(j) + " has the wrong length");
    normalized.push_back(checked_simplex(marginals[static_cast<std::size_t>(j)], kMarginalTol,
                                         "solve_multimarginal: marginal " + std::to_string(j)));
  }
  for (double c : cost.values()) {
    require(std::isfinite(c), ErrorKind::kInvalidInput, "solve_multimarginal: non-finite cost");
  }

  MultiMarginalSimplex simplex(cost, normalized);
  const std::vector<double> x = simplex.solve();

  MultiTransportSolution out;
  out.coupling.weights = Tensor(cost.shape());
  double value = 0.0;
  for (std::size_t f = 0; f < x.size(); ++f) {
    out.coupling.weights[f] = x[f];
    value += x[f] * cost[f];
  }
  out.value = value;
  return out;
}

}  // namespace gmmot
