#include "vgne/game.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>
#include <utility>

#include "vgne/errors.hpp"
#include "vgne/kernels.hpp"
#include "vgne/rng.hpp"

namespace vgne {

BoxSet::BoxSet(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) throw StructuralError("box bounds have different lengths");
  for (Eigen::Index j = 0; j < lower.size(); ++j) {
    if (!(lower[j] < upper[j]))
      throw PreconditionError("box needs lower < upper in every coordinate (coordinate " +
                              std::to_string(j) + ")");
  }
}

bool BoxSet::contains(const Vector& v, double slack) const {
  if (v.size() != lower.size()) return false;
  return ((v.array() >= lower.array() - slack) && (v.array() <= upper.array() + slack)).all();
}

BoxSet BoxSet::inflated(double fraction) const {
  Vector pad = fraction * (upper - lower);
  return BoxSet(lower - pad, upper + pad);
}

Vector project_box(const BoxSet& box, const Vector& v) {
  if (v.size() != box.lower.size()) throw StructuralError("project_box: length mismatch");
  return v.cwiseMax(box.lower).cwiseMin(box.upper);
}

MaxOfQuadratics::MaxOfQuadratics(std::vector<Branch> branches) : branches_(std::move(branches)) {
  if (branches_.empty()) throw StructuralError("max-of-quadratics needs at least one branch");
  for (const auto& b : branches_)
    if (b.quadratic < 0.0) throw PreconditionError("max-of-quadratics branch must be convex");
}

double MaxOfQuadratics::value(double u) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& b : branches_) best = std::max(best, (b.quadratic * u + b.linear) * u + b.constant);
  return best;
}

double MaxOfQuadratics::subgradient(double u) const {
  double best = -std::numeric_limits<double>::infinity();
  double slope = 0.0;
  for (const auto& b : branches_) {
    double val = (b.quadratic * u + b.linear) * u + b.constant;
    if (val > best) {
      best = val;
      slope = 2.0 * b.quadratic * u + b.linear;
    }
  }
  return slope;
}

double MaxOfQuadratics::prox(double v, double step, double lo, double hi) const {
  // The active branch is constant between consecutive crossings, so the
  // minimiser is the clamped minimiser of one of those quadratic pieces.
  std::vector<double> cuts{lo, hi};
  for (std::size_t p = 0; p < branches_.size(); ++p) {
    for (std::size_t q = p + 1; q < branches_.size(); ++q) {
      double a = branches_[p].quadratic - branches_[q].quadratic;
      double b = branches_[p].linear - branches_[q].linear;
      double c = branches_[p].constant - branches_[q].constant;
      auto keep = [&](double r) {
        if (std::isfinite(r) && r > lo && r < hi) cuts.push_back(r);
      };
      if (a == 0.0) {
        if (b != 0.0) keep(-c / b);
      } else {
        double disc = b * b - 4.0 * a * c;
        if (disc >= 0.0) {
          double s = std::sqrt(disc);
          keep((-b - s) / (2.0 * a));
          keep((-b + s) / (2.0 * a));
        }
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());

  auto objective = [&](double u) { return step * value(u) + 0.5 * (u - v) * (u - v); };
  double best_u = std::clamp(v, lo, hi);
  double best_val = objective(best_u);
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    double left = cuts[s], right = cuts[s + 1];
    double mid = 0.5 * (left + right);
    const Branch* active = &branches_.front();
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& b : branches_) {
      double val = (b.quadratic * mid + b.linear) * mid + b.constant;
      if (val > top) {
        top = val;
        active = &b;
      }
    }
    double u = (v - step * active->linear) / (1.0 + 2.0 * step * active->quadratic);
    u = std::clamp(u, left, right);
    double val = objective(u);
    if (val < best_val) {
      best_val = val;
      best_u = u;
    }
  }
  for (double c : cuts) {
    double val = objective(c);
    if (val < best_val) {
      best_val = val;
      best_u = c;
    }
  }
  return best_u;
}

std::string_view to_string(CouplingKind kind) {
  return kind == CouplingKind::Equality ? "equality" : "inequality";
}

CouplingKind coupling_kind_from_string(std::string_view text) {
  if (text == "equality") return CouplingKind::Equality;
  if (text == "inequality") return CouplingKind::Inequality;
  throw StructuralError("unknown coupling kind '" + std::string(text) + "'");
}

GameInstance::GameInstance(std::vector<PlayerSpec> players, std::size_t coupling_dim,
                           CouplingKind kind, std::string name)
    : players_(std::move(players)), coupling_dim_(coupling_dim), kind_(kind), name_(std::move(name)) {
  if (players_.empty()) throw StructuralError("game needs at least one player");
  if (coupling_dim_ == 0) throw StructuralError("coupling dimension must be positive");
  const auto m = static_cast<Eigen::Index>(coupling_dim_);
  for (std::size_t i = 0; i < players_.size(); ++i) {
    const auto& p = players_[i];
    const auto d = static_cast<Eigen::Index>(p.dim);
    const std::string who = "player " + std::to_string(i);
    if (p.dim == 0) throw StructuralError(who + ": dimension must be positive");
    if (p.A.rows() != m || p.A.cols() != d)
      throw StructuralError(who + ": A must be " + std::to_string(m) + "x" + std::to_string(d));
    if (p.b.size() != m) throw StructuralError(who + ": b must have length " + std::to_string(m));
    if (p.box.lower.size() != d) throw StructuralError(who + ": box dimension mismatch");
    if (!p.gradient) throw StructuralError(who + ": missing gradient oracle");
    if (!p.nonsmooth.empty()) {
      if (p.nonsmooth.size() != p.dim)
        throw StructuralError(who + ": need one nonsmooth term per coordinate");
      has_nonsmooth_ = true;
    }
    offsets_.push_back(total_dim_);
    total_dim_ += p.dim;
  }
  lower_.resize(static_cast<Eigen::Index>(total_dim_));
  upper_.resize(static_cast<Eigen::Index>(total_dim_));
  for (std::size_t i = 0; i < players_.size(); ++i) {
    block(lower_, i) = players_[i].box.lower;
    block(upper_, i) = players_[i].box.upper;
  }
}

Matrix GameInstance::coupling_matrix() const {
  Matrix out(static_cast<Eigen::Index>(coupling_dim_), static_cast<Eigen::Index>(total_dim_));
  for (std::size_t i = 0; i < players_.size(); ++i)
    out.middleCols(static_cast<Eigen::Index>(offsets_[i]), players_[i].A.cols()) = players_[i].A;
  return out;
}

Vector GameInstance::coupling_rhs() const {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(coupling_dim_));
  for (const auto& p : players_) out += p.b;
  return out;
}

Matrix GameInstance::stacked_constraints() const {
  const auto m = static_cast<Eigen::Index>(coupling_dim_);
  Matrix out = Matrix::Zero(m * static_cast<Eigen::Index>(players_.size()),
                            static_cast<Eigen::Index>(total_dim_));
  for (std::size_t i = 0; i < players_.size(); ++i)
    out.block(m * static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(offsets_[i]), m,
              players_[i].A.cols()) = players_[i].A;
  return out;
}

Vector GameInstance::stacked_rhs() const {
  const auto m = static_cast<Eigen::Index>(coupling_dim_);
  Vector out(m * static_cast<Eigen::Index>(players_.size()));
  for (std::size_t i = 0; i < players_.size(); ++i)
    out.segment(m * static_cast<Eigen::Index>(i), m) = players_[i].b;
  return out;
}

Vector GameInstance::project(const Vector& x) const {
  if (x.size() != static_cast<Eigen::Index>(total_dim_))
    throw StructuralError("project: length mismatch");
  return x.cwiseMax(lower_).cwiseMin(upper_);
}

Vector GameInstance::prox(const Vector& v, double step) const {
  if (v.size() != static_cast<Eigen::Index>(total_dim_))
    throw StructuralError("prox: length mismatch");
  if (!has_nonsmooth_) return project(v);
  Vector out(v.size());
  for (std::size_t i = 0; i < players_.size(); ++i) {
    const auto& p = players_[i];
    const auto off = static_cast<Eigen::Index>(offsets_[i]);
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p.dim); ++j) {
      if (p.nonsmooth.empty())
        out[off + j] = std::clamp(v[off + j], p.box.lower[j], p.box.upper[j]);
      else
        out[off + j] = p.nonsmooth[static_cast<std::size_t>(j)].prox(v[off + j], step,
                                                                     p.box.lower[j], p.box.upper[j]);
    }
  }
  return out;
}

Vector smooth_pseudo_gradient(const GameInstance& game, const Vector& x) {
  if (x.size() != static_cast<Eigen::Index>(game.total_dim()))
    throw StructuralError("pseudo-gradient: decision has length " + std::to_string(x.size()) +
                          ", game has n = " + std::to_string(game.total_dim()));
  Vector out(x.size());
  kernels::smooth_pseudo_gradient(game, x, out);
  if (!out.allFinite()) throw NumericError("pseudo-gradient oracle returned a non-finite value");
  return out;
}

Vector pseudo_subdifferential(const GameInstance& game, const Vector& x) {
  Vector out = smooth_pseudo_gradient(game, x);
  if (game.has_nonsmooth()) {
    for (std::size_t i = 0; i < game.num_players(); ++i) {
      const auto& p = game.player(i);
      if (p.nonsmooth.empty()) continue;
      const auto off = static_cast<Eigen::Index>(game.offset(i));
      for (std::size_t j = 0; j < p.dim; ++j) {
        const auto at = off + static_cast<Eigen::Index>(j);
        out[at] += p.nonsmooth[j].subgradient(x[at]);
      }
    }
    if (!out.allFinite()) throw NumericError("subgradient selection is not finite");
  }
  return out;
}

double player_objective(const GameInstance& game, std::size_t i, const Vector& x) {
  const auto& p = game.player(i);
  if (!p.cost) throw PreconditionError("player " + std::to_string(i) + " has no cost oracle");
  double val = p.cost(x);
  if (!p.nonsmooth.empty()) {
    auto xi = game.block(x, i);
    for (std::size_t j = 0; j < p.dim; ++j) val += p.nonsmooth[j].value(xi[static_cast<Eigen::Index>(j)]);
  }
  return val;
}

namespace {

Vector sample_box(const GameInstance& game, Rng& rng) {
  Vector x(static_cast<Eigen::Index>(game.total_dim()));
  for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = rng.uniform(game.lower()[j], game.upper()[j]);
  return x;
}

}  // namespace

MonotonicityReport check_monotonicity_samples(const GameInstance& game, std::size_t n_pairs,
                                              std::uint64_t seed, double tol) {
  if (n_pairs == 0) throw PreconditionError("monotonicity audit needs n_pairs >= 1");
  Rng rng(seed);
  MonotonicityReport report;
  report.min_inner_product = std::numeric_limits<double>::infinity();
  report.pairs = n_pairs;
  for (std::size_t s = 0; s < n_pairs; ++s) {
    Vector x = sample_box(game, rng);
    Vector y = sample_box(game, rng);
    double ip = (x - y).dot(pseudo_subdifferential(game, x) - pseudo_subdifferential(game, y));
    report.min_inner_product = std::min(report.min_inner_product, ip);
    if (ip < -tol) ++report.violations;
  }
  return report;
}

double estimate_lipschitz(const GameInstance& game, std::size_t n_pairs, std::uint64_t seed) {
  Rng rng(seed);
  double best = 0.0;
  for (std::size_t s = 0; s < n_pairs; ++s) {
    Vector x = sample_box(game, rng);
    Vector y = sample_box(game, rng);
    double gap = (x - y).norm();
    if (gap == 0.0) continue;
    best = std::max(best,
                    (smooth_pseudo_gradient(game, x) - smooth_pseudo_gradient(game, y)).norm() / gap);
  }
  return best;
}

namespace {
std::mutex sink_mutex;
std::function<void(const std::string&)> warning_sink;
}  // namespace

void warn(const std::string& message) {
  std::lock_guard lock(sink_mutex);
  if (warning_sink)
    warning_sink(message);
  else
    std::cerr << "warning: " << message << '\n';
}

void set_warning_sink(std::function<void(const std::string&)> sink) {
  std::lock_guard lock(sink_mutex);
  warning_sink = std::move(sink);
}

}  // namespace vgne
