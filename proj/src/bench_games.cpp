#include "vgne/bench_games.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <utility>

#include "vgne/errors.hpp"
#include "vgne/rng.hpp"

namespace vgne {

namespace {

nlohmann::json to_json_vector(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index j = 0; j < v.size(); ++j) out.push_back(v[j]);
  return out;
}

nlohmann::json to_json_matrix(const Matrix& a) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) out.push_back(to_json_vector(a.row(r).transpose()));
  return out;
}

}  // namespace

QuadraticGame gen_quadratic_testgame(const QuadraticGameSpec& spec) {
  if (spec.t.size() != 2) throw StructuralError("quadratic test game needs t of length 2");
  if (std::abs(spec.delta) > 1.0)
    throw PreconditionError("quadratic test game needs |delta| <= 1 to stay monotone");
  const double delta = spec.delta;
  const Vector t = spec.t;
  const double w = spec.box_halfwidth;

  std::vector<PlayerSpec> players;
  for (int i = 0; i < 2; ++i) {
    const Eigen::Index self = i, other = 1 - i;
    PlayerSpec p;
    p.dim = 1;
    p.gradient = [=](const Vector& x, Eigen::Ref<Vector> out) {
      out[0] = x[self] - t[self] + delta * x[other];
    };
    p.cost = [=](const Vector& x) {
      return 0.5 * (x[self] - t[self]) * (x[self] - t[self]) + delta * x[self] * x[other];
    };
    p.best_response = [=](const Vector& x, const Matrix& weight, const Vector& anchor,
                          const Vector& shift, Eigen::Ref<Vector> out) {
      const double r = weight(0, 0);
      double u = (t[self] - delta * x[other] + r * anchor[0] - shift[0]) / (1.0 + r);
      out[0] = std::clamp(u, -w, w);
    };
    p.A = Matrix::Ones(1, 1);
    p.b = Vector::Constant(1, spec.c / 2.0);
    p.box = BoxSet(Vector::Constant(1, -w), Vector::Constant(1, w));
    players.push_back(std::move(p));
  }
  std::string name = spec.kind == CouplingKind::Equality ? "quadratic_equality" : "quadratic_inequality";
  GameInstance game(std::move(players), 1, spec.kind, name);
  game.lipschitz_hint = 1.0 + std::abs(delta);

  // Closed form: (1 - delta)(x1 - x2) = t1 - t2, x1 + x2 = c.
  Vector x(2);
  double lambda = (t[0] + t[1] - spec.c * (1.0 + delta)) / 2.0;
  double gap = 1.0 - delta;
  double diff = gap == 0.0 ? 0.0 : (t[0] - t[1]) / gap;
  x << (spec.c + diff) / 2.0, (spec.c - diff) / 2.0;
  if (spec.kind == CouplingKind::Inequality && lambda < 0.0) {
    // constraint inactive: unconstrained equilibrium (I + delta J) x = t
    double det = 1.0 - delta * delta;
    if (det == 0.0) throw PreconditionError("delta = 1 with an inactive constraint has no unique equilibrium");
    x << (t[0] - delta * t[1]) / det, (t[1] - delta * t[0]) / det;
    lambda = 0.0;
  }
  if ((x.array().abs() >= w).any())
    throw PreconditionError("quadratic test game: solution touches the box; widen box_halfwidth");
  game.metadata = {{"generator", name},
                   {"t", to_json_vector(t)},
                   {"delta", delta},
                   {"c", spec.c},
                   {"box_halfwidth", w}};
  Matrix q0(1, 2), q1(1, 2);
  q0 << 1.0, delta;
  q1 << delta, 1.0;
  game.metadata["objective"] = {
      {"type", "affine"},
      {"players",
       {{{"Q", to_json_matrix(q0)}, {"q", to_json_vector(Vector::Constant(1, -t[0]))}},
        {{"Q", to_json_matrix(q1)}, {"q", to_json_vector(Vector::Constant(1, -t[1]))}}}}};
  return {std::move(game), x, lambda};
}

GameInstance make_affine_game(std::vector<AffinePlayer> players, std::size_t m, CouplingKind kind,
                              std::string name) {
  std::vector<PlayerSpec> specs;
  nlohmann::json objective = nlohmann::json::array();
  Eigen::Index offset = 0;
  for (auto& ap : players) {
    auto q_rows = std::make_shared<const Matrix>(ap.Q_rows);
    auto q = std::make_shared<const Vector>(ap.q);
    const Eigen::Index off = offset;
    const Eigen::Index d = ap.Q_rows.rows();
    if (ap.q.size() != d) throw StructuralError("affine player: q length differs from Q rows");
    PlayerSpec p;
    p.dim = static_cast<std::size_t>(d);
    p.gradient = [q_rows, q](const Vector& x, Eigen::Ref<Vector> out) {
      if (x.size() != q_rows->cols()) throw StructuralError("affine gradient: decision length mismatch");
      out.noalias() = *q_rows * x;
      out += *q;
    };
    p.cost = [q_rows, q, off, d](const Vector& x) {
      // 1/2 x_i' Q_ii x_i + x_i' (Q_i,-i x_-i) + q' x_i
      Vector xi = x.segment(off, d);
      Vector full = *q_rows * x;
      Vector own = q_rows->middleCols(off, d) * xi;
      return 0.5 * xi.dot(own) + xi.dot(full - own) + q->dot(xi);
    };
    p.A = ap.A;
    p.b = ap.b;
    p.box = ap.box;
    objective.push_back({{"Q", to_json_matrix(ap.Q_rows)}, {"q", to_json_vector(ap.q)}});
    specs.push_back(std::move(p));
    offset += d;
  }
  for (const auto& ap : players)
    if (ap.Q_rows.cols() != offset) throw StructuralError("affine player: Q must have n columns");
  GameInstance game(std::move(specs), m, kind, std::move(name));
  Matrix q_all(offset, offset);
  Eigen::Index r = 0;
  for (const auto& ap : players) {
    q_all.middleRows(r, ap.Q_rows.rows()) = ap.Q_rows;
    r += ap.Q_rows.rows();
  }
  game.lipschitz_hint = operator_norm(q_all);
  game.metadata = {{"objective", {{"type", "affine"}, {"players", objective}}}};
  return game;
}

GameInstance make_zero_game(std::vector<std::size_t> dims, std::vector<Matrix> A,
                            std::vector<Vector> b, std::vector<BoxSet> boxes, CouplingKind kind) {
  if (A.size() != dims.size() || b.size() != dims.size() || boxes.size() != dims.size())
    throw StructuralError("zero game: per-player data lengths differ");
  std::vector<PlayerSpec> specs;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    PlayerSpec p;
    p.dim = dims[i];
    p.gradient = [](const Vector&, Eigen::Ref<Vector> out) { out.setZero(); };
    p.cost = [](const Vector&) { return 0.0; };
    BoxSet box = boxes[i];
    p.best_response = [box](const Vector&, const Matrix& weight, const Vector& anchor,
                            const Vector& shift, Eigen::Ref<Vector> out) {
      // The weighted box projection is a clamp only for diagonal weights.
      if (!weight.isApprox(Matrix(weight.diagonal().asDiagonal()), 0.0))
        throw PreconditionError("zero game best response needs a diagonal prox weight");
      out = project_box(box, anchor - weight.llt().solve(shift));
    };
    p.A = std::move(A[i]);
    p.b = std::move(b[i]);
    p.box = std::move(boxes[i]);
    specs.push_back(std::move(p));
  }
  const std::size_t m = specs.front().A.rows();
  GameInstance game(std::move(specs), m, kind, "zero");
  game.lipschitz_hint = 0.0;
  game.metadata = {{"objective", {{"type", "zero"}}}};
  return game;
}

std::vector<std::vector<std::size_t>> rate_control_paths() {
  std::vector<std::vector<std::size_t>> paths;
  for (std::size_t i = 0; i < 15; ++i) paths.push_back({i, i + 1, (i + 7) % 16});
  return paths;
}

GameInstance gen_rate_control(std::uint64_t seed) {
  constexpr std::size_t kUsers = 15, kLinks = 16;
  Rng rng(seed);
  auto draw = [&](std::size_t n, double lo, double hi) {
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = rng.uniform(lo, hi);
    return v;
  };
  Vector C = draw(kLinks, 10, 15);
  Vector B = draw(kUsers, 5, 10);
  Vector chi = draw(kUsers, 10, 20);
  Vector kappa = draw(kLinks, 10, 30);
  Vector xi = draw(kLinks, 20, 40);

  auto paths = rate_control_paths();
  Matrix A = Matrix::Zero(kLinks, kUsers);
  for (std::size_t i = 0; i < kUsers; ++i)
    for (std::size_t j : paths[i]) A(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;

  // Keep every delay denominator >= 1 over the 10%-inflated box.
  double scale = 1.0;
  Vector load = 1.1 * (A * B);
  for (Eigen::Index j = 0; j < load.size(); ++j)
    if (C[j] + xi[j] - load[j] < 1.0) scale = std::min(scale, (C[j] + xi[j] - 1.0) / load[j]);
  if (scale < 1.0) B *= scale;

  auto shared_A = std::make_shared<const Matrix>(A);
  auto shared = std::make_shared<const std::array<Vector, 3>>(std::array<Vector, 3>{C, kappa, xi});
  std::vector<PlayerSpec> players;
  for (std::size_t i = 0; i < kUsers; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    const double chi_i = chi[col];
    PlayerSpec p;
    p.dim = 1;
    p.gradient = [shared_A, shared, col, chi_i](const Vector& x, Eigen::Ref<Vector> out) {
      const auto& [cap, kap, off] = *shared;
      Vector den = cap - *shared_A * x + off;
      Vector a = shared_A->col(col);
      double g = -chi_i / (x[col] + 1.0);
      g += a.dot(kap.cwiseQuotient(den));
      g += x[col] * a.dot(kap.cwiseQuotient(den.cwiseProduct(den)));
      out[0] = g;
    };
    p.cost = [shared_A, shared, col, chi_i](const Vector& x) {
      const auto& [cap, kap, off] = *shared;
      Vector den = cap - *shared_A * x + off;
      return -chi_i * std::log(x[col] + 1.0) + x[col] * shared_A->col(col).dot(kap.cwiseQuotient(den));
    };
    p.A = A.col(col);
    p.b = C / static_cast<double>(kUsers);
    p.box = BoxSet(Vector::Zero(1), Vector::Constant(1, B[col]));
    players.push_back(std::move(p));
  }
  GameInstance game(std::move(players), kLinks, CouplingKind::Inequality, "rate_control");
  game.lipschitz_hint = 1.5 * estimate_lipschitz(game, 500, seed ^ 0x9e3779b97f4a7c15ULL);
  MonotonicityReport mono = check_monotonicity_samples(game, 1000, seed);
  if (mono.violations > 0)
    warn("rate_control seed " + std::to_string(seed) + ": " + std::to_string(mono.violations) +
         " sampled monotonicity violations (min inner product " + std::to_string(mono.min_inner_product) + ")");
  nlohmann::json path_json = nlohmann::json::array();
  for (const auto& pth : paths) {
    nlohmann::json one = nlohmann::json::array();
    for (std::size_t j : pth) one.push_back(j + 1);
    path_json.push_back(one);
  }
  game.metadata = {{"generator", "rate_control"},
                   {"seed", seed},
                   {"rng", "mt19937_64, uniform = (bits >> 11) * 2^-53"},
                   {"paths_1based", path_json},
                   {"C", to_json_vector(C)},
                   {"B", to_json_vector(B)},
                   {"chi", to_json_vector(chi)},
                   {"kappa", to_json_vector(kappa)},
                   {"xi", to_json_vector(xi)},
                   {"B_rescale", scale},
                   {"monotonicity_violations", mono.violations}};
  return game;
}

const std::vector<std::size_t>& task_allocation_blue() {
  static const std::vector<std::size_t> blue{1, 2, 3, 2, 3, 5, 6, 5, 6, 7, 2, 2, 3, 4};
  return blue;
}

const std::vector<std::size_t>& task_allocation_red() {
  static const std::vector<std::size_t> red{2, 3, 4, 3, 4, 6, 7, 6, 7, 8, 5, 6, 7, 7};
  return red;
}

namespace {

struct TaskDraw {
  Vector C, chi, kappa, d;
  Matrix q, xi, l, p, B;  // 14 x 4
  std::vector<Matrix> S, A;
};

TaskDraw draw_tasks(Rng& rng) {
  constexpr Eigen::Index kWorkers = 14, kTasks = 8, kOut = 4;
  TaskDraw t;
  auto vec = [&](Eigen::Index n, double lo, double hi) {
    Vector v(n);
    for (Eigen::Index j = 0; j < n; ++j) v[j] = rng.uniform(lo, hi);
    return v;
  };
  auto mat = [&](double lo, double hi) {
    Matrix a(kWorkers, kOut);
    for (Eigen::Index i = 0; i < kWorkers; ++i)
      for (Eigen::Index s = 0; s < kOut; ++s) a(i, s) = rng.uniform(lo, hi);
    return a;
  };
  t.C = vec(kTasks, 1, 2);
  t.chi = vec(kTasks, 0.1, 0.6);
  t.kappa = vec(kTasks, 10, 20);
  t.q = mat(1, 2);
  t.xi = mat(6, 12);
  t.l = mat(1, 3);
  t.d = vec(kWorkers, 1, 2);
  t.p = mat(0, 1);
  for (Eigen::Index i = 0; i < kWorkers; ++i) t.p.row(i) /= t.p.row(i).sum();
  for (Eigen::Index i = 0; i < kWorkers; ++i) {
    Matrix g(kOut, kOut);
    for (Eigen::Index r = 0; r < kOut; ++r)
      for (Eigen::Index c = 0; c < kOut; ++c) g(r, c) = rng.uniform(-1, 1);
    t.S.push_back(g * g.transpose() / static_cast<double>(kOut) + 0.1 * Matrix::Identity(kOut, kOut));
  }
  t.B = mat(1, 3);
  const auto& blue = task_allocation_blue();
  const auto& red = task_allocation_red();
  for (Eigen::Index i = 0; i < kWorkers; ++i) {
    Matrix a = Matrix::Zero(kTasks, kOut);
    const auto bi = static_cast<Eigen::Index>(blue[static_cast<std::size_t>(i)] - 1);
    const auto ri = static_cast<Eigen::Index>(red[static_cast<std::size_t>(i)] - 1);
    a(bi, 0) = rng.uniform(0.5, 1);
    a(bi, 1) = rng.uniform(0.5, 1);
    a(ri, 2) = rng.uniform(0.5, 1);
    a(ri, 3) = rng.uniform(0.5, 1);
    t.A.push_back(a);
  }
  return t;
}

// Tasks decouple (one nonzero per column), so each one only needs its
// capacity to strictly exceed its share of sum b_i.
bool task_feasible(const TaskDraw& t) {
  Vector cap = Vector::Zero(t.C.size());
  for (std::size_t i = 0; i < t.A.size(); ++i)
    cap += t.A[i] * t.B.row(static_cast<Eigen::Index>(i)).transpose();
  Vector target = t.C * (14.0 / 15.0);
  return (cap.array() > target.array()).all();
}

}  // namespace

GameInstance gen_task_allocation(std::uint64_t seed) {
  constexpr std::size_t kWorkers = 14, kTasks = 8;
  Rng rng(seed);
  TaskDraw t = draw_tasks(rng);
  std::size_t attempts = 1;
  while (!task_feasible(t)) {
    if (attempts >= 1000) throw NumericError("task allocation: no feasible draw in 1000 attempts");
    t = draw_tasks(rng);
    ++attempts;
  }

  std::vector<std::shared_ptr<const Matrix>> all_A;
  for (const auto& a : t.A) all_A.push_back(std::make_shared<const Matrix>(a));
  auto task_data = std::make_shared<const std::pair<Vector, Vector>>(t.kappa, t.chi);

  // s = A x over all workers
  auto total = [all_A](const Vector& x) {
    Vector s = Vector::Zero(8);
    for (std::size_t j = 0; j < all_A.size(); ++j)
      s.noalias() += *all_A[j] * x.segment(static_cast<Eigen::Index>(4 * j), 4);
    return s;
  };

  std::vector<PlayerSpec> players;
  for (std::size_t i = 0; i < kWorkers; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const Eigen::Index off = 4 * row;
    Vector p = t.p.row(row).transpose();
    Matrix S = t.S[i];
    Matrix A = t.A[i];
    const double d = t.d[row];
    PlayerSpec ps;
    ps.dim = 4;
    ps.gradient = [=](const Vector& x, Eigen::Ref<Vector> out) {
      const auto& [kappa, chi] = *task_data;
      Vector s = total(x);
      Vector price = kappa - chi.cwiseProduct((s.array() + 1.0).log().matrix());
      Vector slope = chi.cwiseQuotient((s.array() + 1.0).matrix());
      Vector xi = x.segment(off, 4);
      Vector ax = A * xi;
      out.noalias() = 2.0 * (p.dot(xi) - d) * p + 2.0 * S * xi - A.transpose() * price +
                      A.transpose() * slope.cwiseProduct(ax);
    };
    ps.cost = [=](const Vector& x) {
      const auto& [kappa, chi] = *task_data;
      Vector s = total(x);
      Vector price = kappa - chi.cwiseProduct((s.array() + 1.0).log().matrix());
      Vector xi = x.segment(off, 4);
      double r = p.dot(xi) - d;
      return r * r + xi.dot(S * xi) - price.dot(A * xi);
    };
    for (Eigen::Index s = 0; s < 4; ++s)
      ps.nonsmooth.emplace_back(std::vector<MaxOfQuadratics::Branch>{
          {t.q(row, s), -t.xi(row, s), 0.0}, {0.0, t.l(row, s), 0.0}});
    ps.A = A;
    ps.b = t.C / 15.0;
    ps.box = BoxSet(Vector::Zero(4), t.B.row(row).transpose());
    players.push_back(std::move(ps));
  }
  GameInstance game(std::move(players), kTasks, CouplingKind::Equality, "task_allocation");
  game.lipschitz_hint = 1.5 * estimate_lipschitz(game, 500, seed ^ 0x9e3779b97f4a7c15ULL);
  MonotonicityReport mono = check_monotonicity_samples(game, 1000, seed);
  if (mono.violations > 0)
    warn("task_allocation seed " + std::to_string(seed) + ": " + std::to_string(mono.violations) +
         " sampled monotonicity violations (min inner product " + std::to_string(mono.min_inner_product) + ")");
  nlohmann::json workers = nlohmann::json::array();
  for (std::size_t i = 0; i < kWorkers; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    workers.push_back({{"q", to_json_vector(t.q.row(row).transpose())},
                       {"xi", to_json_vector(t.xi.row(row).transpose())},
                       {"l", to_json_vector(t.l.row(row).transpose())},
                       {"p", to_json_vector(t.p.row(row).transpose())},
                       {"d", t.d[row]},
                       {"S", to_json_matrix(t.S[i])},
                       {"B", to_json_vector(t.B.row(row).transpose())}});
  }
  nlohmann::json blue = task_allocation_blue(), red = task_allocation_red();
  game.metadata = {{"generator", "task_allocation"},
                   {"seed", seed},
                   {"rng", "mt19937_64, uniform = (bits >> 11) * 2^-53"},
                   {"draw_attempts", attempts},
                   {"blue_tasks_1based", blue},
                   {"red_tasks_1based", red},
                   {"C", to_json_vector(t.C)},
                   {"chi", to_json_vector(t.chi)},
                   {"kappa", to_json_vector(t.kappa)},
                   {"workers", workers},
                   {"monotonicity_violations", mono.violations}};
  return game;
}

CommGraph rate_control_graph() { return path_graph(15); }
CommGraph task_allocation_graph() { return path_graph(14); }

GameInstance generate_builtin(const std::string& name, std::uint64_t seed) {
  if (name == "rate_control") return gen_rate_control(seed);
  if (name == "task_allocation") return gen_task_allocation(seed);
  if (name == "quadratic_equality" || name == "quadratic_inequality") {
    QuadraticGameSpec spec;
    spec.t = Vector(2);
    spec.t << 2.0, 1.0;
    spec.delta = 0.5;
    spec.c = 1.0;
    spec.kind = name == "quadratic_equality" ? CouplingKind::Equality : CouplingKind::Inequality;
    return gen_quadratic_testgame(spec).game;
  }
  throw StructuralError("unknown builtin game '" + name + "'");
}

}  // namespace vgne
