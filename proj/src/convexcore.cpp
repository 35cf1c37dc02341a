#include "windclear/convexcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <cstdlib>
#include <cstdio>
#include <stdexcept>

namespace windclear {

int ConvexProgram::add_variable(const std::string& name, double lb, double ub) {
  if (index_.count(name)) throw std::invalid_argument("duplicate variable name: " + name);
  if (!(lb <= ub)) throw std::invalid_argument("variable '" + name + "': lb > ub");
  int i = static_cast<int>(names_.size());
  names_.push_back(name);
  index_[name] = i;
  lb_.push_back(lb);
  ub_.push_back(ub);
  return i;
}

int ConvexProgram::variable(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("unknown variable: " + name);
  return it->second;
}

void ConvexProgram::add_quadratic(int var, double coef) {
  if (coef < 0) throw std::invalid_argument("negative diagonal quadratic coefficient");
  quad_[var] += coef;
}

void ConvexProgram::add_quad_cross(int vi, int vj, double coef) {
  if (vi == vj) {
    add_quadratic(vi, coef);
    return;
  }
  cross_.emplace_back(vi, vj, coef);
}

void ConvexProgram::add_linear(int var, double coef) { lin_[var] += coef; }

void ConvexProgram::check_label(const std::string& label) {
  if (label.empty()) throw std::invalid_argument("empty constraint label");
  if (!labels_.emplace(label, 1).second) throw std::invalid_argument("duplicate constraint label: " + label);
}

void ConvexProgram::add_equality(LinearExpr row, double rhs, const std::string& label) {
  check_label(label);
  eqs_.push_back({std::move(row), rhs, label});
}

void ConvexProgram::add_inequality(LinearExpr row, double rhs, const std::string& label) {
  check_label(label);
  ineqs_.push_back({std::move(row), rhs, label});
}

void ConvexProgram::add_soc(SocBlock block) {
  check_label(block.label);
  socs_.push_back(std::move(block));
}

double ConvexProgram::objective_at(const Eigen::VectorXd& x) const {
  double v = constant_;
  for (auto [i, c] : quad_) v += c * x[i] * x[i];
  for (auto [i, j, c] : cross_) v += c * x[i] * x[j];
  for (auto [i, c] : lin_) v += c * x[i];
  return v;
}

std::string ConvexProgram::dump() const {
  std::ostringstream os;
  os.precision(12);
  os << "minimize ";
  bool first = true;
  for (auto [i, c] : quad_) {
    os << (first ? "" : " + ") << c << "*" << names_[i] << "^2";
    first = false;
  }
  for (auto [i, j, c] : cross_) {
    os << (first ? "" : " + ") << c << "*" << names_[i] << "*" << names_[j];
    first = false;
  }
  for (auto [i, c] : lin_) {
    os << (first ? "" : " + ") << c << "*" << names_[i];
    first = false;
  }
  if (constant_ != 0.0 || first) os << (first ? "" : " + ") << constant_;
  os << "\n";
  auto put_expr = [&](const LinearExpr& e) {
    bool f = true;
    for (auto [i, c] : e.terms) {
      os << (f ? "" : " + ") << c << "*" << names_[i];
      f = false;
    }
    if (e.constant != 0.0 || f) os << (f ? "" : " + ") << e.constant;
  };
  for (const auto& c : eqs_) {
    os << c.label << ": ";
    put_expr(c.row);
    os << " == " << c.rhs << "\n";
  }
  for (const auto& c : ineqs_) {
    os << c.label << ": ";
    put_expr(c.row);
    os << " <= " << c.rhs << "\n";
  }
  for (const auto& s : socs_) {
    os << s.label << ": ||" << s.scale << " * (";
    for (size_t k = 0; k < s.rows.size(); ++k) {
      if (k) os << "; ";
      put_expr(s.rows[k]);
    }
    os << ")|| <= ";
    put_expr(s.bound);
    os << "\n";
  }
  for (int i = 0; i < num_variables(); ++i) {
    if (lb_[i] != -kInf || ub_[i] != kInf)
      os << names_[i] << " in [" << lb_[i] << ", " << ub_[i] << "]\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Interior point machinery
// ---------------------------------------------------------------------------

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct ConeLayout {
  int l = 0;                 // leading orthant rows
  std::vector<int> socs;     // SOC block sizes
  int m = 0;                 // total rows
  int deg = 0;               // barrier degree

  void finish() {
    m = l;
    for (int r : socs) m += r;
    deg = l + static_cast<int>(socs.size());
  }
};

struct Assembled {
  MatrixXd P;
  VectorXd q;
  MatrixXd A;
  VectorXd b;
  MatrixXd G;
  VectorXd h;
  ConeLayout cone;
  // row labels aligned with G's orthant part and SOC blocks
  std::vector<std::string> ineq_labels;  // size cone.l
  std::vector<std::string> soc_labels;
};

Assembled assemble(const ConvexProgram& p) {
  int n = p.num_variables();
  Assembled a;
  a.P = MatrixXd::Zero(n, n);
  for (auto [i, c] : p.quad_diag()) a.P(i, i) += 2.0 * c;
  for (auto [i, j, c] : p.quad_cross()) {
    a.P(i, j) += c;
    a.P(j, i) += c;
  }
  if (!p.quad_cross().empty()) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(a.P);
    if (es.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, a.P.norm()))
      throw std::invalid_argument("objective is not positive semidefinite");
  }
  a.q = VectorXd::Zero(n);
  for (auto [i, c] : p.linear()) a.q[i] += c;

  const auto& eqs = p.equalities();
  a.A = MatrixXd::Zero(static_cast<int>(eqs.size()), n);
  a.b = VectorXd::Zero(static_cast<int>(eqs.size()));
  for (size_t r = 0; r < eqs.size(); ++r) {
    for (auto [i, c] : eqs[r].row.terms) a.A(static_cast<int>(r), i) += c;
    a.b[static_cast<int>(r)] = eqs[r].rhs - eqs[r].row.constant;
  }

  std::vector<std::pair<VectorXd, double>> rows;
  for (const auto& c : p.inequalities()) {
    VectorXd g = VectorXd::Zero(n);
    for (auto [i, v] : c.row.terms) g[i] += v;
    rows.emplace_back(g, c.rhs - c.row.constant);
    a.ineq_labels.push_back(c.label);
  }
  for (int i = 0; i < n; ++i) {
    if (p.lower_bound(i) != -ConvexProgram::kInf) {
      VectorXd g = VectorXd::Zero(n);
      g[i] = -1.0;
      rows.emplace_back(g, -p.lower_bound(i));
      a.ineq_labels.push_back("_lb:" + p.variable_name(i));
    }
    if (p.upper_bound(i) != ConvexProgram::kInf) {
      VectorXd g = VectorXd::Zero(n);
      g[i] = 1.0;
      rows.emplace_back(g, p.upper_bound(i));
      a.ineq_labels.push_back("_ub:" + p.variable_name(i));
    }
  }
  a.cone.l = static_cast<int>(rows.size());
  for (const auto& s : p.soc_blocks()) {
    a.cone.socs.push_back(static_cast<int>(s.rows.size()) + 1);
    a.soc_labels.push_back(s.label);
  }
  a.cone.finish();

  a.G = MatrixXd::Zero(a.cone.m, n);
  a.h = VectorXd::Zero(a.cone.m);
  for (int r = 0; r < a.cone.l; ++r) {
    a.G.row(r) = rows[r].first.transpose();
    a.h[r] = rows[r].second;
  }
  int off = a.cone.l;
  for (const auto& s : p.soc_blocks()) {
    // s0 = bound.x + bound.const  ->  G row = -bound, h = bound.const
    for (auto [i, c] : s.bound.terms) a.G(off, i) -= c;
    a.h[off] = s.bound.constant;
    for (size_t k = 0; k < s.rows.size(); ++k) {
      int r = off + 1 + static_cast<int>(k);
      for (auto [i, c] : s.rows[k].terms) a.G(r, i) -= s.scale * c;
      a.h[r] = s.scale * s.rows[k].constant;
    }
    off += 1 + static_cast<int>(s.rows.size());
  }
  return a;
}

double cone_min_margin(const ConeLayout& K, const VectorXd& s) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < K.l; ++i) m = std::min(m, s[i]);
  int off = K.l;
  for (int r : K.socs) {
    m = std::min(m, s[off] - s.segment(off + 1, r - 1).norm());
    off += r;
  }
  return K.m ? m : 1.0;
}

VectorXd cone_identity(const ConeLayout& K) {
  VectorXd e = VectorXd::Zero(K.m);
  for (int i = 0; i < K.l; ++i) e[i] = 1.0;
  int off = K.l;
  for (int r : K.socs) {
    e[off] = 1.0;
    off += r;
  }
  return e;
}

VectorXd jordan_prod(const ConeLayout& K, const VectorXd& u, const VectorXd& v) {
  VectorXd w(K.m);
  for (int i = 0; i < K.l; ++i) w[i] = u[i] * v[i];
  int off = K.l;
  for (int r : K.socs) {
    auto u1 = u.segment(off + 1, r - 1);
    auto v1 = v.segment(off + 1, r - 1);
    w[off] = u[off] * v[off] + u1.dot(v1);
    w.segment(off + 1, r - 1) = u[off] * v1 + v[off] * u1;
    off += r;
  }
  return w;
}

VectorXd jordan_div(const ConeLayout& K, const VectorXd& lam, const VectorXd& d) {
  VectorXd u(K.m);
  for (int i = 0; i < K.l; ++i) u[i] = d[i] / lam[i];
  int off = K.l;
  for (int r : K.socs) {
    double l0 = lam[off];
    auto l1 = lam.segment(off + 1, r - 1);
    double d0 = d[off];
    auto d1 = d.segment(off + 1, r - 1);
    double den = l0 * l0 - l1.squaredNorm();
    u[off] = (l0 * d0 - l1.dot(d1)) / den;
    u.segment(off + 1, r - 1) = -d0 * l1 / den + d1 / l0 + (l1.dot(d1) / (l0 * den)) * l1;
    off += r;
  }
  return u;
}

double max_cone_step(const ConeLayout& K, const VectorXd& s, const VectorXd& ds) {
  double t = 1.0;
  for (int i = 0; i < K.l; ++i)
    if (ds[i] < 0) t = std::min(t, -s[i] / ds[i]);
  int off = K.l;
  for (int r : K.socs) {
    double s0 = s[off], d0 = ds[off];
    auto s1 = s.segment(off + 1, r - 1);
    auto d1 = ds.segment(off + 1, r - 1);
    double aa = d0 * d0 - d1.squaredNorm();
    double bb = s0 * d0 - s1.dot(d1);
    double cc = s0 * s0 - s1.squaredNorm();
    if (!(aa >= 0 && bb >= 0)) {
      double disc = bb * bb - aa * cc;
      if (disc >= 0) {
        double sq = std::sqrt(disc);
        double cand = std::numeric_limits<double>::infinity();
        if (aa != 0.0) {
          double r1 = (-bb - sq) / aa;
          double r2 = (-bb + sq) / aa;
          if (r1 > 1e-14) cand = std::min(cand, r1);
          if (r2 > 1e-14) cand = std::min(cand, r2);
        } else if (bb != 0.0) {
          double r1 = -cc / (2 * bb);
          if (r1 > 1e-14) cand = r1;
        }
        t = std::min(t, cand);
      }
    }
    if (d0 < 0) t = std::min(t, -s0 / d0);
    off += r;
  }
  return t;
}

// Nesterov-Todd scaling as an explicit symmetric block matrix W with W z = lam.
void nt_scaling(const ConeLayout& K, const VectorXd& s, const VectorXd& z, MatrixXd& W, VectorXd& lam) {
  W.setZero(K.m, K.m);
  lam.resize(K.m);
  for (int i = 0; i < K.l; ++i) {
    W(i, i) = std::sqrt(s[i] / z[i]);
    lam[i] = std::sqrt(s[i] * z[i]);
  }
  int off = K.l;
  for (int r : K.socs) {
    auto sb = s.segment(off, r);
    auto zb = z.segment(off, r);
    auto jn = [&](const VectorXd& v) {
      return std::sqrt(v[0] * v[0] - v.segment(1, r - 1).squaredNorm());
    };
    double snorm = jn(sb), znorm = jn(zb);
    VectorXd sbar = sb / snorm, zbar = zb / znorm;
    double gam = std::sqrt((1.0 + sbar.dot(zbar)) / 2.0);
    VectorXd jz = zbar;
    jz.segment(1, r - 1) = -zbar.segment(1, r - 1);
    VectorXd wbar = (sbar + jz) / (2.0 * gam);
    double eta = std::sqrt(snorm / znorm);
    double w0 = wbar[0];
    VectorXd w1 = wbar.segment(1, r - 1);
    MatrixXd Wb(r, r);
    Wb(0, 0) = w0;
    Wb.block(0, 1, 1, r - 1) = w1.transpose();
    Wb.block(1, 0, r - 1, 1) = w1;
    Wb.block(1, 1, r - 1, r - 1) =
        MatrixXd::Identity(r - 1, r - 1) + w1 * w1.transpose() / (1.0 + w0);
    W.block(off, off, r, r) = eta * Wb;
    lam.segment(off, r) = (eta * Wb) * zb;
    off += r;
  }
}

struct IpmResult {
  SolveStatus status = SolveStatus::IterationLimit;
  VectorXd x, y, z, s;
  int iterations = 0;
  double relgap = 0.0;
};

IpmResult run_ipm(const Assembled& a, const SolveSettings& st) {
  const int n = static_cast<int>(a.q.size());
  const int meq = static_cast<int>(a.b.size());
  const int m = a.cone.m;
  IpmResult R;

  if (m == 0) {
    // equality-constrained QP: single saddle solve
    MatrixXd KK(n + meq, n + meq);
    KK.setZero();
    KK.topLeftCorner(n, n) = a.P + 1e-12 * MatrixXd::Identity(n, n);
    KK.topRightCorner(n, meq) = a.A.transpose();
    KK.bottomLeftCorner(meq, n) = a.A;
    KK.bottomRightCorner(meq, meq) = -1e-12 * MatrixXd::Identity(meq, meq);
    VectorXd rhs(n + meq);
    rhs << -a.q, a.b;
    Eigen::FullPivLU<MatrixXd> lu(KK);
    VectorXd sol = lu.solve(rhs);
    sol += lu.solve(rhs - KK * sol);
    R.x = sol.head(n);
    R.y = sol.tail(meq);
    R.z = VectorXd();
    R.s = VectorXd();
    double pres = meq ? (a.A * R.x - a.b).lpNorm<Eigen::Infinity>() : 0.0;
    R.status = pres < 1e-6 ? SolveStatus::Optimal : SolveStatus::Infeasible;
    R.iterations = 1;
    return R;
  }

  auto kkt_solve = [&](const MatrixXd& WtW, const VectorXd& bx, const VectorXd& by,
                       const VectorXd& bz, VectorXd& dx, VectorXd& dy, VectorXd& dz) {
    int N = n + meq + m;
    MatrixXd KK(N, N);
    KK.setZero();
    KK.topLeftCorner(n, n) = a.P;
    for (int i = 0; i < n; ++i) KK(i, i) += 1e-12;
    KK.block(0, n, n, meq) = a.A.transpose();
    KK.block(0, n + meq, n, m) = a.G.transpose();
    KK.block(n, 0, meq, n) = a.A;
    for (int i = 0; i < meq; ++i) KK(n + i, n + i) = -1e-12;
    KK.block(n + meq, 0, m, n) = a.G;
    KK.block(n + meq, n + meq, m, m) = -WtW;
    VectorXd rhs(N);
    rhs << bx, by, bz;
    Eigen::FullPivLU<MatrixXd> lu(KK);
    VectorXd sol = lu.solve(rhs);
    sol += lu.solve(rhs - KK * sol);  // one refinement pass
    dx = sol.head(n);
    dy = sol.segment(n, meq);
    dz = sol.tail(m);
  };

  // initial point from the W = I system
  VectorXd x, y, z, s;
  {
    VectorXd dx, dy, dz;
    kkt_solve(MatrixXd::Identity(m, m), -a.q, a.b, a.h, dx, dy, dz);
    x = dx;
    y = dy;
    z = dz;
    s = -dz;
    double ms = cone_min_margin(a.cone, s);
    if (ms <= 0) s += (1.0 - ms) * cone_identity(a.cone);
    double mz = cone_min_margin(a.cone, z);
    if (mz <= 0) z += (1.0 - mz) * cone_identity(a.cone);
  }

  const VectorXd e = cone_identity(a.cone);
  double gap0 = s.dot(z);
  MatrixXd W;
  VectorXd lam;
  for (int it = 0; it < st.max_iterations; ++it) {
    VectorXd rx = a.P * x + a.q + a.A.transpose() * y + a.G.transpose() * z;
    VectorXd ry = a.A * x - a.b;
    VectorXd rz = a.G * x + s - a.h;
    double gap = s.dot(z);
    double pcost = 0.5 * x.dot(a.P * x) + a.q.dot(x);
    double relgap = gap / std::max(1.0, std::abs(pcost));
    double nb = meq ? a.b.lpNorm<Eigen::Infinity>() : 0.0;
    double pres = std::max(meq ? ry.lpNorm<Eigen::Infinity>() / std::max(1.0, nb) : 0.0,
                           rz.lpNorm<Eigen::Infinity>() / std::max(1.0, a.h.lpNorm<Eigen::Infinity>()));
    double dres = rx.lpNorm<Eigen::Infinity>() / std::max(1.0, a.q.lpNorm<Eigen::Infinity>());
    if (std::getenv("WINDCLEAR_IPM_TRACE"))
      std::fprintf(stderr, "it %d pres %.3e dres %.3e gap %.3e relgap %.3e\n", it, pres, dres, gap,
                   relgap);
    if (!std::isfinite(gap) || gap > 1e12 * (1.0 + gap0)) break;  // diverging
    if (pres <= st.feastol && dres <= st.feastol && (gap <= st.abstol || relgap <= st.reltol)) {
      R.status = SolveStatus::Optimal;
      R.x = x;
      R.y = y;
      R.z = z;
      R.s = s;
      R.iterations = it;
      R.relgap = relgap;
      return R;
    }

    nt_scaling(a.cone, s, z, W, lam);
    MatrixXd WtW = W * W;
    double mu = gap / a.cone.deg;

    // affine direction
    VectorXd bs = -jordan_prod(a.cone, lam, lam);
    VectorXd tmp = W * jordan_div(a.cone, lam, bs);
    VectorXd dx, dy, dz;
    kkt_solve(WtW, -rx, -ry, -rz - tmp, dx, dy, dz);
    VectorXd ds = W * (jordan_div(a.cone, lam, bs) - W * dz);
    double ap = max_cone_step(a.cone, s, ds);
    double ad = max_cone_step(a.cone, z, dz);
    double alpha = std::min(ap, ad);
    double gap_aff = (s + alpha * ds).dot(z + alpha * dz);
    double sigma = std::pow(std::clamp(gap_aff / gap, 0.0, 1.0), 3.0);

    // combined direction with Mehrotra correction in scaled space
    Eigen::FullPivLU<MatrixXd> Wlu(W);
    VectorXd dsa_sc = Wlu.solve(ds);
    VectorXd dza_sc = W * dz;
    bs = -jordan_prod(a.cone, lam, lam) - jordan_prod(a.cone, dsa_sc, dza_sc) + sigma * mu * e;
    tmp = W * jordan_div(a.cone, lam, bs);
    kkt_solve(WtW, -rx, -ry, -rz - tmp, dx, dy, dz);
    ds = W * (jordan_div(a.cone, lam, bs) - W * dz);
    ap = max_cone_step(a.cone, s, ds);
    ad = max_cone_step(a.cone, z, dz);
    alpha = 0.99 * std::min(ap, ad);
    if (std::getenv("WINDCLEAR_IPM_TRACE"))
      std::fprintf(stderr, "   sigma %.3e alpha %.3e dsdz %.3e\n", sigma, alpha, ds.dot(dz));
    x += alpha * dx;
    y += alpha * dy;
    z += alpha * dz;
    s += alpha * ds;
    R.iterations = it + 1;
  }
  R.status = SolveStatus::IterationLimit;
  R.x = x;
  R.y = y;
  R.z = z;
  R.s = s;
  return R;
}

// Elastic feasibility program: min sum(u+) + sum(u-) + sum(v) over the
// relaxed constraint system. A strictly positive optimum certifies primal
// infeasibility of the original program.
bool phase1_infeasible(const ConvexProgram& p, std::map<std::string, double>& cert) {
  ConvexProgram ph;
  for (int i = 0; i < p.num_variables(); ++i)
    ph.add_variable(p.variable_name(i), p.lower_bound(i), p.upper_bound(i));
  int next = 0;
  auto elastic = [&](const std::string& base) {
    int v = ph.add_variable("_el" + std::to_string(next++) + ":" + base, 0.0, ConvexProgram::kInf);
    ph.add_linear(v, 1.0);
    return v;
  };
  for (const auto& c : p.equalities()) {
    LinearExpr row = c.row;
    row.add(elastic(c.label + "+"), 1.0);
    row.add(elastic(c.label + "-"), -1.0);
    ph.add_equality(std::move(row), c.rhs, c.label);
  }
  for (const auto& c : p.inequalities()) {
    LinearExpr row = c.row;
    row.add(elastic(c.label), -1.0);
    ph.add_inequality(std::move(row), c.rhs, c.label);
  }
  for (const auto& s : p.soc_blocks()) {
    SocBlock blk = s;
    blk.bound.add(elastic(s.label), 1.0);
    ph.add_soc(std::move(blk));
  }
  Assembled a = assemble(ph);
  SolveSettings st;
  st.feastol = 1e-9;
  IpmResult r = run_ipm(a, st);
  if (r.status != SolveStatus::Optimal) return false;  // cannot certify either way
  double total = a.q.dot(r.x);
  double scale = 1.0;
  for (const auto& c : p.equalities()) scale = std::max(scale, std::abs(c.rhs));
  for (const auto& c : p.inequalities()) scale = std::max(scale, std::abs(c.rhs));
  if (total <= 1e-7 * scale) return false;
  for (int i = 0; i < ph.num_variables(); ++i) {
    const std::string& nm = ph.variable_name(i);
    if (nm.rfind("_el", 0) == 0 && r.x[i] > 1e-7 * scale)
      cert[nm.substr(nm.find(':') + 1)] = r.x[i];
  }
  return true;
}

}  // namespace

Solution solve(const ConvexProgram& p, double tol) {
  SolveSettings st;
  st.feastol = tol;
  st.abstol = tol;
  return solve(p, st);
}

Solution solve(const ConvexProgram& p, const SolveSettings& st) {
  Assembled a = assemble(p);
  IpmResult r = run_ipm(a, st);

  Solution sol;
  sol.iterations = r.iterations;
  if (r.status != SolveStatus::Optimal) {
    std::map<std::string, double> cert;
    if (phase1_infeasible(p, cert)) {
      sol.status = SolveStatus::Infeasible;
      sol.infeasibility_certificate = std::move(cert);
    } else {
      sol.status = SolveStatus::IterationLimit;
    }
    return sol;
  }

  sol.status = SolveStatus::Optimal;
  {
    // Minimum-norm polish onto the active manifold: equalities plus binding
    // orthant rows. Balance residuals become exact to rounding without
    // disturbing the binding cuts/bounds the optimum rests on.
    std::vector<int> active;
    for (int i = 0; i < a.cone.l; ++i) {
      double slack = a.h[i] - a.G.row(i).dot(r.x);
      if (slack < 1e-6 * std::max(1.0, std::abs(a.h[i]))) active.push_back(i);
    }
    int meq = static_cast<int>(a.b.size());
    int rows = meq + static_cast<int>(active.size());
    if (rows > 0) {
      MatrixXd M(rows, p.num_variables());
      VectorXd rv(rows);
      if (meq) {
        M.topRows(meq) = a.A;
        rv.head(meq) = a.b;
      }
      for (size_t k = 0; k < active.size(); ++k) {
        M.row(meq + static_cast<int>(k)) = a.G.row(active[k]);
        rv[meq + static_cast<int>(k)] = a.h[active[k]];
      }
      Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(M);
      r.x += cod.solve(rv - M * r.x);
    }
  }
  sol.x = r.x;
  for (int i = 0; i < p.num_variables(); ++i) sol.primal[p.variable_name(i)] = r.x[i];
  sol.objective_value = p.objective_at(r.x);
  double pcost = 0.5 * r.x.dot(a.P * r.x) + a.q.dot(r.x);
  sol.duality_gap = (a.cone.m ? r.s.dot(r.z) : 0.0) / std::max(1.0, std::abs(pcost));
  const auto& eqs = p.equalities();
  for (size_t i = 0; i < eqs.size(); ++i) sol.duals_eq[eqs[i].label] = -r.y[static_cast<int>(i)];
  for (int i = 0; i < a.cone.l; ++i) sol.duals_ineq[a.ineq_labels[i]] = r.z[i];
  int off = a.cone.l;
  for (size_t k = 0; k < a.cone.socs.size(); ++k) {
    int rsz = a.cone.socs[k];
    std::vector<double> zb(rsz);
    for (int j = 0; j < rsz; ++j) zb[j] = r.z[off + j];
    sol.soc_duals[a.soc_labels[k]] = std::move(zb);
    off += rsz;
  }
  return sol;
}

KktResiduals kkt_residuals(const ConvexProgram& p, const Solution& s) {
  if (s.status != SolveStatus::Optimal)
    throw std::invalid_argument("kkt_residuals: solution is not optimal");
  Assembled a = assemble(p);
  int n = p.num_variables();
  VectorXd x = s.x;
  VectorXd y(a.b.size());
  const auto& eqs = p.equalities();
  for (size_t i = 0; i < eqs.size(); ++i) y[static_cast<int>(i)] = -s.duals_eq.at(eqs[i].label);
  VectorXd z(a.cone.m);
  for (int i = 0; i < a.cone.l; ++i) z[i] = s.duals_ineq.at(a.ineq_labels[i]);
  int off = a.cone.l;
  for (size_t k = 0; k < a.cone.socs.size(); ++k) {
    const auto& zb = s.soc_duals.at(a.soc_labels[k]);
    for (size_t j = 0; j < zb.size(); ++j) z[off + static_cast<int>(j)] = zb[j];
    off += a.cone.socs[k];
  }
  KktResiduals R;
  VectorXd rx = a.P * x + a.q + a.A.transpose() * y + a.G.transpose() * z;
  R.stationarity = n ? rx.lpNorm<Eigen::Infinity>() : 0.0;
  double pr = 0.0;
  if (a.b.size()) pr = (a.A * x - a.b).lpNorm<Eigen::Infinity>();
  VectorXd slack = a.h - a.G * x;  // cone slack
  for (int i = 0; i < a.cone.l; ++i) pr = std::max(pr, -slack[i]);
  off = a.cone.l;
  for (int rsz : a.cone.socs) {
    pr = std::max(pr, slack.segment(off + 1, rsz - 1).norm() - slack[off]);
    off += rsz;
  }
  R.primal = pr;
  double du = 0.0;
  for (int i = 0; i < a.cone.l; ++i) du = std::max(du, -z[i]);
  off = a.cone.l;
  for (int rsz : a.cone.socs) {
    du = std::max(du, z.segment(off + 1, rsz - 1).norm() - z[off]);
    off += rsz;
  }
  R.dual = du;
  double comp = 0.0;
  for (int i = 0; i < a.cone.l; ++i) comp = std::max(comp, std::abs(z[i] * slack[i]));
  off = a.cone.l;
  for (int rsz : a.cone.socs) {
    comp = std::max(comp, std::abs(z.segment(off, rsz).dot(slack.segment(off, rsz))));
    off += rsz;
  }
  R.complementarity = comp;
  return R;
}

}  // namespace windclear
