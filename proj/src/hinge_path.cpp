#include "svmsel/hinge_path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "svmsel/error.hpp"

namespace svmsel {
namespace {

constexpr const char* kModule = "solver";
// safety refresh of (Q_EE)^-1; drift is also checked on every event
constexpr int kRefreshEvery = 1024;
constexpr double kDriftTol = 1e-6;
// a ridged trace stops at u = kRidgeStop * ridge; below that the shift dominates small margins
constexpr double kRidgeStop = 1e3;

enum class Side : unsigned char { left, elbow, right };

}  // namespace

HingePath::HingePath(const Eigen::MatrixXd& gram, std::span<const int> labels, std::size_t max_events) {
  const Eigen::Index n = gram.rows();
  require(n >= 1 && gram.cols() == n, kModule, "gram matrix must be square and nonempty");
  require(static_cast<Eigen::Index>(labels.size()) == n, kModule, "labels must match the gram matrix");
  y_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int yi = labels[static_cast<std::size_t>(i)];
    require(yi == 1 || yi == -1, kModule, "labels must be +1 or -1");
    y_[i] = yi;
  }
  Q_ = y_.asDiagonal() * gram * y_.asDiagonal();
  quad_all_ = std::max(0.0, Q_.sum());
  const std::size_t budget = max_events == 0 ? 50 * static_cast<std::size_t>(n) + 100 : max_events;
  trace(budget);
  // numerically dependent elbow columns: retrace on Q + ridge I
  const double scale = std::max(Q_.diagonal().maxCoeff(), 1e-300);
  for (double rel : {1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6}) {
    if (!singular_) break;
    ridge_ = rel * scale;
    knots_.clear();
    complete_ = singular_ = unbounded_ = ridge_limited_ = false;
    events_ = 0;
    trace(budget);
  }
}

void HingePath::trace(std::size_t max_events) {
  const Eigen::Index n = Q_.rows();
  Eigen::MatrixXd ridged;
  if (ridge_ > 0.0) ridged = Q_ + ridge_ * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd& Qt = ridge_ > 0.0 ? ridged : Q_;
  std::vector<Side> side(static_cast<std::size_t>(n), Side::left);
  std::vector<Eigen::Index> elbow;
  Eigen::VectorXd theta = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd s_left = Qt.rowwise().sum();  // Q 1_L
  Eigen::MatrixXd h_inv(0, 0);                   // (Q_EE)^-1
  int since_refresh = 0;

  Eigen::Index first = 0;
  const double u0 = s_left.maxCoeff(&first);
  if (!(u0 > 0.0)) {
    // Q 1 <= 0: f = 0 satisfies every optimality condition for all u
    complete_ = true;
    return;
  }

  auto push_knot = [&](double u, const Eigen::VectorXd& th, const Eigen::VectorXd& q_theta) {
    Knot k;
    k.u = u;
    k.theta = th;
    k.quad = std::max(0.0, th.dot(q_theta) - ridge_ * th.squaredNorm());  // exact Q
    k.norm = u > 0.0 ? std::sqrt(k.quad) / u : std::numeric_limits<double>::infinity();
    knots_.push_back(std::move(k));
  };
  push_knot(u0, theta, s_left);

  auto gather = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(elbow.size()));
    for (std::size_t a = 0; a < elbow.size(); ++a) out[static_cast<Eigen::Index>(a)] = v[elbow[a]];
    return out;
  };
  auto elbow_block = [&]() {
    const auto m = static_cast<Eigen::Index>(elbow.size());
    Eigen::MatrixXd block(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b) block(a, b) = Qt(elbow[a], elbow[b]);
    return block;
  };
  auto refresh = [&]() {
    const Eigen::MatrixXd block = elbow_block();
    Eigen::LLT<Eigen::MatrixXd> llt(block);
    if (llt.info() != Eigen::Success) return false;
    h_inv = llt.solve(Eigen::MatrixXd::Identity(block.rows(), block.cols()));
    since_refresh = 0;
    return h_inv.allFinite();
  };
  auto add_elbow = [&](Eigen::Index j) {
    const auto m = static_cast<Eigen::Index>(elbow.size());
    Eigen::VectorXd b(m);
    for (Eigen::Index a = 0; a < m; ++a) b[a] = Qt(elbow[a], j);
    const Eigen::VectorXd w = h_inv * b;
    const double d = Qt(j, j) - b.dot(w);
    if (!(d > 1e-12 * std::max(Qt(j, j), 1e-300))) return false;
    Eigen::MatrixXd next(m + 1, m + 1);
    next.topLeftCorner(m, m) = h_inv + w * w.transpose() / d;
    next.topRightCorner(m, 1) = -w / d;
    next.bottomLeftCorner(1, m) = -w.transpose() / d;
    next(m, m) = 1.0 / d;
    h_inv.swap(next);
    elbow.push_back(j);
    side[static_cast<std::size_t>(j)] = Side::elbow;
    if (++since_refresh >= kRefreshEvery) return refresh();
    return true;
  };
  auto remove_elbow = [&](std::size_t pos, Side to) {
    const auto m = static_cast<Eigen::Index>(elbow.size());
    const auto k = static_cast<Eigen::Index>(pos);
    const Eigen::Index last = m - 1;
    if (k != last) {
      h_inv.row(k).swap(h_inv.row(last));
      h_inv.col(k).swap(h_inv.col(last));
      std::swap(elbow[pos], elbow.back());
    }
    const double e = h_inv(last, last);
    const Eigen::VectorXd c = h_inv.topRightCorner(last, 1);
    Eigen::MatrixXd next = h_inv.topLeftCorner(last, last) - c * c.transpose() / e;
    h_inv.swap(next);
    side[static_cast<std::size_t>(elbow.back())] = to;
    elbow.pop_back();
    if (++since_refresh >= kRefreshEvery && !elbow.empty()) return refresh();
    return true;
  };

  h_inv.resize(0, 0);
  s_left -= Qt.col(first);
  if (!add_elbow(first)) {
    singular_ = true;
    return;
  }
  ++events_;
  Eigen::Index last_moved = first;
  double u_cur = u0;

  while (true) {
    if (events_ >= max_events) return;
    const auto m = static_cast<Eigen::Index>(elbow.size());
    Eigen::MatrixXd q_cols(n, m);
    for (Eigen::Index a = 0; a < m; ++a) q_cols.col(a) = Qt.col(elbow[a]);
    Eigen::VectorXd q = h_inv * Eigen::VectorXd::Ones(m);
    Eigen::VectorXd B = q_cols * q;
    // Q_EE q = 1 exactly; a drifted inverse is rebuilt
    if (m > 0 && (gather(B).array() - 1.0).abs().maxCoeff() > kDriftTol) {
      if (!refresh()) {
        singular_ = true;
        return;
      }
      q = h_inv * Eigen::VectorXd::Ones(m);
      B = q_cols * q;
    }
    const Eigen::VectorXd p = -(h_inv * gather(s_left));
    const Eigen::VectorXd A = s_left + q_cols * p;  // margin_j(u) = A_j / u + B_j

    double best_u = -1.0;
    Eigen::Index best = -1;
    Side best_to = Side::elbow;
    auto consider = [&](double cand, Eigen::Index idx, Side to) {
      if (!(cand > 0.0) || !std::isfinite(cand)) return;
      if (idx == last_moved && cand >= u_cur * (1.0 - 1e-10)) return;
      if (cand > best_u) {
        best_u = cand;
        best = idx;
        best_to = to;
      }
    };
    for (Eigen::Index a = 0; a < m; ++a) {
      if (q[a] > 0.0) consider(-p[a] / q[a], elbow[a], Side::right);
      else if (q[a] < 0.0) consider((1.0 - p[a]) / q[a], elbow[a], Side::left);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      const Side sj = side[static_cast<std::size_t>(j)];
      if (sj == Side::left && A[j] > 0.0 && B[j] < 1.0) consider(A[j] / (1.0 - B[j]), j, Side::elbow);
      else if (sj == Side::right && A[j] < 0.0 && B[j] > 1.0) consider(A[j] / (1.0 - B[j]), j, Side::elbow);
    }

    double u_next = best < 0 ? 0.0 : std::min(best_u, u_cur);
    const double u_stop = kRidgeStop * ridge_;
    const bool stop = ridge_ > 0.0 && u_next < u_stop;
    if (stop) u_next = std::min(u_stop, u_cur);
    Eigen::VectorXd next_theta = theta;
    for (Eigen::Index a = 0; a < m; ++a) next_theta[elbow[a]] = std::clamp(p[a] + u_next * q[a], 0.0, 1.0);

    // segment statistics from the current knot
    Knot& cur = knots_.back();
    const Eigen::VectorXd delta_e = gather(next_theta) - gather(cur.theta);
    const Eigen::VectorXd q_theta_cur = s_left + q_cols * gather(cur.theta);
    cur.cross = delta_e.dot(gather(q_theta_cur)) - ridge_ * delta_e.dot(gather(cur.theta));
    cur.curv = std::max(0.0, delta_e.dot(gather(q_cols * delta_e)) - ridge_ * delta_e.squaredNorm());

    const Eigen::VectorXd q_theta_next = s_left + q_cols * gather(next_theta);
    push_knot(u_next, next_theta, q_theta_next);
    theta = next_theta;
    if (stop) {
      ridge_limited_ = true;
      return;
    }

    if (best < 0) {
      // no further event: the last segment runs to u = 0 with unbounded norm
      unbounded_ = true;
      complete_ = true;
      return;
    }

    ++events_;
    const Side from = side[static_cast<std::size_t>(best)];
    bool ok = true;
    if (from == Side::elbow) {
      const auto pos = static_cast<std::size_t>(std::find(elbow.begin(), elbow.end(), best) - elbow.begin());
      theta[best] = best_to == Side::left ? 1.0 : 0.0;
      knots_.back().theta[best] = theta[best];
      if (best_to == Side::left) s_left += Qt.col(best);
      ok = remove_elbow(pos, best_to);
    } else {
      if (from == Side::left) s_left -= Qt.col(best);
      ok = add_elbow(best);
    }
    if (!ok) {
      singular_ = true;
      return;
    }
    last_moved = best;
    u_cur = u_next;

    bool any_left = false;
    for (Side s : side) any_left = any_left || s == Side::left;
    if (!any_left) {
      complete_ = true;
      return;
    }
    if (elbow.empty()) h_inv.resize(0, 0);
  }
}

double HingePath::reachable_norm() const {
  if (knots_.empty()) return complete_ ? std::numeric_limits<double>::infinity() : 0.0;
  if (unbounded_) return std::numeric_limits<double>::infinity();
  if (complete_) return std::numeric_limits<double>::infinity();
  return knots_.back().norm;
}

HingePath::Point HingePath::point_from_theta(const Eigen::VectorXd& theta, double u) const {
  Point pt;
  pt.u = u;
  pt.coeffs = theta.cwiseProduct(y_) / u;
  const Eigen::VectorXd q_theta = Q_ * theta;
  const Eigen::VectorXd margins = q_theta / u;
  pt.norm = std::sqrt(std::max(0.0, theta.dot(q_theta))) / u;
  double total = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) total += std::max(0.0, 1.0 - margins[i]);
  pt.emp_hinge = total / static_cast<double>(margins.size());
  return pt;
}

double HingePath::segment_norm(std::size_t k, double t) const {
  const Knot& a = knots_[k];
  const Knot& b = knots_[k + 1];
  const double u = a.u + t * (b.u - a.u);
  if (!(u > 0.0)) return std::numeric_limits<double>::infinity();
  const double quad = a.quad + 2.0 * t * a.cross + t * t * a.curv;
  return std::sqrt(std::max(0.0, quad)) / u;
}

HingePath::Point HingePath::on_segment(std::size_t k, double t) const {
  const Knot& a = knots_[k];
  const Knot& b = knots_[k + 1];
  const double u = a.u + t * (b.u - a.u);
  return point_from_theta(a.theta + t * (b.theta - a.theta), u);
}

HingePath::Point HingePath::at_radius(double R) const {
  require(R >= 0.0 && !std::isnan(R), kModule, "radius must be nonnegative");
  const Eigen::Index n = Q_.rows();
  if (R == 0.0 || knots_.empty()) {
    Point pt;
    pt.u = std::numeric_limits<double>::infinity();
    pt.coeffs = Eigen::VectorXd::Zero(n);
    return pt;
  }
  if (R <= knots_.front().norm) {
    // before the first event theta = 1 and f is a rescaled sum y_i k(x_i, .)
    return point_from_theta(Eigen::VectorXd::Ones(n), std::sqrt(quad_all_) / R);
  }
  if (R >= knots_.back().norm) {
    if (R > knots_.back().norm && !complete_ && !unbounded_)
      fail(ErrorCode::convergence, kModule, "radius lies beyond the traced path");
    return point_from_theta(knots_.back().theta, knots_.back().u);
  }
  std::size_t lo = 0, hi = knots_.size() - 1;  // norm(lo) < R <= norm(hi)
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (knots_[mid].norm < R ? lo : hi) = mid;
  }
  double t_lo = 0.0, t_hi = 1.0;
  for (int it = 0; it < 200 && t_hi - t_lo > 1e-16; ++it) {
    const double t = 0.5 * (t_lo + t_hi);
    (segment_norm(lo, t) < R ? t_lo : t_hi) = t;
  }
  const double t = knots_[hi].u > 0.0 ? t_hi : std::min(t_hi, 1.0 - 1e-16);
  return on_segment(lo, t);
}

HingePath::Point HingePath::at_u(double u) const {
  require(u > 0.0, kModule, "u must be positive");
  const Eigen::Index n = Q_.rows();
  if (knots_.empty()) {
    Point pt;
    pt.u = u;
    pt.coeffs = Eigen::VectorXd::Zero(n);
    return pt;
  }
  if (u >= knots_.front().u) return point_from_theta(Eigen::VectorXd::Ones(n), u);
  if (u <= knots_.back().u) {
    if (!complete_) fail(ErrorCode::convergence, kModule, "u lies beyond the traced path");
    // the final function is constant for smaller u
    const Knot& last = knots_.back();
    return point_from_theta(last.theta * (u / last.u), u);
  }
  std::size_t lo = 0, hi = knots_.size() - 1;  // u(lo) > u >= u(hi)
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (knots_[mid].u > u ? lo : hi) = mid;
  }
  const double t = (u - knots_[lo].u) / (knots_[hi].u - knots_[lo].u);
  Point pt = on_segment(lo, t);
  return pt;
}

}  // namespace svmsel
