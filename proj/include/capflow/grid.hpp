#pragma once

#include "jet.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace capflow {

constexpr int sym_index(int n, int a, int b) {
  if (a > b) {
    const int t = a;
    a = b;
    b = t;
  }
  return a * n - a * (a - 1) / 2 + (b - a);
}

// Lagrange weights at x0 for nodes s (value when deriv = 0, slope when deriv = 1).
inline std::vector<double> lagrange_weights(const std::vector<double>& s, double x0, int deriv) {
  const int m = static_cast<int>(s.size());
  std::vector<double> w(m, 0.0);
  for (int a = 0; a < m; ++a) {
    double den = 1.0;
    for (int b = 0; b < m; ++b)
      if (b != a) den *= s[a] - s[b];
    if (deriv == 0) {
      double num = 1.0;
      for (int b = 0; b < m; ++b)
        if (b != a) num *= x0 - s[b];
      w[a] = num / den;
    } else {
      double acc = 0.0;
      for (int c = 0; c < m; ++c) {
        if (c == a) continue;
        double num = 1.0;
        for (int b = 0; b < m; ++b)
          if (b != a && b != c) num *= x0 - s[b];
        acc += num;
      }
      w[a] = acc / den;
    }
  }
  return w;
}

// Cell-centred lattice over the closed upper half-sphere of S^N.
// N = 2: (beta, lambda); N = 3: (beta, alpha, lambda). Row i = nb is the ghost layer.
template <int N>
class HalfSphereGrid {
 public:
  static constexpr int D = N + 1;
  static constexpr int S = N * (N + 1) / 2;

  struct Frame {
    Vec<D> x;
    std::array<Vec<D>, N> xd;
    std::array<Vec<D>, S> xdd;
    std::array<double, N> sigma;  // diagonal round metric
  };

  HalfSphereGrid(int nb, int nl, int na = 1) : nb_(nb), na_(N == 2 ? 1 : na), nl_(nl) {
    if (nb < 8 || nl < 8 || nl % 2 != 0) throw std::invalid_argument("grid sizes must be >= 8 and N_lambda even");
    if (N == 3 && na < 4) throw std::invalid_argument("N_alpha must be >= 4");
    db_ = (M_PI / 2) / nb_;
    da_ = M_PI / na_;
    dl_ = 2 * M_PI / nl_;
    frames_.resize(static_cast<std::size_t>((nb_ + 1)) * na_ * nl_);
    weights_.resize(interior());
    for (int i = 0; i <= nb_; ++i)
      for (int j = 0; j < na_; ++j)
        for (int k = 0; k < nl_; ++k) frames_[index(i, j, k)] = make_frame(beta(i), alpha(j), lambda(k));
    for (int i = 0; i < nb_; ++i)
      for (int j = 0; j < na_; ++j)
        for (int k = 0; k < nl_; ++k) {
          const double b0 = i * db_, b1 = (i + 1) * db_;
          double w;
          if constexpr (N == 2) {
            w = (std::cos(b0) - std::cos(b1)) * dl_;
          } else {
            const double a0 = j * da_, a1 = (j + 1) * da_;
            const double ib = (b1 / 2 - std::sin(2 * b1) / 4) - (b0 / 2 - std::sin(2 * b0) / 4);
            w = ib * (std::cos(a0) - std::cos(a1)) * dl_;
          }
          weights_[index(i, j, k)] = w;
        }
    face_frames_.resize(static_cast<std::size_t>(na_) * nl_);
    face_weights_.resize(face_frames_.size());
    for (int j = 0; j < na_; ++j)
      for (int k = 0; k < nl_; ++k) {
        face_frames_[j * nl_ + k] = make_frame(M_PI / 2, alpha(j), lambda(k));
        face_weights_[j * nl_ + k] =
            N == 2 ? dl_ : (std::cos(j * da_) - std::cos((j + 1) * da_)) * dl_;
      }
  }

  int nb() const { return nb_; }
  int na() const { return na_; }
  int nl() const { return nl_; }
  double db() const { return db_; }
  double da() const { return da_; }
  double dl() const { return dl_; }
  double beta(int i) const { return (i + 0.5) * db_; }
  double alpha(int j) const { return N == 2 ? M_PI / 2 : (j + 0.5) * da_; }
  double lambda(int k) const { return k * dl_; }
  double step(int axis) const {
    if (axis == 0) return db_;
    if (N == 3 && axis == 1) return da_;
    return dl_;
  }

  int ring() const { return na_ * nl_; }
  int interior() const { return nb_ * na_ * nl_; }
  int total() const { return (nb_ + 1) * na_ * nl_; }
  int index(int i, int j, int k) const { return (i * na_ + j) * nl_ + k; }

  // Maps a virtual lattice position (possibly across a pole) to a stored cell.
  int at(int i, int j, int k) const {
    if (i < 0) {
      i = -1 - i;
      j = na_ - 1 - j;
      k += nl_ / 2;
    }
    if constexpr (N == 3) {
      if (j < 0) {
        j = -1 - j;
        k += nl_ / 2;
      } else if (j >= na_) {
        j = 2 * na_ - 1 - j;
        k += nl_ / 2;
      }
    }
    k %= nl_;
    if (k < 0) k += nl_;
    if (i > nb_) throw std::out_of_range("stencil beyond the ghost layer");
    return index(i, j, k);
  }

  // Virtual offset along coordinate axes.
  int neighbor(int i, int j, int k, const std::array<int, N>& d) const {
    if constexpr (N == 2) return at(i + d[0], j, k + d[1]);
    else return at(i + d[0], j + d[1], k + d[2]);
  }

  const Frame& frame(int c) const { return frames_[c]; }
  const Frame& face_frame(int f) const { return face_frames_[f]; }
  double weight(int c) const { return weights_[c]; }
  double face_weight(int f) const { return face_weights_[f]; }
  const std::vector<double>& weights() const { return weights_; }

  double total_measure() const {
    double s = 0;
    for (double w : weights_) s += w;
    return s;
  }

 private:
  int nb_, na_, nl_;
  double db_, da_, dl_;
  std::vector<Frame> frames_, face_frames_;
  std::vector<double> weights_, face_weights_;

  static Frame make_frame(double b, double a, double l) {
    Frame f;
    const double sb = std::sin(b), cb = std::cos(b), sl = std::sin(l), cl = std::cos(l);
    if constexpr (N == 2) {
      f.x << sb * cl, sb * sl, cb;
      f.xd[0] << cb * cl, cb * sl, -sb;
      f.xd[1] << -sb * sl, sb * cl, 0;
      f.xdd[sym_index(2, 0, 0)] = -f.x;
      f.xdd[sym_index(2, 0, 1)] << -cb * sl, cb * cl, 0;
      f.xdd[sym_index(2, 1, 1)] << -sb * cl, -sb * sl, 0;
      f.sigma = {1.0, sb * sb};
    } else {
      const double sa = std::sin(a), ca = std::cos(a);
      const Vec<3> s(sa * cl, sa * sl, ca), s_a(ca * cl, ca * sl, -sa), s_l(-sa * sl, sa * cl, 0),
          s_aa = -s, s_al(-ca * sl, ca * cl, 0), s_ll(-sa * cl, -sa * sl, 0);
      auto lift4 = [](const Vec<3>& v, double last) {
        Vec<4> r;
        r << v, last;
        return r;
      };
      f.x = lift4(sb * s, cb);
      f.xd[0] = lift4(cb * s, -sb);
      f.xd[1] = lift4(sb * s_a, 0);
      f.xd[2] = lift4(sb * s_l, 0);
      f.xdd[sym_index(3, 0, 0)] = -f.x;
      f.xdd[sym_index(3, 0, 1)] = lift4(cb * s_a, 0);
      f.xdd[sym_index(3, 0, 2)] = lift4(cb * s_l, 0);
      f.xdd[sym_index(3, 1, 1)] = lift4(sb * s_aa, 0);
      f.xdd[sym_index(3, 1, 2)] = lift4(sb * s_al, 0);
      f.xdd[sym_index(3, 2, 2)] = lift4(sb * s_ll, 0);
      f.sigma = {1.0, sb * sb, sb * sb * sa * sa};
    }
    return f;
  }
};

}  // namespace capflow
