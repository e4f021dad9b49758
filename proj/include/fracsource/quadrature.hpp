#ifndef FRACSOURCE_QUADRATURE_HPP
#define FRACSOURCE_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <stdexcept>

namespace fracsource {

// 16-point Gauss-Legendre rule on [-1,1] (positive half; nodes are symmetric).
inline constexpr std::array<double, 8> kGauss16Nodes = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
    0.9445750230732326, 0.9894009349916499};

inline constexpr std::array<double, 8> kGauss16Weights = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
    0.0622535239386479, 0.0271524594117541};

template <class F>
double gauss16(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double rad = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < kGauss16Nodes.size(); ++i) {
    const double dx = rad * kGauss16Nodes[i];
    acc += kGauss16Weights[i] * (f(mid + dx) + f(mid - dx));
  }
  return acc * rad;
}

template <class F>
double composite_gauss16(const F& f, double a, double b, int panels) {
  if (panels < 1) throw std::invalid_argument("composite_gauss16: panels < 1");
  const double w = (b - a) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) acc += gauss16(f, a + p * w, a + (p + 1) * w);
  return acc;
}

// Composite rule on [a,b] with panels shrinking geometrically toward one
// endpoint. Used where the integrand has an algebraic edge singularity.
template <class F>
double graded_gauss16(const F& f, double a, double b, bool toward_a,
                      int levels, double ratio = 0.5) {
  double acc = 0.0;
  double len = b - a;
  double outer = toward_a ? b : a;
  for (int i = 0; i < levels; ++i) {
    len *= ratio;
    const double inner = toward_a ? a + len : b - len;
    // stop once the panel width falls below roundoff or the graded point
    // lands on the edge itself
    if (inner == outer || inner == (toward_a ? a : b)) break;
    acc += toward_a ? gauss16(f, inner, outer) : gauss16(f, outer, inner);
    outer = inner;
  }
  // innermost sliver integrated as a single panel ending at the edge
  acc += toward_a ? gauss16(f, a, outer) : gauss16(f, outer, b);
  return acc;
}

}  // namespace fracsource

#endif
