#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "tch/assembly.hpp"

namespace tch::testing {

// Brute-force oracle: basis functions from the vertex Vandermonde system,
// products integrated with quadrature rules exact for quadratics.
struct Oracle {
  Eigen::MatrixXd mass, stiffness, top, bottom;
};

inline Oracle brute_force(const MeshGrid& mesh) {
  const int d = mesh.dim;
  const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
  Oracle o{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n),
           Eigen::MatrixXd::Zero(n, n)};
  for (const auto& el : mesh.elements) {
    Eigen::MatrixXd v(d + 1, d + 1);
    for (int a = 0; a <= d; ++a) {
      v(a, 0) = 1.0;
      for (int c = 0; c < d; ++c) v(a, c + 1) = mesh.nodes[static_cast<std::size_t>(el[a])][c];
    }
    // Column a of coef holds the affine coefficients of basis function a.
    const Eigen::MatrixXd coef = v.inverse();
    double vol = std::abs(v.determinant());
    vol /= d == 2 ? 2.0 : 6.0;

    std::vector<Eigen::VectorXd> qp;  // quadrature points in physical coordinates
    std::vector<double> qw;
    if (d == 2) {
      for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3;
        qp.push_back(0.5 * (v.row(a).tail(2) + v.row(b).tail(2)).transpose());
        qw.push_back(vol / 3.0);
      }
    } else {
      const double alpha = 0.5854101966249685;
      const double beta = 0.1381966011250105;
      for (int a = 0; a < 4; ++a) {
        Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
        for (int b = 0; b < 4; ++b) p += (a == b ? alpha : beta) * v.row(b).tail(3).transpose();
        qp.push_back(p);
        qw.push_back(vol / 4.0);
      }
    }
    const auto phi = [&](int a, const Eigen::VectorXd& x) {
      return coef(0, a) + coef.col(a).tail(d).dot(x);
    };
    for (int a = 0; a <= d; ++a) {
      for (int b = 0; b <= d; ++b) {
        double m = 0.0;
        for (std::size_t q = 0; q < qp.size(); ++q) m += qw[q] * phi(a, qp[q]) * phi(b, qp[q]);
        o.mass(el[a], el[b]) += m;
        o.stiffness(el[a], el[b]) += vol * coef.col(a).tail(d).dot(coef.col(b).tail(d));
      }
    }
  }
  for (Face face : {Face::top, Face::bottom}) {
    Eigen::MatrixXd& target = face == Face::top ? o.top : o.bottom;
    for (const auto& f : boundary_facets(mesh, face)) {
      const double meas = facet_measure(mesh, f);
      // Facet barycentric coordinates at the quadrature points.
      std::vector<std::vector<double>> bary;
      std::vector<double> w;
      if (d == 2) {
        bary = {{1.0, 0.0}, {0.5, 0.5}, {0.0, 1.0}};  // Simpson
        w = {meas / 6.0, 4.0 * meas / 6.0, meas / 6.0};
      } else {
        bary = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
        w = {meas / 3.0, meas / 3.0, meas / 3.0};
      }
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
          double m = 0.0;
          for (std::size_t q = 0; q < w.size(); ++q) m += w[q] * bary[q][a] * bary[q][b];
          target(f.nodes[a], f.nodes[b]) += m;
        }
      }
    }
  }
  return o;
}

}  // namespace tch::testing
