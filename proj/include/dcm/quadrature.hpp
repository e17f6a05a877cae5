#pragma once

#include "dcm/types.hpp"

#include <vector>

namespace dcm {

struct QuadNode {
    double x = 0.0;
    double weight = 0.0;
};

// Gauss-Legendre rule on [0, 1] with `count` nodes; weights sum to 1.
[[nodiscard]] std::vector<QuadNode> gauss_legendre(int count);

struct TriangleNode {
    std::array<double, 3> bary{};
    double weight = 0.0;  // fraction of the triangle area; weights sum to 1
};

// Collapsed tensor-product Gauss rule exact for polynomials of total degree <= degree.
[[nodiscard]] std::vector<TriangleNode> triangle_rule(int degree);

}  // namespace dcm
