#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "specmm/common.hpp"

namespace specmm {

// A finite metric measure space: n points, pairwise distances, strictly
// positive weights. This is the one data type everything downstream consumes;
// spaces are either produced by the generators below or loaded from JSON.

struct GeneratorSpec {
    enum class Kind { Cycle, Product, Point, Custom };

    Kind kind = Kind::Custom;
    double radius = 0.0;  // cycle
    int count = 0;        // cycle
    double mass = 0.0;    // point
    std::shared_ptr<GeneratorSpec> left, right;  // product
    std::string custom_tag = "custom";

    std::string tag() const;
    static GeneratorSpec cycle(double radius, int count);
    static GeneratorSpec product(GeneratorSpec a, GeneratorSpec b);
    static GeneratorSpec point(double mass);
    static GeneratorSpec custom(std::string tag = "custom");
    // Inverse of tag(); unrecognized strings become Custom with the string kept.
    static GeneratorSpec parse(const std::string& tag);

    // Metric rescaling distributes into the tree: a cycle of radius r scaled
    // by alpha is exactly a cycle of radius alpha*r.
    GeneratorSpec scaled(double alpha) const;
};

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> violations;
    double worst_triangle_defect = 0.0;
    double worst_asymmetry = 0.0;
    double min_measure = 0.0;
};

struct FiniteMMS {
    int n = 0;
    Eigen::MatrixXd dist;     // n x n, symmetric, zero diagonal
    Eigen::VectorXd measure;  // strictly positive
    double mesh_scale = 0.0;  // generator resolution; 0 for a single point
    GeneratorSpec gen;

    double total_mass() const { return measure.sum(); }
    double diameter() const { return n > 0 ? dist.maxCoeff() : 0.0; }
    std::string tag() const { return gen.tag(); }
};

// Content hash over (n, dist, measure); used to derive direction-stable seeds.
std::uint64_t space_key(const FiniteMMS& x);

// n points on a circle of radius r, geodesic (arc) distance, weight 2*pi*r/n
// per point. Requires n >= 3.
FiniteMMS make_cycle(double radius, int n);

// Cartesian product with the l2 combination of the factor metrics and the
// product measure. Fails with resource_error above max_points.
FiniteMMS make_product(const FiniteMMS& a, const FiniteMMS& b, int max_points = 4096);

// Single point carrying total mass c > 0.
FiniteMMS make_point(double mass);

// dist' = alpha*dist, measure' = beta*measure. Laplace spectra scale as
// lambda/alpha^2 and eigenfunctions as phi/sqrt(beta).
FiniteMMS rescale(const FiniteMMS& x, double alpha, double beta);

FiniteMMS build_space(const GeneratorSpec& spec, int max_points = 4096);

// Checks symmetry, zero diagonal, point separation, the triangle inequality
// (within 1e-12 * diameter) and measure positivity; n == 1 is only legal for
// point spaces.
ValidationReport validate(const FiniteMMS& x);
void require_valid(const FiniteMMS& x);

std::string space_to_json(const FiniteMMS& x);
FiniteMMS space_from_json(const std::string& text);
void save_space(const FiniteMMS& x, const std::string& path);
FiniteMMS load_space(const std::string& path);

}  // namespace specmm
