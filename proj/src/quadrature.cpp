#include "slitspec/quadrature.hpp"
#include "slitspec/errors.hpp"

#include <array>
#include <cmath>
#include <queue>

namespace slitspec::quad {

namespace {

constexpr int kGaussOrder = 10;

struct GaussRule {
    std::array<double, kGaussOrder> nodes{};   // on [-1,1]
    std::array<double, kGaussOrder> weights{};
};

// Legendre nodes by Newton iteration on P_n; accurate to machine precision.
GaussRule make_gauss_rule() {
    GaussRule rule;
    const int n = kGaussOrder;
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

const GaussRule& gauss_rule() {
    static const GaussRule rule = make_gauss_rule();
    return rule;
}

double gauss_panel(const std::function<double(double)>& f, double a, double b) {
    const GaussRule& g = gauss_rule();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < kGaussOrder; ++i)
        sum += g.weights[i] * f(mid + half * g.nodes[i]);
    return sum * half;
}

struct Cell {
    double a, b, value, err;
    int depth;
    bool operator<(const Cell& o) const { return err < o.err; }
};

Cell make_cell(const std::function<double(double)>& f, double a, double b, int depth) {
    const double m = 0.5 * (a + b);
    const double coarse = gauss_panel(f, a, b);
    const double fine = gauss_panel(f, a, m) + gauss_panel(f, m, b);
    return {a, b, fine, std::abs(fine - coarse), depth};
}

} // namespace

// Global error management: split the worst cell until the summed error
// estimate meets the budget. Endpoint singularities concentrate the error in
// one shrinking cell instead of exhausting a per-cell budget.
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 int max_depth) {
    if (a == b) return 0.0;
    std::priority_queue<Cell> cells;
    cells.push(make_cell(f, a, b, 0));
    double total = cells.top().value;
    double total_err = cells.top().err;
    while (total_err > abs_tol) {
        const Cell worst = cells.top();
        const double m = 0.5 * (worst.a + worst.b);
        if (worst.depth >= max_depth || m == worst.a || m == worst.b)
            throw QuadratureError("adaptive quadrature did not reach the requested tolerance");
        cells.pop();
        total -= worst.value;
        total_err -= worst.err;
        for (const Cell& child : {make_cell(f, worst.a, m, worst.depth + 1),
                                  make_cell(f, m, worst.b, worst.depth + 1)}) {
            total += child.value;
            total_err += child.err;
            cells.push(child);
        }
    }
    return total;
}

double integrate2d(const std::function<double(double, double)>& f, double ax, double bx,
                   double ay, double by, double abs_tol) {
    const double inner_tol = abs_tol * 1e-2 / std::max(1.0, std::abs(bx - ax));
    auto outer = [&](double x) {
        return integrate([&](double y) { return f(x, y); }, ay, by, inner_tol);
    };
    return integrate(outer, ax, bx, abs_tol);
}

} // namespace slitspec::quad
