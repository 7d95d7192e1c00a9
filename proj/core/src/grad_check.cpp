#include "faultsev/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "faultsev/error.hpp"

namespace faultsev {

namespace {

double evaluate(const ScalarFunction& f, std::span<const Matrix> params) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(tape.parameter(p));
  const Matrix& loss = tape.value(f(tape, vars));
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw ContractError("grad_check: function must return a scalar, got " + loss.shape_string());
  }
  return loss(0, 0);
}

}  // namespace

double gradient_relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

std::vector<Matrix> tape_gradients(const ScalarFunction& f, std::span<const Matrix> params) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(tape.parameter(p));
  tape.backward(f(tape, vars));
  std::vector<Matrix> grads;
  grads.reserve(vars.size());
  for (Var v : vars) grads.push_back(tape.gradient(v));
  return grads;
}

std::vector<Matrix> finite_difference_gradients(const ScalarFunction& f,
                                                std::span<const Matrix> params, double step) {
  if (!(step > 0.0)) throw ContractError("finite_difference_gradients: step must be positive");
  std::vector<Matrix> work(params.begin(), params.end());
  std::vector<Matrix> grads;
  grads.reserve(work.size());
  for (std::size_t p = 0; p < work.size(); ++p) {
    Matrix g(work[p].rows(), work[p].cols());
    for (std::size_t i = 0; i < work[p].size(); ++i) {
      double& x = work[p].data()[i];
      const double saved = x;
      x = saved + step;
      const double plus = evaluate(f, work);
      x = saved - step;
      const double minus = evaluate(f, work);
      x = saved;
      g.data()[i] = (plus - minus) / (2.0 * step);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

GradCheckReport compare_gradients(std::span<const Matrix> analytic,
                                  std::span<const Matrix> numeric, double tol, double floor) {
  if (analytic.size() != numeric.size()) {
    throw ShapeError("compare_gradients: parameter count mismatch");
  }
  GradCheckReport report;
  report.tolerance = tol;
  for (std::size_t p = 0; p < analytic.size(); ++p) {
    if (!analytic[p].same_shape(numeric[p])) {
      throw ShapeError("compare_gradients: parameter " + std::to_string(p) + " shape " +
                       analytic[p].shape_string() + " vs " + numeric[p].shape_string());
    }
    ParamGradCheck check;
    check.index = p;
    for (std::size_t i = 0; i < analytic[p].size(); ++i) {
      const double a = analytic[p].data()[i];
      const double n = numeric[p].data()[i];
      check.max_abs_error = std::max(check.max_abs_error, std::abs(a - n));
      check.max_rel_error = std::max(check.max_rel_error, gradient_relative_error(a, n, floor));
    }
    check.passed = check.max_rel_error <= tol;
    report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
    report.passed = report.passed && check.passed;
    report.params.push_back(check);
  }
  return report;
}

GradCheckReport grad_check(const ScalarFunction& f, std::span<const Matrix> params, double step,
                           double tol) {
  const auto analytic = tape_gradients(f, params);
  const auto numeric = finite_difference_gradients(f, params, step);
  return compare_gradients(analytic, numeric, tol);
}

}  // namespace faultsev
