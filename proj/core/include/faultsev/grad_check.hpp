#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "faultsev/matrix.hpp"
#include "faultsev/tape.hpp"

namespace faultsev {

/// Records a scalar loss on `tape` given the parameter leaves (in the order passed).
using ScalarFunction = std::function<Var(Tape& tape, std::span<const Var> params)>;

struct ParamGradCheck {
  std::size_t index = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<ParamGradCheck> params;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};

/// Relative error used by the checker: |a - n| / max(|a|, |n|, floor).
/// The floor keeps entries that are zero up to rounding from dominating.
double gradient_relative_error(double analytic, double numeric, double floor);

/// Central differences at step 1e-5 carry about eps * |f| / h ~ 1e-10 of
/// absolute noise, so entries below this floor are judged in absolute terms.
inline constexpr double kGradCheckFloor = 1e-4;

std::vector<Matrix> tape_gradients(const ScalarFunction& f, std::span<const Matrix> params);

/// Central differences: (f(p + h e_i) - f(p - h e_i)) / 2h for every entry.
std::vector<Matrix> finite_difference_gradients(const ScalarFunction& f,
                                                std::span<const Matrix> params, double step);

GradCheckReport compare_gradients(std::span<const Matrix> analytic,
                                  std::span<const Matrix> numeric, double tol,
                                  double floor = kGradCheckFloor);

GradCheckReport grad_check(const ScalarFunction& f, std::span<const Matrix> params, double step,
                           double tol);

}  // namespace faultsev
