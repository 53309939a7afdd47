"""Fixed-step one-step methods for canonical Hamiltonian systems.

Four Euler variants, indexed by (alpha, beta) in {0, 1}^2, all read

    p1 = p - h * grad_q H(p_{alpha}, q_{beta})
    q1 = q + h * grad_p H(p_{alpha}, q_{beta})

where the subscript 0 picks the old value and 1 the new one.  (0,0) is
the explicit method, (1,1) the implicit one, and the two mixed variants
are the symplectic Euler methods.  The three-stage method (half kick,
full drift, half kick) is their symmetric composition.  For separable
Hamiltonians every variant except (1,1) runs explicitly; otherwise the
implicit stages are solved by fixed-point iteration or by a
finite-difference Newton method.

Diagnostics measure, by centered finite differences of the step map,
how well a method preserves the symplectic two-form and whether it is
symmetric under time reversal.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Union

import numpy as np

from .errors import ContractViolationError, SolverDivergenceError
from .fdtools import central_jacobian
from .models.state import PhaseState
from .models.systems import SeparableSystem
from .series import SeriesTable

_SOLVERS = ("fixed-point", "newton")


@dataclass(frozen=True)
class EulerVariant:
    """Argument selector (alpha, beta) for the Euler family."""

    alpha: int
    beta: int

    def __post_init__(self):
        if self.alpha not in (0, 1) or self.beta not in (0, 1):
            raise ContractViolationError(
                f"variant indices must be 0 or 1, got ({self.alpha}, {self.beta})"
            )


EXPLICIT_EULER = EulerVariant(0, 0)
IMPLICIT_EULER = EulerVariant(1, 1)
SYMPLECTIC_EULER_PQ = EulerVariant(1, 0)  # new p enters first
SYMPLECTIC_EULER_QP = EulerVariant(0, 1)  # new q enters first


@dataclass(frozen=True)
class StepperConfig:
    """Step size plus implicit-solve parameters.

    ``step_size`` must be finite; integrate() additionally requires it
    positive, while the symmetry diagnostic deliberately runs steps with
    the sign flipped.  The solver tolerance is a max-norm residual
    relative to the state scale.
    """

    step_size: float
    solver: str = "fixed-point"
    solver_tol: float = 1e-12
    solver_max_iter: int = 50

    def __post_init__(self):
        if not np.isfinite(self.step_size):
            raise ContractViolationError(f"step_size must be finite, got {self.step_size}")
        if self.solver not in _SOLVERS:
            raise ContractViolationError(f"solver must be one of {_SOLVERS}, got {self.solver!r}")
        if not 0.0 < self.solver_tol < 1.0:
            raise ContractViolationError(f"solver_tol must be in (0, 1), got {self.solver_tol}")
        if self.solver_max_iter < 1:
            raise ContractViolationError("solver_max_iter must be at least 1")


def _fixed_point(map_fn, x0, tol, max_iter):
    x = x0
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        x_new = map_fn(x)
        if not np.all(np.isfinite(x_new)):
            raise SolverDivergenceError(
                "fixed-point iteration produced non-finite values",
                iterations=iteration,
                residual=float("inf"),
            )
        residual = float(np.max(np.abs(x_new - x)))
        if residual <= tol * (1.0 + float(np.max(np.abs(x_new)))):
            return x_new
        x = x_new
    raise SolverDivergenceError(
        f"fixed-point iteration did not converge in {max_iter} iterations "
        f"(last update {residual:.3e})",
        iterations=max_iter,
        residual=residual,
    )


def _newton(residual_fn, x0, tol, max_iter):
    x = x0.copy()
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        r = residual_fn(x)
        if not np.all(np.isfinite(r)):
            raise SolverDivergenceError(
                "Newton residual is non-finite",
                iterations=iteration,
                residual=float("inf"),
            )
        residual = float(np.max(np.abs(r)))
        if residual <= tol * (1.0 + float(np.max(np.abs(x)))):
            return x
        jac = central_jacobian(residual_fn, x, step=1e-7)
        try:
            dx = np.linalg.solve(jac, r)
        except np.linalg.LinAlgError as exc:
            raise SolverDivergenceError(
                f"Newton Jacobian is singular: {exc}",
                iterations=iteration,
                residual=residual,
            ) from exc
        x = x - dx
    raise SolverDivergenceError(
        f"Newton iteration did not converge in {max_iter} iterations "
        f"(last residual {residual:.3e})",
        iterations=max_iter,
        residual=residual,
    )


def _solve(cfg, map_fn, residual_fn, x0):
    if cfg.solver == "fixed-point":
        return _fixed_point(map_fn, x0, cfg.solver_tol, cfg.solver_max_iter)
    return _newton(residual_fn, x0, cfg.solver_tol, cfg.solver_max_iter)


def _euler_kernel(sys, variant, cfg, h, p, q):
    a, b = variant.alpha, variant.beta
    separable = isinstance(sys, SeparableSystem)
    if separable:
        if a == 0 and b == 0:
            return p - h * sys.grad_V(q), q + h * (sys.mass_inverse @ p)
        if a == 1 and b == 0:
            p1 = p - h * sys.grad_V(q)
            return p1, q + h * (sys.mass_inverse @ p1)
        if a == 0 and b == 1:
            q1 = q + h * (sys.mass_inverse @ p)
            return p - h * sys.grad_V(q1), q1
        # (1, 1): only the position equation is genuinely implicit.
        minv = sys.mass_inverse

        def q_map(q1):
            return q + h * (minv @ (p - h * sys.grad_V(q1)))

        def q_residual(q1):
            return q1 - q - h * (minv @ (p - h * sys.grad_V(q1)))

        q1 = _solve(cfg, q_map, q_residual, q)
        return p - h * sys.grad_V(q1), q1

    if a == 0 and b == 0:
        return p - h * sys.grad_q(p, q), q + h * sys.grad_p(p, q)
    if a == 1 and b == 0:
        p1 = _solve(
            cfg,
            lambda x: p - h * sys.grad_q(x, q),
            lambda x: x - p + h * sys.grad_q(x, q),
            p,
        )
        return p1, q + h * sys.grad_p(p1, q)
    if a == 0 and b == 1:
        q1 = _solve(
            cfg,
            lambda x: q + h * sys.grad_p(p, x),
            lambda x: x - q - h * sys.grad_p(p, x),
            q,
        )
        return p - h * sys.grad_q(p, q1), q1
    d = p.size

    def joint_map(x):
        pn, qn = x[:d], x[d:]
        return np.concatenate([p - h * sys.grad_q(pn, qn), q + h * sys.grad_p(pn, qn)])

    def joint_residual(x):
        return x - joint_map(x)

    x1 = _solve(cfg, joint_map, joint_residual, np.concatenate([p, q]))
    return x1[:d], x1[d:]


def _verlet_kernel(sys, cfg, h, p, q):
    if isinstance(sys, SeparableSystem):
        p_half = p - 0.5 * h * sys.grad_V(q)
        q1 = q + h * (sys.mass_inverse @ p_half)
        return p_half - 0.5 * h * sys.grad_V(q1), q1
    # General case: symmetric composition of the two mixed Euler halves.
    p_half, q_mid = _euler_kernel(sys, SYMPLECTIC_EULER_PQ, cfg, 0.5 * h, p, q)
    return _euler_kernel(sys, SYMPLECTIC_EULER_QP, cfg, 0.5 * h, p_half, q_mid)


def step_euler(sys, variant: EulerVariant, cfg: StepperConfig, y: PhaseState) -> PhaseState:
    """One step of the Euler variant ``variant`` with step cfg.step_size."""
    p, q = _euler_kernel(sys, variant, cfg, cfg.step_size, y.p, y.q)
    return PhaseState(p=p, q=q)


def step_stormer_verlet(sys, cfg: StepperConfig, y: PhaseState) -> PhaseState:
    """One step of the symmetric three-stage (kick, drift, kick) method."""
    p, q = _verlet_kernel(sys, cfg, cfg.step_size, y.p, y.q)
    return PhaseState(p=p, q=q)


METHOD_IDS = {
    "explicit-euler": EXPLICIT_EULER,
    "implicit-euler": IMPLICIT_EULER,
    "symplectic-euler-pq": SYMPLECTIC_EULER_PQ,
    "symplectic-euler-qp": SYMPLECTIC_EULER_QP,
    "stormer-verlet": "verlet",
}

MethodSpec = Union[str, EulerVariant, Callable]


def resolve_method(method: MethodSpec):
    """Turn a method id, EulerVariant, or kernel callable into a kernel.

    Kernels have signature (sys, cfg, h, p, q) -> (p1, q1) on raw arrays.
    """
    if isinstance(method, str):
        try:
            method = METHOD_IDS[method]
        except KeyError:
            raise ContractViolationError(
                f"unknown method id {method!r}; known: {sorted(METHOD_IDS)}"
            ) from None
    if isinstance(method, EulerVariant):
        variant = method
        return lambda sys, cfg, h, p, q: _euler_kernel(sys, variant, cfg, h, p, q)
    if method == "verlet":
        return _verlet_kernel
    if callable(method):
        return method
    raise ContractViolationError(f"cannot interpret method {method!r}")


def integrate(sys, method: MethodSpec, cfg: StepperConfig, y0: PhaseState, t_end, record_every=1):
    """Run round(t_end / h) fixed steps from t = 0; return [(t_k, state_k)].

    Records every ``record_every``-th step plus, always, the initial and
    final states.  If an implicit solve diverges at step k, the raised
    SolverDivergenceError carries ``step_index = k`` and the records
    collected so far in its ``records`` attribute.
    """
    h = cfg.step_size
    if h <= 0.0:
        raise ContractViolationError(f"integrate needs step_size > 0, got {h}")
    if t_end <= 0.0:
        raise ContractViolationError(f"integrate needs t_end > 0, got {t_end}")
    record_every = int(record_every)
    if record_every < 1:
        raise ContractViolationError(f"record_every must be >= 1, got {record_every}")
    kernel = resolve_method(method)
    n_steps = int(round(t_end / h))
    if n_steps < 1:
        raise ContractViolationError(
            f"round(t_end / h) = {n_steps}; step size {h} too large for t_end {t_end}"
        )
    p, q = y0.p.copy(), y0.q.copy()
    records = [(0.0, PhaseState(p=p, q=q))]
    for k in range(1, n_steps + 1):
        try:
            p, q = kernel(sys, cfg, h, p, q)
        except SolverDivergenceError as exc:
            exc.step_index = k
            exc.records = records
            raise
        if k % record_every == 0 or k == n_steps:
            records.append((k * h, PhaseState(p=p, q=q)))
    return records


def _flat_step(sys, kernel, cfg, h):
    def phi(y_flat):
        d = y_flat.size // 2
        p1, q1 = kernel(sys, cfg, h, y_flat[:d], y_flat[d:])
        return np.concatenate([p1, q1])

    return phi


def canonical_two_form(dim):
    """The matrix J of the symplectic form in the (p, q) flat layout."""
    j = np.zeros((2 * dim, 2 * dim))
    j[:dim, dim:] = np.eye(dim)
    j[dim:, :dim] = -np.eye(dim)
    return j


def symplecticity_defect(sys, method, cfg, y: PhaseState, fd_step=1e-6) -> float:
    """|| (D Phi)^T J (D Phi) - J ||_F with D Phi from centered differences.

    Exactly symplectic maps give zero up to finite-difference noise;
    the explicit and implicit Euler methods give a defect of order h^2.
    """
    kernel = resolve_method(method)
    phi = _flat_step(sys, kernel, cfg, cfg.step_size)
    dphi = central_jacobian(phi, y.flat(), step=fd_step)
    j = canonical_two_form(y.dim)
    return float(np.linalg.norm(dphi.T @ j @ dphi - j))


def symmetry_defect(sys, method, cfg, y: PhaseState) -> float:
    """Max-norm of Phi_{-h}(Phi_h(y)) - y; zero for symmetric methods."""
    kernel = resolve_method(method)
    h = cfg.step_size
    p1, q1 = kernel(sys, cfg, h, y.p, y.q)
    p2, q2 = kernel(sys, cfg, -h, p1, q1)
    return float(max(np.max(np.abs(p2 - y.p)), np.max(np.abs(q2 - y.q))))


def first_integral_series(records, integrals) -> SeriesTable:
    """Evaluate named functionals along a trajectory.

    ``records`` is the output of integrate(); ``integrals`` maps a name
    to a callable PhaseState -> float.  The table has, per integral I,
    columns I, I_drift (I(t) - I(0)) and I_rel_drift (drift normalized by
    |I(0)|, or the raw drift if I(0) is zero).
    """
    if not records:
        raise ContractViolationError("records must not be empty")
    names = list(integrals)
    columns = ["t"]
    for name in names:
        columns += [name, f"{name}_drift", f"{name}_rel_drift"]
    table = SeriesTable(columns)
    baseline = {name: float(integrals[name](records[0][1])) for name in names}
    for t, state in records:
        row = [t]
        for name in names:
            value = float(integrals[name](state))
            drift = value - baseline[name]
            scale = abs(baseline[name])
            row += [value, drift, drift / scale if scale > 0.0 else drift]
        table.append(row)
    return table


def with_step(cfg: StepperConfig, h) -> StepperConfig:
    """Copy of ``cfg`` with a different step size."""
    return replace(cfg, step_size=float(h))
