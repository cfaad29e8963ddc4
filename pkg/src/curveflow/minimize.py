"""One implicit time step: minimize F(., prev) in reduced coordinates.

The equal-edge constraint is eliminated by the (base, l, headings) chart, so
the step is an unconstrained smooth minimization on an open set: l > 0, the
endpoint gap above a small floor (the log barrier keeps the region open), and
no anti-parallel edge pairs. A limited-memory BFGS iteration with Armijo
backtracking is used; candidate steps leaving the open set are rejected by
shrinking the step. Everything is deterministic: identical inputs produce
bit-identical outputs.
"""

from dataclasses import dataclass

import numpy as np

from .energy import EnergyParams, PrevFrame, _objective_raw
from .errors import CuspAngle, DegenerateGap, LineSearchFailure, MismatchedN
from .polyline import CUSP_TOL, DiscreteCurve, ReducedCoords, from_reduced, to_reduced

GAP_FLOOR = 1e-8

# Backtracking gives up after this many halvings.
_MAX_HALVINGS = 60

# A stalled line search with a gradient above 1e-3*(1+|f|) indicates a genuine
# failure (broken gradient, non-smooth objective) rather than the
# floating-point floor of f; benign floor stalls sit orders of magnitude lower.
_STALL_GRAD_FACTOR = 1e-3

# Inner iterations without strict objective decrease before declaring a stall.
_STALL_WINDOW = 30


@dataclass(frozen=True)
class SolverOptions:
    """Tuning knobs of the inner quasi-Newton solver."""

    grad_tol: float = 1e-9
    max_iters: int = 2000
    ls_shrink: float = 0.5
    ls_c1: float = 1e-4
    memory: int = 10

    def __post_init__(self):
        if not (self.grad_tol > 0 and self.max_iters > 0 and self.memory > 0):
            raise ValueError("grad_tol, max_iters and memory must be positive")
        if not (0.0 < self.ls_shrink < 1.0):
            raise ValueError(f"ls_shrink must be in (0,1), got {self.ls_shrink}")
        if not (0.0 < self.ls_c1 < 1.0):
            raise ValueError(f"ls_c1 must be in (0,1), got {self.ls_c1}")


@dataclass(frozen=True)
class StepReport:
    iterations: int
    final_grad_norm: float
    f_initial: float
    f_final: float
    converged: bool


def _feasible(z: np.ndarray, gap_floor: float) -> bool:
    """Open-set membership of a reduced-coordinate vector."""
    ell = z[2]
    if not (ell > 0.0) or not np.all(np.isfinite(z)):
        return False
    theta = z[3:]
    if theta.size > 1:
        if np.min(1.0 + np.cos(np.diff(theta))) < CUSP_TOL:
            return False
    # gap = l * |sum of unit tangents|
    sx = float(np.sum(np.cos(theta)))
    sy = float(np.sum(np.sin(theta)))
    return ell * np.hypot(sx, sy) > gap_floor


def _two_loop(grad, s_list, y_list, rho_list):
    """Standard L-BFGS two-loop recursion; returns the descent direction."""
    q = grad.copy()
    alphas = []
    for s, y, rho in zip(reversed(s_list), reversed(y_list), reversed(rho_list)):
        a = rho * float(s @ q)
        q -= a * y
        alphas.append(a)
    if s_list:
        y = y_list[-1]
        q *= float(s_list[-1] @ y) / float(y @ y)
    for (s, y, rho), a in zip(zip(s_list, y_list, rho_list), reversed(alphas)):
        b = rho * float(y @ q)
        q += (a - b) * s
    return -q


def minimize_step(
    prev: DiscreteCurve,
    params: EnergyParams,
    opts: SolverOptions | None = None,
    gap_floor: float = GAP_FLOOR,
) -> tuple[DiscreteCurve, StepReport]:
    """Minimize F(., prev) warm-started at prev; returns (curve, report).

    The accepted iterates decrease F monotonically, so the result always
    satisfies F(next, prev) <= F(prev, prev) = E(prev). With ``converged``
    set, the analytic gradient inf-norm is below ``opts.grad_tol``; hitting
    ``max_iters`` (or the floating-point resolution of F) returns the partial
    minimizer with converged=False instead of raising.
    """
    if opts is None:
        opts = SolverOptions()
    if prev.gap <= gap_floor:
        raise DegenerateGap(
            f"previous curve gap {prev.gap:.3e} is at or below the floor"
        )
    frame = PrevFrame(prev)
    n = prev.n

    # Work in scaled variables w (the l slot carries total length) so the
    # coordinate scales are comparable; z = scale * w.
    scale = np.ones(n + 2)
    scale[2] = 1.0 / (n - 1)

    def evaluate(w):
        f, g = _objective_raw(scale * w, frame, params, True)
        return f, g * scale

    z0 = to_reduced(prev).as_vector()
    w = z0 / scale
    f, g = evaluate(w)
    f_initial = f

    s_list: list[np.ndarray] = []
    y_list: list[np.ndarray] = []
    rho_list: list[float] = []

    iterations = 0
    converged = False
    f_best = f
    since_improvement = 0

    for _ in range(opts.max_iters):
        grad_z_inf = float(np.max(np.abs(g / scale)))
        if grad_z_inf <= opts.grad_tol:
            converged = True
            break
        if since_improvement > _STALL_WINDOW:
            break

        d = _two_loop(g, s_list, y_list, rho_list)
        gd = float(g @ d)
        if not np.isfinite(gd) or gd >= 0.0:
            d = -g
            gd = -float(g @ g)
            s_list, y_list, rho_list = [], [], []

        accepted = False
        for attempt in range(2):
            alpha = 1.0 if s_list else min(1.0, 1.0 / float(np.linalg.norm(g)))
            for _h in range(_MAX_HALVINGS + 1):
                w_trial = w + alpha * d
                if _feasible(scale * w_trial, gap_floor):
                    try:
                        f_trial, g_trial = evaluate(w_trial)
                    except (CuspAngle, DegenerateGap):
                        pass  # borderline of the open set; shrink
                    else:
                        if f_trial <= f + opts.ls_c1 * alpha * gd:
                            accepted = True
                            break
                alpha *= opts.ls_shrink
            if accepted or attempt == 1:
                break
            # Retry once along steepest descent with fresh memory.
            d = -g
            gd = -float(g @ g)
            s_list, y_list, rho_list = [], [], []

        if not accepted:
            if grad_z_inf > _STALL_GRAD_FACTOR * (1.0 + abs(f)):
                raise LineSearchFailure(
                    f"no descent within {_MAX_HALVINGS} halvings at "
                    f"grad inf-norm {grad_z_inf:.3e}"
                )
            break  # floating-point floor of F; return the partial minimizer

        s_vec = w_trial - w
        if not np.any(s_vec):
            break  # step rounded to zero
        y_vec = g_trial - g
        sy = float(s_vec @ y_vec)
        if sy > 1e-12 * float(np.linalg.norm(s_vec)) * float(np.linalg.norm(y_vec)):
            s_list.append(s_vec)
            y_list.append(y_vec)
            rho_list.append(1.0 / sy)
            if len(s_list) > opts.memory:
                s_list.pop(0)
                y_list.pop(0)
                rho_list.pop(0)

        if f_trial < f_best:
            f_best = f_trial
            since_improvement = 0
        else:
            since_improvement += 1
        w, f, g = w_trial, f_trial, g_trial
        iterations += 1

    final_grad = float(np.max(np.abs(g / scale)))
    if final_grad <= opts.grad_tol:
        converged = True
    report = StepReport(
        iterations=iterations,
        final_grad_norm=final_grad,
        f_initial=f_initial,
        f_final=f,
        converged=converged,
    )
    next_curve = from_reduced(ReducedCoords.from_vector(scale * w))
    return next_curve, report


def assert_cone_condition(next_curve: DiscreteCurve, prev: DiscreteCurve) -> bool:
    """True iff every edge tangent kept a non-negative dot with its
    predecessor, i.e. the step stayed inside the admissible cone of prev."""
    if next_curve.n != prev.n:
        raise MismatchedN(f"curves have N={next_curve.n} and N={prev.n}")
    e_new = next_curve.edges
    e_old = prev.edges
    dots = np.sum(e_new * e_old, axis=1)
    return bool(np.all(dots >= 0.0))
