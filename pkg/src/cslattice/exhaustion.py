"""Domain exhaustion, decay-rate certification, and auxiliary verifiers.

The whole-lattice maximal solution is approximated by solving on an
increasing family of Manhattan balls and extending by zero.  Along such a
family the solutions decrease pointwise and their l2 norms stay uniformly
bounded, so the tail of the norm sequence stabilizes.  The far-field decay
obeys |f(x)| = O(e^{-alpha (1-eps) d(x)}) with alpha = ln(1 + lam*a/(2n))
for every eps in (0, 1); this module fits the observed shell-max decay and
produces the certificate constant, and separately verifies the two
pointwise inequalities behind that estimate:

  * the comparison barrier v(x) = -e^{-alpha(1-eps) d(x)} satisfies
    L v >= c1 v with c1 = 2n [(1 + lam*a/(2n))^{1-eps} - 1] on every shell;
  * the potential density w(x) = [(e^{(a+1)x} - 1) + (a+1)(1 - e^x)]/(a+1)
    dominates c * (|x|/(1+|x|))^2 on x <= 0 for a positive constant c
    (the coercivity that powers the uniform l2 bound).
"""

from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass

import numpy as np

from .errors import AnalysisError, ConvergenceError
from .fields import norm
from .lattice import Params, VortexConfig, build_domain, manhattan_norm, shell_size
from .linear import LinearSolveOptions
from .scheme import BoundedSolution, solve_bounded

SHELL_VALUE_GUARD = 1e-300  # double-precision floor before taking logs


def decay_rate_theory(params: Params, n: int) -> float:
    """alpha = ln(1 + lam*a/(2n)), the certified Manhattan decay rate."""
    return math.log(1.0 + params.lam * params.a / (2.0 * n))


def barrier_constant(params: Params, n: int, epsilon: float) -> float:
    """c1 = 2n [(1 + lam*a/(2n))^(1-eps) - 1]; equals lam*a in the eps -> 0 limit."""
    return 2.0 * n * ((1.0 + params.lam * params.a / (2.0 * n)) ** (1.0 - epsilon) - 1.0)


@dataclass(frozen=True)
class ExhaustionResult:
    """Solutions over an increasing radius schedule plus monotonicity data."""

    radii: tuple[int, ...]
    solutions: tuple[BoundedSolution, ...]
    l1_norms: tuple[float, ...]
    l2_norms: tuple[float, ...]
    sup_norms: tuple[float, ...]
    # max over the closure of B_{R_i} of (f^{(R_{i+1})} - f^{(R_i)});
    # nonpositive up to solver tolerance by nested-domain monotonicity
    pointwise_deltas: tuple[float, ...]

    @property
    def largest(self) -> BoundedSolution:
        return self.solutions[-1]


def _pointwise_delta(small: BoundedSolution, big: BoundedSolution) -> float:
    dom_s, dom_b = small.domain, big.domain
    lookup = np.array([dom_b.index[p] for p in dom_s.points], dtype=np.int64)
    return float(np.max(big.field.values[lookup] - small.field.values))


def run_exhaustion(
    n: int,
    vc: VortexConfig,
    params: Params,
    radii,
    tol: float = 1e-10,
    max_steps: int = 500,
    linear_opts: LinearSolveOptions = LinearSolveOptions(),
    jobs: int = 1,
) -> ExhaustionResult:
    """Solve on each radius, extend by zero, and record the nesting data.

    Radii must be strictly increasing and the smallest ball must contain
    every vortex.  Per-radius solves are independent; with jobs > 1 they
    run on a thread pool, results are still assembled in radius order so
    output is identical to the sequential run.  A failed solve raises
    ConvergenceError with the completed smaller radii attached as
    ``partial``.
    """
    radii = [int(r) for r in radii]
    if not radii:
        raise ValueError("radii must be a nonempty list")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError(f"radii must be strictly increasing, got {radii}")
    for p, _ in vc.vortices:
        if manhattan_norm(p) > radii[0]:
            raise ValueError(
                f"vortex {p} lies outside the smallest exhaustion ball (radius {radii[0]})"
            )

    def solve_radius(r: int) -> BoundedSolution:
        return solve_bounded(build_domain(n, r), vc, params, tol, max_steps, linear_opts)

    outcomes: list = []
    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(solve_radius, r) for r in radii]
            for fut in futures:
                try:
                    outcomes.append(fut.result())
                except ConvergenceError as exc:
                    outcomes.append(exc)
    else:
        for r in radii:
            try:
                outcomes.append(solve_radius(r))
            except ConvergenceError as exc:
                outcomes.append(exc)

    solutions: list[BoundedSolution] = []
    for r, out in zip(radii, outcomes):
        if isinstance(out, ConvergenceError):
            partial = _assemble(radii[: len(solutions)], solutions)
            raise ConvergenceError(
                f"bounded solve failed at radius {r}: {out}",
                partial=partial,
                trace=out.trace,
            )
        solutions.append(out)
    return _assemble(radii, solutions)


def _assemble(radii, solutions) -> ExhaustionResult:
    l1 = tuple(norm(s.field, 1) for s in solutions)
    l2 = tuple(norm(s.field, 2) for s in solutions)
    sup = tuple(norm(s.field, math.inf) for s in solutions)
    deltas = tuple(
        _pointwise_delta(a, b) for a, b in zip(solutions, solutions[1:])
    )
    return ExhaustionResult(
        radii=tuple(radii),
        solutions=tuple(solutions),
        l1_norms=l1,
        l2_norms=l2,
        sup_norms=sup,
        pointwise_deltas=deltas,
    )


def shell_profile(sol: BoundedSolution) -> list[tuple[int, float, float]]:
    """Per-distance extrema (d, max |f|, min |f|) over interior shells d = 0..R."""
    dom = sol.domain
    absvals = np.abs(sol.field.interior_values)
    dists = dom.distances[: dom.n_interior]
    out = []
    for d in range(dom.radius + 1):
        on_shell = absvals[dists == d]
        out.append((d, float(on_shell.max()), float(on_shell.min())))
    return out


@dataclass(frozen=True)
class DecayFit:
    """Least-squares decay certificate over a window of interior shells."""

    alpha_theory: float
    epsilon: float
    fit_window: tuple[int, int]
    fitted_rate: float  # -slope of log (shell max |f|) against d
    c_fit: float        # smallest C with max |f| <= C e^{-alpha(1-eps) d} on the window

    @property
    def certified_rate(self) -> float:
        return self.alpha_theory * (1.0 - self.epsilon)


def decay_fit(
    sol: BoundedSolution,
    epsilon: float,
    window: tuple[int, int] | None = None,
) -> DecayFit:
    """Fit the shell-max decay and compute the covering constant C.

    The default window [R/4, R/2] keeps the fit away from the vortex core
    and from the artificial zero boundary, whose proximity over-steepens
    the tail.  Shells whose maximum falls below the underflow guard are
    dropped; an empty window raises AnalysisError.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    dom = sol.domain
    n = dom.dim
    alpha = decay_rate_theory(sol.params, n)
    if window is None:
        window = (max(1, dom.radius // 4), dom.radius // 2)
    lo, hi = window
    prof = shell_profile(sol)
    ds = np.array([d for d, mx, _ in prof if lo <= d <= hi and mx > SHELL_VALUE_GUARD])
    maxima = np.array([mx for d, mx, _ in prof if lo <= d <= hi and mx > SHELL_VALUE_GUARD])
    if ds.size < 2:
        raise AnalysisError(
            f"decay window [{lo}, {hi}] has {ds.size} usable shells; "
            "solution too small or trivial"
        )
    slope = np.polyfit(ds.astype(float), np.log(maxima), 1)[0]
    beta = alpha * (1.0 - epsilon)
    c_fit = float(np.max(maxima * np.exp(beta * ds)))
    return DecayFit(
        alpha_theory=alpha,
        epsilon=epsilon,
        fit_window=(int(lo), int(hi)),
        fitted_rate=float(-slope),
        c_fit=c_fit,
    )


@dataclass(frozen=True)
class BarrierReport:
    """Pointwise check of L v >= c1 v for the decay barrier on a shell range."""

    c1: float
    shell_range: tuple[int, int]
    points_checked: int
    min_margin: float  # min over points of (L v - c1 v) / |v|
    all_hold: bool


def barrier_check(
    n: int,
    params: Params,
    epsilon: float,
    shell_range: tuple[int, int] = (2, 20),
) -> BarrierReport:
    """Evaluate the barrier inequality exactly at every point of the shells.

    v(x) = -e^{-alpha(1-eps) d(x)}.  Each axis contributes through the two
    neighbours x +- e_i, whose distances are d +- 1 when x_i != 0 and both
    d + 1 when x_i = 0; the margin is normalized by |v(x)| so the report is
    scale-free across shells.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    r_lo, r_hi = shell_range
    if r_lo < 1 or r_hi < r_lo:
        raise ValueError(f"need 1 <= R1 <= R2, got {shell_range}")
    alpha = decay_rate_theory(params, n)
    beta = alpha * (1.0 - epsilon)
    c1 = barrier_constant(params, n, epsilon)
    # e^{-beta s} for every distance the stencils can reach
    expw = np.exp(-beta * np.arange(r_hi + 2, dtype=float))

    worst = math.inf
    count = 0
    for p in _shell_points(n, r_lo, r_hi):
        s = manhattan_norm(p)
        v = -expw[s]
        lap = 0.0
        for i in range(n):
            if p[i] != 0:
                lap += -expw[s - 1] - expw[s + 1] + 2.0 * expw[s]
            else:
                lap += -2.0 * expw[s + 1] + 2.0 * expw[s]
        margin = (lap - c1 * v) / abs(v)
        worst = min(worst, margin)
        count += 1
    return BarrierReport(
        c1=c1,
        shell_range=(r_lo, r_hi),
        points_checked=count,
        min_margin=worst,
        all_hold=worst >= -1e-15,
    )


def _shell_points(n: int, r_lo: int, r_hi: int):
    coords = [0] * n

    def fill(axis: int, budget: int):
        if axis == n - 1:
            for v in range(-budget, budget + 1):
                coords[axis] = v
                p = tuple(coords)
                if manhattan_norm(p) >= r_lo:
                    yield p
            return
        for v in range(-budget, budget + 1):
            coords[axis] = v
            yield from fill(axis + 1, budget - abs(v))

    yield from fill(0, r_hi)


@dataclass(frozen=True)
class CoercivityReport:
    """Numerical infimum of the potential-density coercivity ratio."""

    a: float
    c_est: float
    all_hold: bool
    grid_size: int


def coercivity_default_grid(reach: float = 50.0, size: int = 300) -> np.ndarray:
    """Nonpositive grid: 0 plus -logspace covering [1e-8, reach]."""
    return np.concatenate(([0.0], -np.logspace(-8.0, math.log10(reach), size)))


def coercivity_check(a: float, x_grid) -> CoercivityReport:
    """Infimum over the grid of w(x) / (|x|/(1+|x|))^2 for nonpositive x.

    w(x) = [(e^{(a+1)x} - 1) + (a+1)(1 - e^x)]/(a+1).  At x = 0 both sides
    vanish and the ratio is taken as its limit a/2.  For a = 1 the density
    is exactly (1 - e^x)^2 / 2 and the infimum is 1/2.
    """
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")
    k = a + 1.0
    ratios = []
    for x in np.asarray(x_grid, dtype=float):
        if x > 0:
            raise ValueError(f"grid point {x} is positive; the bound concerns x <= 0")
        t = -x
        if t == 0.0:
            ratios.append(a / 2.0)
            continue
        w = math.expm1(-k * t) / k - math.expm1(-t)
        ratios.append(w / (t / (1.0 + t)) ** 2)
    c_est = float(min(ratios))
    return CoercivityReport(a=a, c_est=c_est, all_hold=c_est > 0.0, grid_size=len(ratios))


@dataclass(frozen=True)
class LpSummary:
    """l^p norms of the largest-radius solution and l1 stabilization data."""

    norms: dict[float, float]
    l1_norms: tuple[float, ...]
    l1_diffs: tuple[float, ...]
    l1_tail_bound: float | None
    all_finite: bool


def lp_summary(result: ExhaustionResult, p_list, fit: DecayFit | None = None) -> LpSummary:
    """Tabulate l^p norms and, given a decay certificate, bound the l1 tail.

    The bound sums C_fit * (shell size) * e^{-alpha(1-eps) d} over shells
    beyond half the second-largest radius, the region where the two
    largest solutions can differ materially.
    """
    f = result.largest.field
    norms = {float(p): norm(f, float(p)) for p in p_list}
    l1_diffs = tuple(
        abs(b - a) for a, b in zip(result.l1_norms, result.l1_norms[1:])
    )
    tail_bound = None
    if fit is not None and len(result.radii) >= 2:
        n = f.domain.dim
        beta = fit.certified_rate
        d = result.radii[-2] // 2 + 1
        total = 0.0
        while True:
            term = fit.c_fit * shell_size(n, d) * math.exp(-beta * d)
            total += term
            d += 1
            if term < 1e-18 * max(total, 1.0) or d > 100_000:
                break
        tail_bound = total
    all_finite = all(math.isfinite(v) for v in norms.values())
    return LpSummary(
        norms=norms,
        l1_norms=result.l1_norms,
        l1_diffs=l1_diffs,
        l1_tail_bound=tail_bound,
        all_finite=all_finite,
    )
