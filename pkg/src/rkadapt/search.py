"""Brute-force controller-parameter optimization over a (beta1, beta2, beta3) grid.

Candidates are pre-filtered by step-size-control stability, every stable
candidate is integrated on each problem at each tolerance, failed runs cost
+inf, and the aggregation minimizes the maximum, median, or 95th percentile
of the RHS-evaluation counts across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import stability
from .control import ControllerConfig
from .integrate import IntegrationAbort, integrate

DEFAULT_TOLERANCES = tuple(10.0 ** -e for e in range(8, 0, -1))   # 1e-8 .. 1e-1


class EmptyStableSetError(RuntimeError):
    """No control-stable candidate exists; the pair is uncontrollable here."""


def _inclusive_grid(lo, hi, step):
    n = int(round((hi - lo) / step)) + 1
    return np.round(lo + step * np.arange(n), 10)


@dataclass(frozen=True)
class SearchSpace:
    beta1: tuple = tuple(_inclusive_grid(0.10, 1.00, 0.01))
    beta2: tuple = tuple(_inclusive_grid(-0.40, -0.05, 0.01))
    beta3: tuple = tuple(_inclusive_grid(0.00, 0.10, 0.01))
    tolerances: tuple = DEFAULT_TOLERANCES

    @property
    def cardinality(self):
        return len(self.beta1) * len(self.beta2) * len(self.beta3)

    def candidates(self):
        for b1 in self.beta1:
            for b2 in self.beta2:
                for b3 in self.beta3:
                    yield (float(b1), float(b2), float(b3))

    def subsample(self, budget, seed=0):
        """Deterministic low-discrepancy subsample of at most `budget` points."""
        if budget is None or budget >= self.cardinality:
            return list(self.candidates())
        axes = (self.beta1, self.beta2, self.beta3)
        sampler = qmc.Halton(d=3, scramble=True, seed=seed)
        picked = {}
        # oversample to absorb grid-rounding duplicates
        draw = sampler.random(4 * budget)
        for row in draw:
            idx = tuple(int(v * len(ax)) if v < 1.0 else len(ax) - 1
                        for v, ax in zip(row, axes))
            if idx not in picked:
                picked[idx] = tuple(float(ax[i]) for ax, i in zip(axes, idx))
                if len(picked) >= budget:
                    break
        return list(picked.values())


@dataclass
class CandidateResult:
    beta: tuple
    stable: bool
    runs: list = field(default_factory=list)   # (problem, tol, nfe, n_rejected, error, failed)

    def nfe_values(self):
        return [math.inf if failed else nfe for (_, _, nfe, _, _, failed) in self.runs]

    def aggregate(self, policy):
        vals = self.nfe_values()
        if not vals:
            return math.inf
        if any(math.isinf(v) for v in vals):
            return math.inf
        if policy == "min-max":
            return max(vals)
        if policy == "min-median":
            return float(np.median(vals))
        if policy == "min-p95":
            return float(np.percentile(vals, 95))
        raise ValueError(f"unknown policy {policy!r}")


@dataclass
class SearchResult:
    scheme: str
    candidates: list                    # CandidateResult, stable ones carry runs
    indeterminate: list                 # betas whose stability scan failed
    tolerances: tuple
    problems: tuple

    def stable_candidates(self):
        return [c for c in self.candidates if c.stable]

    def min_nfe(self, problem=None, tol=None):
        """Smallest finite #FE over stable candidates, optionally filtered."""
        best = math.inf
        for cand in self.stable_candidates():
            for (pname, ptol, nfe, _, _, failed) in cand.runs:
                if failed:
                    continue
                if problem is not None and pname != problem:
                    continue
                if tol is not None and ptol != tol:
                    continue
                best = min(best, nfe)
        return best


def filter_stable(scheme, candidates, n_points=512):
    """Split candidates into control-stable, unstable, and indeterminate."""
    if isinstance(candidates, SearchSpace):
        candidates = list(candidates.candidates())
    k = min(scheme.q, scheme.qhat) + 1
    try:
        z, r, e, keep = stability.boundary_samples(scheme, n_points=n_points)
    except stability.TraceError:
        return [], [], list(candidates)
    rk, ek = r[keep], e[keep]
    stable, unstable, indeterminate = [], [], []
    if len(rk) == 0:
        return [], [], list(candidates)
    for beta in candidates:
        rho = stability._rho_batch(rk, ek, beta, k)
        (stable if np.all(rho < 1.0) else unstable).append(beta)
    return stable, unstable, indeterminate


def run_search(scheme, problems, space=None, budget=None, tolerances=None,
               seed=0, max_attempts=2_000_000) -> SearchResult:
    """Evaluate every (stable beta, tolerance, problem) combination.

    Integration failures (aborts, inadmissible blowups) are recorded with
    infinite cost rather than dropped, so min-max aggregation punishes
    fragile controllers.
    """
    space = space or SearchSpace()
    tolerances = tuple(tolerances) if tolerances is not None else space.tolerances
    candidates = space.subsample(budget, seed=seed)
    stable, unstable, indeterminate = filter_stable(scheme, candidates)

    results = [CandidateResult(beta=b, stable=False) for b in unstable]
    for beta in stable:
        cand = CandidateResult(beta=beta, stable=True)
        for problem in problems:
            for tol in tolerances:
                cand.runs.append(_run_one(scheme, problem, beta, tol, max_attempts))
        results.append(cand)
    results.sort(key=lambda c: c.beta)
    return SearchResult(
        scheme=getattr(scheme, "name", type(scheme).__name__),
        candidates=results,
        indeterminate=indeterminate,
        tolerances=tolerances,
        problems=tuple(p.name for p in problems),
    )


def _run_one(scheme, problem, beta, tol, max_attempts):
    cfg = ControllerConfig.for_scheme(scheme, tol=tol, beta=beta)
    try:
        rep = integrate(scheme, problem.semi, cfg, problem.t0, problem.t_end,
                        problem.u0, error_fn=problem.error_fn,
                        max_attempts=max_attempts)
    except IntegrationAbort:
        return (problem.name, tol, math.inf, math.inf, math.inf, True)
    err = max(rep.errors.values()) if rep.errors else math.nan
    return (problem.name, tol, rep.nfe, rep.n_rejected, err, False)


def recommend(result: SearchResult, policy="min-max"):
    """Rank stable candidates by the aggregation policy.

    Ties break toward deadbeat control: larger beta1, then smaller |beta2|,
    then smaller beta3.
    """
    stable = result.stable_candidates()
    if not stable:
        raise EmptyStableSetError(
            f"no control-stable candidates for {result.scheme}; "
            "step size control stability cannot be achieved on this grid")
    keyed = sorted(
        stable,
        key=lambda c: (c.aggregate(policy), -c.beta[0], abs(c.beta[1]), c.beta[2]))
    return keyed
