"""Adaptive time integration loop with PID or CFL step size control."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import control as ctrl
from .control import CflConfig, ControllerConfig, ControllerState
from .stepping import step

DT_UNDERFLOW = 1e-14   # times the horizon; below this the run aborts


@dataclass
class RunReport:
    """Per-integration statistics: #FE, #R, step history, final errors."""

    scheme: str
    controller: str
    t0: float
    t_end: float
    t_final: float = 0.0
    u_final: np.ndarray | None = None
    nfe: int = 0
    n_accepted: int = 0
    n_rejected: int = 0
    wall_time: float = 0.0
    errors: dict | None = None
    accepted_dts: list = field(default_factory=list)
    rejected_dts: list = field(default_factory=list)
    aborted: bool = False
    abort_reason: str | None = None

    @property
    def steps(self):
        return self.n_accepted

    def as_dict(self):
        d = {
            "scheme": self.scheme,
            "controller": self.controller,
            "t0": self.t0,
            "t_end": self.t_end,
            "t_final": self.t_final,
            "nfe": self.nfe,
            "n_accepted": self.n_accepted,
            "n_rejected": self.n_rejected,
            "wall_time": self.wall_time,
            "aborted": self.aborted,
        }
        if self.abort_reason:
            d["abort_reason"] = self.abort_reason
        if self.errors is not None:
            d["errors"] = self.errors
        return d


class IntegrationAbort(RuntimeError):
    """Unrecoverable integration failure; carries the partial report."""

    def __init__(self, reason, report):
        super().__init__(reason)
        self.report = report


def integrate(scheme, rhs, controller, t0, t_end, u0, dt0=None,
              record_history=False, max_attempts=10_000_000, error_fn=None):
    """Advance u' = rhs(t, u) from t0 to exactly t_end.

    `controller` is either a ControllerConfig (embedded-error PID control
    with rejections) or a CflConfig (wave-speed-proportional steps, no error
    estimate).  The final step is clipped to land on t_end bitwise.  Raises
    IntegrationAbort if dt underflows below 1e-14 times the horizon.
    """
    if t_end <= t0:
        raise ValueError("t_end must exceed t0")
    u0 = np.asarray(u0, dtype=float)
    admissible = getattr(rhs, "is_admissible", None)
    if admissible is not None and not admissible(u0):
        raise ValueError("initial state is not admissible")

    if isinstance(controller, CflConfig):
        report = _integrate_cfl(scheme, rhs, controller, t0, t_end, u0,
                                record_history, max_attempts)
    elif isinstance(controller, ControllerConfig):
        report = _integrate_pid(scheme, rhs, controller, t0, t_end, u0, dt0,
                                record_history, max_attempts)
    else:
        raise TypeError(f"unsupported controller {type(controller).__name__}")

    if error_fn is not None and not report.aborted:
        report.errors = error_fn(report.t_final, report.u_final)
    return report


def _new_report(scheme, controller, t0, t_end):
    name = getattr(scheme, "name", type(scheme).__name__)
    return RunReport(scheme=name, controller=controller.describe(), t0=t0, t_end=t_end)


def _finish(report, t, u, start):
    report.t_final = t
    report.u_final = u
    report.wall_time = max(time.perf_counter() - start, 1e-9)
    return report


def _abort(report, reason, t, u, start):
    report.aborted = True
    report.abort_reason = reason
    _finish(report, t, u, start)
    raise IntegrationAbort(reason, report)


def _integrate_pid(scheme, rhs, cfg, t0, t_end, u0, dt0, record_history, max_attempts):
    start = time.perf_counter()
    report = _new_report(scheme, cfg, t0, t_end)
    horizon = t_end - t0
    admissible = getattr(rhs, "is_admissible", None)

    if dt0 is None:
        dt0 = ctrl.initial_step(rhs, t0, u0, cfg, q=scheme.q, horizon=horizon,
                                admissible=admissible)
        report.nfe += 2
    dt0 = min(dt0, horizon)
    state = ControllerState(dt_current=dt0)

    t, u = t0, u0
    fcache = None
    attempts = 0
    while t < t_end:
        attempts += 1
        if attempts > max_attempts:
            _abort(report, "attempt budget exhausted", t, u, start)
        clipped = t + state.dt_current >= t_end
        dt_try = t_end - t if clipped else state.dt_current
        state.dt_current = dt_try

        res = step(scheme, rhs, t, dt_try, u, f0=fcache, need_estimate=True)
        report.nfe += res.nfe
        ok = res.finite and (admissible is None or admissible(res.u_new))
        if not ok:
            # same robustness path for NaN stages and physical-bounds failures
            decision = ctrl.accept_or_reject(0.0, dt_try, dt_try, False, cfg)
            report.n_rejected += 1
            if record_history:
                report.rejected_dts.append(dt_try)
            state.dt_current = decision.dt_next
            if state.dt_current < DT_UNDERFLOW * horizon:
                _abort(report, "step size underflow after bounds rejection", t, u, start)
            continue

        w = ctrl.error_norm(res.u_new, res.u_new - res.err_diff, cfg)
        state.push(ctrl.inverse_error(w))
        dt_next, factor = ctrl.pid_propose(state, cfg)
        decision = ctrl.accept_or_reject(factor, dt_try, dt_next, True, cfg)
        if decision.accept:
            t = t_end if clipped else t + dt_try
            u = res.u_new
            fcache = res.fsal_f
            report.n_accepted += 1
            if record_history:
                report.accepted_dts.append(dt_try)
        else:
            report.n_rejected += 1
            if record_history:
                report.rejected_dts.append(dt_try)
        state.dt_current = decision.dt_next
        if t < t_end and state.dt_current < DT_UNDERFLOW * horizon:
            _abort(report, "step size underflow", t, u, start)

    return _finish(report, t, u, start)


def _integrate_cfl(scheme, rhs, cfg, t0, t_end, u0, record_history, max_attempts):
    start = time.perf_counter()
    report = _new_report(scheme, cfg, t0, t_end)
    horizon = t_end - t0
    admissible = getattr(rhs, "is_admissible", None)

    t, u = t0, u0
    steps = 0
    while t < t_end:
        steps += 1
        if steps > max_attempts:
            _abort(report, "attempt budget exhausted", t, u, start)
        dt = ctrl.cfl_dt(rhs, u, cfg)
        clipped = t + dt >= t_end
        if clipped:
            dt = t_end - t
        res = step(scheme, rhs, t, dt, u, need_estimate=False)
        report.nfe += res.nfe
        if not res.finite or (admissible is not None and not admissible(res.u_new)):
            _abort(report, "solution left the admissible set under CFL control",
                   t, u, start)
        t = t_end if clipped else t + dt
        u = res.u_new
        report.n_accepted += 1
        if record_history:
            report.accepted_dts.append(dt)
        if t < t_end and dt < DT_UNDERFLOW * horizon:
            _abort(report, "step size underflow", t, u, start)

    return _finish(report, t, u, start)
