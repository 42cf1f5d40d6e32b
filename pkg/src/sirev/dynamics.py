"""Geodesic flow on the (a, y, p_a, p_y) chart and an invariant-drift harness.

Integration runs in the canonically equivalent chart ``q = ln a``, ``p_q = a p_a``.
There ``Pi = p_q / x'(a)`` and

    dq/dt = 2 Pi / x'        dy/dt = 2 a p_y
    dp_q/dt = a (2 Pi^2 x''/x' - p_y^2)        dp_y/dt = 0

Orbits that run into ``a -> 0`` do so exponentially in t, which the log chart
resolves without step-size collapse. Results are reported in (a, y, p_a, p_y).
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NotSimple, OutOfDomain, StepFailure
from .model import ModelSpec, hamiltonian
from .phase import Observable, PhasePoint, bracket_with_scale, poisson_bracket

__all__ = [
    "PhasePoint",
    "Observable",
    "poisson_bracket",
    "bracket_with_scale",
    "hamiltonian",
    "Trajectory",
    "DriftReport",
    "integrate_geodesic",
    "integrate_many",
    "write_trajectory_csv",
]

# below this a the orbit is treated as having reached the ideal boundary a = 0
A_FLOOR = 1e-280


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray  # rows (a, y, p_a, p_y)
    invariants: dict = field(default_factory=dict)  # name -> array along t

    def point(self, i: int) -> PhasePoint:
        return PhasePoint.from_array(self.states[i])

    @property
    def end(self) -> PhasePoint:
        return self.point(-1)


@dataclass
class DriftReport:
    T: float
    t_end: float
    tol: float
    initial: dict
    max_rel_drift: dict
    n_steps: int
    n_fev: int
    min_step: float
    max_step: float
    domain_exit: bool = False
    exit_reason: str = ""

    def as_dict(self) -> dict:
        return {
            "T": self.T,
            "t_end": self.t_end,
            "tol": self.tol,
            "initial": dict(self.initial),
            "max_rel_drift": dict(self.max_rel_drift),
            "steps": {"n_steps": self.n_steps, "n_fev": self.n_fev,
                      "min_step": self.min_step, "max_step": self.max_step},
            "domain_exit": self.domain_exit,
            "exit_reason": self.exit_reason,
        }


def _rhs(model: ModelSpec):
    prof = model.profile

    def f(t, z):
        q, _, pq, py = z
        try:
            a = math.exp(q)
            d = prof.derivatives(a, 2)
        except (OverflowError, OutOfDomain):
            # a trial stage left the chart; an infinite error estimate makes the solver
            # reject the step and shrink it
            return [math.inf] * 4
        xd, xdd = d[1], d[2]
        pi = pq / xd
        return [2 * pi / xd, 2 * a * py, a * (2 * pi * pi * xdd / xd - py * py), 0.0]

    return f


def _guards(model: ModelSpec, margin: float, a0: float):
    """Terminal events: distance to each finite domain end and pole, minus the guard, and
    ``x'`` collapsing toward a zero (where the metric degenerates)."""
    lo, hi = model.domain
    length = (hi - lo) if math.isfinite(hi) else max(1.0, abs(lo))
    g = margin * length
    events = []

    def mk(fn, reason):
        fn.terminal = True
        fn.direction = -1
        fn.reason = reason
        events.append(fn)

    if lo > 0:
        mk(lambda t, z: math.exp(z[0]) - (lo + g), f"a reached the lower end {lo} (guard {g:g})")
    else:
        floor = math.log(A_FLOOR)
        mk(lambda t, z: z[0] - floor, f"a reached the ideal boundary a = 0 (a < {A_FLOOR:g})")
    if math.isfinite(hi):
        mk(lambda t, z: (hi - g) - math.exp(z[0]), f"a reached the upper end {hi} (guard {g:g})")
    for p in model.profile.poles:
        if lo < p < hi:
            mk(lambda t, z, p=p: abs(math.exp(z[0]) - p) - g, f"a approached the pole {p}")
    floor_xd = margin * abs(model.profile(a0, 1))
    mk(lambda t, z: abs(model.profile(math.exp(z[0]), 1)) - floor_xd,
       f"x' fell below {margin:g} of its starting size (metric degenerating)")
    return events


def _invariant_observables(model: ModelSpec, system=None):
    """``(observables, magnitudes)``; ``magnitudes(point)`` gives the drift reference scales."""
    if system is None:
        from .integrals import build_system

        try:
            system = build_system(model)
        except NotSimple:
            system = None
    if system is None:
        from .phase import coordinate

        H = Observable(lambda p: _h_jet(model, p), "H")
        return {"H": H, "P_y": coordinate("p_y")}, lambda p: {"H": abs(H(p)), "P_y": abs(p.p_y)}
    obs = {"H": system.H, "P_y": system.P_y, "S1": system.S1, "S2": system.S2}
    return obs, system.magnitudes


def _h_jet(model, p):
    from .phase import Jet

    d = model.profile.derivatives(p.a, 2)
    ja, jpa, jpy = Jet.var(0, p.a), Jet.var(2, p.p_a), Jet.var(3, p.p_y)
    pi = ja * jpa / Jet.of_a(d[1], d[2])
    return pi * pi + ja * jpy * jpy


def integrate_geodesic(model: ModelSpec, start: PhasePoint, T: float, tol: float = 1e-10,
                       system=None, margin: float = 1e-6, samples: int = 0):
    """Integrate Hamilton's equations over ``[0, T]``.

    Returns ``(trajectory, DriftReport)``. Invariants are evaluated at every accepted
    step (plus ``samples`` equispaced dense-output times when requested). A run that
    meets a guard stops early with ``domain_exit`` set; it is not an error. Drift of an
    invariant I is ``max |I(t) - I(0)|`` over the largest summed magnitude of its terms
    along the orbit (or ``|I(0)|`` if larger).
    """
    if T <= 0 or tol <= 0:
        raise ValueError("T and tol must be positive")
    model.check(start.a)
    obs, magnitudes = _invariant_observables(model, system)
    z0 = [math.log(start.a), start.y, start.a * start.p_a, start.p_y]
    events = _guards(model, margin, start.a)
    sol = solve_ivp(_rhs(model), (0.0, T), z0, method="DOP853", rtol=tol, atol=tol * 1e-6,
                    dense_output=samples > 0, events=events)
    if sol.status == -1:
        raise StepFailure(f"integration failed: {sol.message}")
    ts = sol.t
    Z = sol.y
    if samples > 0:
        extra = np.linspace(0.0, sol.t[-1], samples)
        ts = np.union1d(ts, extra)
        Z = sol.sol(ts)
    a = np.exp(Z[0])
    states = np.column_stack([a, Z[1], Z[2] / a, Z[3]])
    reason = ""
    exited = sol.status == 1
    if exited:
        for ev, hits in zip(events, sol.t_events):
            if len(hits):
                reason = ev.reason
    values = {k: [] for k in obs}
    for row in states:
        p = PhasePoint.from_array(row)
        for k, o in obs.items():
            values[k].append(o(p))
    values = {k: np.array(v) for k, v in values.items()}
    initial = {k: float(v[0]) for k, v in values.items()}
    # reference: the largest size the summands making up I reach along the orbit
    ref_scale = dict.fromkeys(values, 0.0)
    for row in states:
        for k, m in magnitudes(PhasePoint.from_array(row)).items():
            ref_scale[k] = max(ref_scale[k], m)
    drift = {}
    for k, v in values.items():
        ref = max(abs(v[0]), ref_scale[k])
        dev = np.max(np.abs(v - v[0]))
        drift[k] = float(dev / ref) if ref > 0 else float(dev)
    steps = np.diff(sol.t)
    report = DriftReport(
        T=float(T), t_end=float(sol.t[-1]), tol=float(tol), initial=initial, max_rel_drift=drift,
        n_steps=int(len(sol.t) - 1), n_fev=int(sol.nfev),
        min_step=float(steps.min()) if len(steps) else 0.0,
        max_step=float(steps.max()) if len(steps) else 0.0,
        domain_exit=exited, exit_reason=reason,
    )
    return Trajectory(ts, states, values), report


def integrate_many(model: ModelSpec, starts, T: float, tol: float = 1e-10, workers: int = 4, **kw):
    """Independent runs in a thread pool; results in the order of ``starts``."""
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(integrate_geodesic, model, s, T, tol, **kw) for s in starts]
        return [f.result() for f in futures]


def write_trajectory_csv(traj: Trajectory, path) -> None:
    cols = ["t", "a", "y", "p_a", "p_y", "H", "P_y", "S1", "S2"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for i, t in enumerate(traj.t):
            row = [t, *traj.states[i]]
            for k in ("H", "P_y", "S1", "S2"):
                v = traj.invariants.get(k)
                row.append(v[i] if v is not None else "")
            w.writerow([repr(float(x)) if x != "" else "" for x in row])
