"""Frequency sweeps: the classic per-frequency algorithm and the parallel
sweep with a shared upper-bound record.

The parallel sweep processes ``n_r`` interleaved frequency branches in
lockstep.  Every upper bound found anywhere lowers the shared record ``k_hat``
and any subdomain whose lower bound exceeds ``k_hat / (1 + eps)`` is dropped,
whatever its frequency.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field

from .bounds import BoundsConfig, FrequencyBounds, model_for
from .errors import InputError, ZeroAtNominal
from .params import ParameterBox, UncertainPolynomial
from .region import DRegion, FrequencyGrid, make_grid
from .split import (CutScheme, Subdomain, check_depth, choose_cut_coordinate, depth_cap,
                    longest_edge_coordinate, root_subdomain, split_box)

BACKWARD = "backward"
FORWARD = "forward"
PRESENT = "present"
PRUNE_KINDS = (BACKWARD, FORWARD, PRESENT)


@dataclass(frozen=True)
class SweepConfig:
    n_r: int = 30
    n_c: int = 50
    delta_lo: float | None = None
    delta_hi: float | None = None
    eps: float = 0.01
    max_iter: int | None = None
    scheme: CutScheme = CutScheme.MAXIMAL
    bounds: BoundsConfig = field(default_factory=BoundsConfig)

    def __post_init__(self):
        if not self.eps > 0:
            raise InputError("eps must be positive")
        if self.n_r < 2 or self.n_c < 1:
            raise InputError("need n_r >= 2 and n_c >= 1")
        if self.max_iter is not None and self.max_iter < 1:
            raise InputError("max_iter must be positive")


def grids_for(region: DRegion, cfg: SweepConfig) -> list[FrequencyGrid]:
    override = cfg.delta_lo is not None or cfg.delta_hi is not None
    if override and len(region.pieces) > 1:
        raise InputError("a grid range override needs a single-piece region")
    return [make_grid(piece, cfg.n_r, cfg.n_c, cfg.delta_lo, cfg.delta_hi, piece_index=p)
            for p, piece in enumerate(region.pieces)]


def classify_prune(pruned: tuple, record: tuple) -> str:
    """``pruned`` and ``record`` are ``(piece, delta)`` keys."""
    if pruned < record:
        return BACKWARD
    if pruned > record:
        return FORWARD
    return PRESENT


@dataclass(frozen=True)
class Record:
    value: float
    freq_id: tuple
    delta: float
    stamp: tuple  # (piece, j, r)


@dataclass(frozen=True)
class PruneEvent:
    kind: str
    pruned_freq: tuple
    record_freq: tuple
    record_index: int


@dataclass
class FrequencyTrace:
    freq_id: tuple
    delta: float
    k_l_min: float = math.inf
    k_u_min: float = math.inf
    iterations: int = 0
    domains: int = 0


@dataclass(frozen=True)
class TraceRow:
    j: int
    i: int
    delta: float
    k_l: float
    k_u: float
    event: str


@dataclass
class SweepReport:
    k_hat: float
    argmin_freq: tuple | None
    argmin_delta: float | None
    per_freq: list
    records: list
    prune_counts: dict
    domains_evaluated: int
    converged: bool
    q0: tuple
    column_iterations: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    wall_time: float = 0.0
    zero_at_nominal: bool = False


class _ParallelSweep:
    def __init__(self, poly, region, root, cfg):
        self.poly = poly
        self.region = region
        self.root = root
        self.cfg = cfg
        self.bcfg = cfg.bounds
        self.k_hat = math.inf
        self.records: list[Record] = []
        self.events: list[PruneEvent] = []
        self.trace: list[TraceRow] = []
        self.domains = 0
        self.per_freq: dict[tuple, FrequencyTrace] = {}
        self.cap = depth_cap(root, self.bcfg.k_tol)
        self._tie = itertools.count()

    # -- bookkeeping
    def _row(self, point, k_l, k_u, event):
        self.trace.append(TraceRow(point.j, point.i, point.delta, k_l, k_u, event))

    def _threshold(self):
        return self.k_hat / (1.0 + self.cfg.eps)

    def _retire(self, point, k_l):
        ft = self.per_freq[point.freq_id]
        ft.k_l_min = min(ft.k_l_min, k_l)

    def _prune(self, point, sub):
        rec = self.records[-1]
        kind = classify_prune((point.piece, point.delta), (rec.freq_id[0], rec.delta))
        self.events.append(PruneEvent(kind, point.freq_id, rec.freq_id, len(self.records) - 1))
        self._row(point, sub.k_l, sub.bounds.k_u, "prune_" + kind)
        self._retire(point, sub.k_l)

    def _evaluate(self, point, model, sub) -> Subdomain:
        sub = sub.evaluated(model, self.bcfg)
        self.domains += 1
        b = sub.bounds
        ft = self.per_freq[point.freq_id]
        ft.domains += 1
        self._row(point, b.k_l, b.k_u, "split")
        if math.isfinite(b.k_u) and not b.capped:
            ft.k_u_min = min(ft.k_u_min, b.k_u)
        return sub

    def _offer(self, point, sub, stamp, column, heaps):
        """Record update then insertion / pruning of a freshly evaluated subdomain."""
        b: FrequencyBounds = sub.bounds
        if not b.capped and b.k_u < self.k_hat:
            self.k_hat = b.k_u
            self.records.append(Record(b.k_u, point.freq_id, point.delta, stamp))
            self._row(point, b.k_l, b.k_u, "record")
            self._purge_column(column, heaps)
        if not math.isfinite(b.k_l) or b.pair is None or b.pair.m <= 1:
            self._retire(point, b.k_l)
            return
        if b.k_l > self._threshold():
            self._prune(point, sub)
            return
        heapq.heappush(heaps[point.i - 1], (b.k_l, next(self._tie), sub))

    def _purge_column(self, column, heaps):
        thr = self._threshold()
        for point, heap in zip(column, heaps):
            if not heap:
                continue
            keep = []
            for item in heap:
                if item[0] > thr:
                    self._prune(point, item[2])
                else:
                    keep.append(item)
            if len(keep) != len(heap):
                heapq.heapify(keep)
                heap[:] = keep

    # -- main loop
    def run(self) -> SweepReport:
        t0 = time.perf_counter()
        converged = True
        column_iterations = []
        q0 = self.root.nominal
        half = 0.5 * self.root.widths
        for grid in grids_for(self.region, self.cfg):
            piece = self.region.pieces[grid.entries[0].piece]
            for j in range(1, grid.n_c + 1):
                column = grid.column(j)
                models = []
                for point in column:
                    self.per_freq[point.freq_id] = FrequencyTrace(point.freq_id, point.delta)
                    model = model_for(self.poly, piece.point(point.delta), self.root, q0)
                    try:
                        model.check_nominal(self.bcfg.geom_tol)
                    except ZeroAtNominal:
                        return self._zero_report(point, q0, t0, column_iterations)
                    models.append(model)
                heaps: list[list] = [[] for _ in column]
                for point, model in zip(column, models):
                    sub = self._evaluate(point, model, root_subdomain(self.root, point.freq_id))
                    self._offer(point, sub, (point.piece, j, 1), column, heaps)
                r = 1
                while any(heaps):
                    if self.cfg.max_iter is not None and r >= self.cfg.max_iter + 1:
                        converged = False
                        break
                    r += 1
                    for point, model, heap in zip(column, models, heaps):
                        if not heap:
                            continue
                        _, _, sub = heapq.heappop(heap)
                        self.per_freq[point.freq_id].iterations += 1
                        children = split_box(sub, choose_cut_coordinate(sub, self.cfg.scheme))
                        for child in children:
                            check_depth(child, self.cap)
                            child = self._evaluate(point, model, child)
                            self._offer(point, child, (point.piece, j, r), column, heaps)
                for point, heap in zip(column, heaps):
                    for item in heap:  # left over when capped by max_iter
                        self._retire(point, item[0])
                column_iterations.append(r)
        return self._report(q0, converged, column_iterations, t0)

    def _report(self, q0, converged, column_iterations, t0, zero=False) -> SweepReport:
        counts = {kind: 0 for kind in PRUNE_KINDS}
        for ev in self.events:
            counts[ev.kind] += 1
        best = self.records[-1] if self.records else None
        return SweepReport(
            k_hat=self.k_hat,
            argmin_freq=best.freq_id if best else None,
            argmin_delta=best.delta if best else None,
            per_freq=list(self.per_freq.values()),
            records=list(self.records),
            prune_counts=counts,
            domains_evaluated=self.domains,
            converged=converged,
            q0=tuple(q0),
            column_iterations=column_iterations,
            trace=list(self.trace),
            wall_time=time.perf_counter() - t0,
            zero_at_nominal=zero,
        )

    def _zero_report(self, point, q0, t0, column_iterations):
        self.k_hat = 0.0
        self.records.append(Record(0.0, point.freq_id, point.delta, (point.piece, point.j, 0)))
        self._row(point, 0.0, 0.0, "record")
        return self._report(q0, True, column_iterations, t0, zero=True)


def algorithm2(poly: UncertainPolynomial, region: DRegion, root: ParameterBox,
               cfg: SweepConfig | None = None) -> SweepReport:
    """Parallel frequency sweep; returns the margin estimate ``k_hat`` and its trace."""
    return _ParallelSweep(poly, region, root, cfg or SweepConfig()).run()


# ---------------------------------------------------------------- classic


@dataclass(frozen=True)
class ClassicFrequency:
    freq_id: tuple
    delta: float
    k_l: float
    k_u: float
    iterations: int
    domains: int
    converged: bool
    history: tuple  # ((k_l_r, k_u_r), ...) per iteration


@dataclass
class ClassicReport:
    k_tilde: float
    k_tilde_lower: float
    argmin_freq: tuple | None
    argmin_delta: float | None
    per_freq: list
    domains_evaluated: int
    converged: bool
    q0: tuple
    wall_time: float = 0.0


def classic_frequency(model, root: ParameterBox, eps_r: float, bcfg: BoundsConfig,
                      max_iter: int | None = None, freq_id=(), delta=math.nan) -> ClassicFrequency:
    """Converge ``k_l`` and ``k_u`` at one frequency by splitting every live box."""
    cap = depth_cap(root, bcfg.k_tol)
    sub = root_subdomain(root, freq_id).evaluated(model, bcfg)
    domains = 1
    b = sub.bounds
    if not math.isfinite(b.k_l):
        return ClassicFrequency(freq_id, delta, math.inf, math.inf, 1, 1, True, ((math.inf, math.inf),))
    if b.pair.m <= 1:
        return ClassicFrequency(freq_id, delta, b.k_l, b.k_l, 1, 1, True, ((b.k_l, b.k_l),))
    live = [sub]
    settled: list[float] = []
    k_u_r = b.k_u
    r = 1
    history = [(b.k_l, k_u_r)]
    converged = True
    while True:
        lows = [s.k_l for s in live] + settled
        k_l_r = min(lows) if lows else math.inf
        if not math.isfinite(k_l_r) or (k_u_r - k_l_r) / k_l_r < eps_r:
            break
        if max_iter is not None and r >= max_iter:
            converged = False
            break
        r += 1
        children = []
        for s in live:
            for child in split_box(s, longest_edge_coordinate(s.box, root)):
                check_depth(child, cap)
                child = child.evaluated(model, bcfg)
                domains += 1
                children.append(child)
        k_u_r = min([k_u_r] + [c.bounds.k_u for c in children])
        live = []
        for c in children:
            cb = c.bounds
            if not math.isfinite(cb.k_l) or cb.k_l > k_u_r:
                continue
            if cb.pair.m <= 1:
                settled.append(cb.k_l)
            else:
                live.append(c)
        settled = [v for v in settled if v <= k_u_r]
        lows = [s.k_l for s in live] + settled
        history.append((min(lows) if lows else math.inf, k_u_r))
    lows = [s.k_l for s in live] + settled
    k_l_final = min(lows) if lows else math.inf
    k_u_final = k_u_r if k_u_r < bcfg.k_cap else math.inf
    if not math.isfinite(k_l_final):
        k_u_final = math.inf
    return ClassicFrequency(freq_id, delta, k_l_final, k_u_final, r, domains, converged, tuple(history))


def algorithm1(poly: UncertainPolynomial, region: DRegion, root: ParameterBox, eps_r: float = 0.01,
               cfg: SweepConfig | None = None, max_iter: int | None = None) -> ClassicReport:
    """Per-frequency branch and bound on the same grid as :func:`algorithm2`."""
    cfg = cfg or SweepConfig()
    t0 = time.perf_counter()
    per_freq = []
    q0 = root.nominal
    for grid in grids_for(region, cfg):
        piece = region.pieces[grid.entries[0].piece]
        for point in sorted(grid.entries, key=lambda e: e.delta):
            model = model_for(poly, piece.point(point.delta), root, q0)
            try:
                model.check_nominal(cfg.bounds.geom_tol)
            except ZeroAtNominal:
                per_freq.append(ClassicFrequency(point.freq_id, point.delta, 0.0, 0.0, 0, 0, True, ()))
                continue
            per_freq.append(classic_frequency(model, root, eps_r, cfg.bounds, max_iter,
                                              point.freq_id, point.delta))
    best = min(per_freq, key=lambda f: (f.k_u, f.delta)) if per_freq else None
    k_tilde = best.k_u if best else math.inf
    return ClassicReport(
        k_tilde=k_tilde,
        k_tilde_lower=min((f.k_l for f in per_freq), default=math.inf),
        argmin_freq=best.freq_id if best and math.isfinite(k_tilde) else None,
        argmin_delta=best.delta if best and math.isfinite(k_tilde) else None,
        per_freq=per_freq,
        domains_evaluated=sum(f.domains for f in per_freq),
        converged=all(f.converged for f in per_freq),
        q0=tuple(q0),
        wall_time=time.perf_counter() - t0,
    )


@dataclass
class Comparison:
    parallel: SweepReport
    classic: ClassicReport

    @property
    def ratio(self) -> float:
        return self.parallel.domains_evaluated / max(self.classic.domains_evaluated, 1)

    @property
    def speedup(self) -> float:
        return self.classic.wall_time / max(self.parallel.wall_time, 1e-12)

    @property
    def relative_gap(self) -> float:
        k = self.classic.k_tilde
        return (self.parallel.k_hat - k) / k if math.isfinite(k) and k > 0 else math.nan


def compare(poly, region, root, cfg: SweepConfig | None = None, eps_r: float | None = None,
            max_iter: int | None = None) -> Comparison:
    cfg = cfg or SweepConfig()
    par = algorithm2(poly, region, root, cfg)
    cla = algorithm1(poly, region, root, cfg.eps if eps_r is None else eps_r, cfg, max_iter)
    return Comparison(par, cla)
