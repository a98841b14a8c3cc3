"""End-to-end experiment: assumptions -> graph -> c, barrier, Aubry -> Mather ->
u^lam -> occupation diagnostics -> three limit routes -> convergence table.

Every stage appends a :class:`StageRecord`; a failed assertion marks the record
and the run continues where later stages still make sense.  Outputs are
written as CSV/JSON with no timestamps so identical configs give identical
files.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from . import oracles
from .bellman import check_contraction, solve_discounted
from .config import ExperimentConfig
from .critical import compute_barrier, critical_value
from .errors import RefinementNotDecreasing, WeakKAMError
from .limit import (
    constants_are_subsolutions,
    critical_residual,
    limit_by_barrier,
    limit_by_subsolution_sup_all,
    limit_special_case,
    verify_convergence,
)
from .mather import action, extreme_mather_measures, mather_lp_certificate
from .model import apriori_constants, verify_assumptions
from .occupation import check_selection_inequality, weak_convergence_diagnostics
from .reference import mechanical_reference
from .scheme import DiscreteScheme, build_graph


@dataclass
class StageRecord:
    stage: str
    passed: bool
    detail: str = ""
    data: dict = field(default_factory=dict)


@dataclass
class RunReport:
    name: str
    records: list[StageRecord] = field(default_factory=list)
    results: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def add(self, stage: str, passed: bool, detail: str = "", **data) -> StageRecord:
        rec = StageRecord(stage, bool(passed), detail, _jsonable(data))
        self.records.append(rec)
        return rec

    def failures(self) -> list[StageRecord]:
        return [r for r in self.records if not r.passed]

    def to_json(self) -> str:
        return json.dumps({"name": self.name, "passed": self.passed,
                           "stages": [asdict(r) for r in self.records]}, indent=2, sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def _subsolution_nodes(text: str, N: int) -> list[int]:
    text = text.strip().lower()
    if text == "none":
        return []
    if text == "all":
        return list(range(N))
    if text == "sample":
        return sorted({(k * N) // 8 for k in range(8)} | {N // 2})
    return sorted({int(t) % N for t in text.split(",") if t.strip()})


def run_pipeline(cfg: ExperimentConfig, out_dir: str | None = None, oracle: bool | None = None) -> RunReport:
    rs = cfg.run
    report = RunReport(cfg.name)
    model, scheme = cfg.model, cfg.scheme
    use_oracle = rs.oracle if oracle is None else oracle

    # -- assumptions ---------------------------------------------------------
    assumptions = verify_assumptions(model)
    for name, chk in assumptions.checks.items():
        report.add(f"assumption.{name}", chk.passed, chk.detail, worst=chk.worst)
    if not assumptions.passed:
        _write(report, out_dir)
        return report

    # -- graph and critical quantities -----------------------------------------
    graph = build_graph(model, scheme)
    try:
        check_contraction(graph, max(rs.lambdas))
        report.add("graph", True, f"N={scheme.N} tau={scheme.tau:.6g} W={scheme.W}", n_edges=graph.n_edges,
                   backend=_kernels.BACKEND, B=graph.lu0_bounds[1], B1=graph.lu0_bounds[0])
    except WeakKAMError as exc:
        report.add("graph", False, str(exc))
        _write(report, out_dir)
        return report

    c = critical_value(graph)
    ok = cfg.expect.c is None or abs(c - cfg.expect.c) <= cfg.expect.c_tol
    report.add("critical_value", ok, f"c={c:.17g}", c=c, expected=cfg.expect.c)

    try:
        barrier = compute_barrier(graph, c)
    except WeakKAMError as exc:
        report.add("barrier", False, str(exc))
        _write(report, out_dir)
        return report
    A = barrier.A
    ok = np.array_equal(A, barrier.diagonal_aubry) and bool(np.all(np.diag(barrier.h) >= -barrier.tol_A))
    if cfg.expect.aubry_size is not None:
        ok = ok and A.size == cfg.expect.aubry_size
    report.add("barrier", ok, f"|A|={A.size}", aubry=A, diagonal_aubry=barrier.diagonal_aubry)

    try:
        measures = extreme_mather_measures(graph, c, barrier, cap=rs.cycle_cap)
    except WeakKAMError as exc:
        report.add("mather", False, str(exc))
        _write(report, out_dir, graph=graph, barrier=barrier)
        return report
    gaps = [abs(action(mu) + c) for mu in measures]
    closed = [mu.closedness_residual for mu in measures]
    ok = max(gaps) <= barrier.tol_A / graph.tau and max(closed) <= 1e-10
    if cfg.expect.n_measures is not None:
        ok = ok and len(measures) == cfg.expect.n_measures
    report.add("mather", ok, f"{len(measures)} extreme measures", cycles=[list(mu.cycle) for mu in measures],
               action_gaps=gaps, closedness=closed)

    lp_value, _ = mather_lp_certificate(graph)
    lp_gap = abs(lp_value / graph.tau + c)
    report.add("mather_lp", lp_gap <= rs.lp_tol * scheme.N, f"|LP/tau + c| = {lp_gap:.3e}", value=lp_value)

    consts = apriori_constants(model, scheme, c, barrier.critical_solution())
    ok = max(rs.lambdas) < consts.alpha0
    report.add("apriori", ok, f"alpha0={consts.alpha0:.6g}", **consts.as_dict(),
               window=scheme.max_speed, window_covers_sigma0=scheme.max_speed >= consts.sigma0)

    # -- limit routes -----------------------------------------------------------
    u0 = limit_by_barrier(barrier.h, measures)
    res0 = critical_residual(graph, u0.values, c)
    report.add("limit.barrier", res0 <= 10 * rs.tol, f"critical residual {res0:.3e}", selected=u0.meta["selected"])

    monotone_model = constants_are_subsolutions(graph, c, rs.tol)
    special = None
    if monotone_model:
        special = limit_special_case(barrier.h, A, graph, c, rs.tol)
        diff = float(np.max(np.abs(special.values - u0.values)))
        report.add("limit.special", diff <= rs.route_tol, f"max |special - barrier| = {diff:.3e}")

    nodes = _subsolution_nodes(rs.subsolution_nodes, scheme.N)
    sub = None
    if nodes:
        try:
            sub = limit_by_subsolution_sup_all(graph, measures, c, nodes=nodes)
            diff = float(np.max(np.abs(sub[nodes] - u0.values[nodes])))
            report.add("limit.subsolution", diff <= rs.route_tol + rs.lp_tol,
                       f"max |LP - barrier| = {diff:.3e} over {len(nodes)} nodes", nodes=nodes)
        except WeakKAMError as exc:
            report.add("limit.subsolution", False, str(exc))

    sel = check_selection_inequality(u0, measures, tol=rs.selection_tol)
    report.add("selection", sel.passed, f"min int L_u u0 dmu = {sel.value:.3e}", values=sel.values)

    # -- vanishing discount -----------------------------------------------------
    table = verify_convergence(graph, rs.lambdas, u0, c, eps_conv=rs.eps_conv, tol=rs.tol,
                               alpha0=consts.alpha0, raise_on_failure=False)
    report.add("convergence", table.passed, "; ".join(table.messages) or "ok",
               errors=table.errors)
    if monotone_model:
        sols = np.array([u.values for u in table.solutions])
        lower = float(sols.min())
        rises = float(np.max(sols[:-1] - sols[1:])) if len(sols) > 1 else 0.0
        report.add("monotone", lower >= -rs.tol and rises <= rs.tol,
                   f"min u = {lower:.3e}, max decrease as lambda falls = {rises:.3e}")

    x_diag = scheme.N // 2 if rs.diagnostic_node is None else rs.diagnostic_node % scheme.N
    diag = weak_convergence_diagnostics(graph, c, measures, x_diag, rs.lambdas,
                                        solutions=dict(zip(rs.lambdas, table.solutions)),
                                        eps_tail=rs.eps_tail, tol=rs.tol)
    last = diag.rows[-1]
    norm_err = max(abs(mu.normalization_identity + 1.0) for mu in diag.measures)
    ok = (last.action_gap <= rs.gap_tol and last.closedness_residual <= 10 * rs.lambdas[-1]
          and last.tv_to_mather_hull <= rs.tv_tol and norm_err <= rs.eps_tail + 1e-9)
    report.add("occupation", ok,
               f"x={x_diag}: gap={last.action_gap:.3e} closed={last.closedness_residual:.3e} "
               f"tv={last.tv_to_mather_hull:.3e}", non_monotone=diag.non_monotone,
               normalization_error=norm_err, hull_weights=diag.alphas[-1])

    if use_oracle:
        _oracle_stage(report, cfg, rs)

    report.results.update(graph=graph, barrier=barrier, measures=measures, u0=u0, special=special,
                          subsolution=sub, table=table, diagnostics=diag, constants=consts)
    _write(report, out_dir, graph=graph, barrier=barrier, measures=measures, u0=u0,
           table=table, diag=diag, sub=sub, consts=consts)
    return report


def _oracle_stage(report: RunReport, cfg: ExperimentConfig, rs) -> None:
    """Same model on an rs.oracle_n-point grid against the brute-force references."""
    N = rs.oracle_n
    W = min(2, (N - 1) // 2)
    small = build_graph(cfg.model, DiscreteScheme(N, W=W))
    C = oracles.cost_matrix(cfg.model, N, small.tau, W)
    c = critical_value(small)
    errs = {"critical_value": abs(oracles.min_mean_cycle_by_powers(C) / small.tau + c) * small.tau}
    b = compute_barrier(small, c)
    errs["barrier"] = float(np.max(np.abs(oracles.liminf_barrier(C, small.tau, c) - b.h)))
    lam = rs.lambdas[0]
    u = solve_discounted(small, lam, c, tol=1e-12)
    errs["discounted"] = float(np.max(np.abs(oracles.discounted_fixed_point(cfg.model, N, small.tau, W, lam, c) - u.values)))
    _, cycles = oracles.mather_vertices(C)
    found = [mu.cycle for mu in extreme_mather_measures(small, c, b)]
    errs["mather_vertices"] = 0.0 if found == cycles else 1.0
    ok = all(v <= 1e-8 for v in errs.values())
    report.add("oracle", ok, f"N={N} W={W}", **errs)


def _write(report: RunReport, out_dir, graph=None, barrier=None, measures=None, u0=None, table=None,
           diag=None, sub=None, consts=None) -> None:
    if out_dir is None:
        return
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        fh.write(report.to_json() + "\n")
    if barrier is not None:
        barrier.to_csv(os.path.join(out_dir, "critical"))
    if measures is not None:
        for k, mu in enumerate(measures):
            mu.to_csv(os.path.join(out_dir, f"mather_{k}.csv"))
    if u0 is not None:
        u0.to_csv(os.path.join(out_dir, "u0.csv"))
    if table is not None:
        table.to_csv(os.path.join(out_dir, "convergence.csv"))
        for k, u in enumerate(table.solutions):
            u.to_csv(os.path.join(out_dir, f"u_lambda_{k}.csv"))
    if diag is not None:
        diag.to_csv(os.path.join(out_dir, "diagnostics.csv"))
    if sub is not None:
        with open(os.path.join(out_dir, "u0_subsolution.csv"), "w") as fh:
            fh.write("i,u0\n")
            for i, v in enumerate(sub):
                if not np.isnan(v):
                    fh.write(f"{i},{v:.17g}\n")
    if consts is not None:
        with open(os.path.join(out_dir, "constants.json"), "w") as fh:
            json.dump(_jsonable(consts.as_dict()), fh, indent=2, sort_keys=True)
            fh.write("\n")


# ---------------------------------------------------------------------------
# refinement study
# ---------------------------------------------------------------------------


@dataclass
class RefinementRow:
    N: int
    tau: float
    W: int
    c_error: float
    barrier_error: float
    limit_error: float


@dataclass
class RefinementReport:
    rows: list[RefinementRow]
    reference: str
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("N,tau,W,c_error,barrier_error,limit_error\n")
            for r in self.rows:
                fh.write(f"{r.N},{r.tau:.17g},{r.W},{r.c_error:.17g},{r.barrier_error:.17g},{r.limit_error:.17g}\n")


def refinement_schemes(base: DiscreteScheme, levels: int) -> list[DiscreteScheme]:
    """Level l: N 2^l points, tau / 2^(l/2), window ceil(W 2^(l/2)).

    Halving only the mesh (tau = 1/N) keeps the velocity set {k / (N tau)} fixed
    and the barrier error stalls at the velocity-quantization floor; shrinking
    tau like sqrt(1/N) refines positions and velocities together.
    """
    out = []
    for l in range(levels):
        f = 2.0 ** (0.5 * l)
        out.append(DiscreteScheme(base.N * 2 ** l, base.tau / f, int(math.ceil(base.W * f - 1e-9))))
    return out


def _level_errors(cfg: ExperimentConfig, scheme: DiscreteScheme, ref):
    graph = build_graph(cfg.model, scheme)
    c = critical_value(graph)
    barrier = compute_barrier(graph, c)
    measures = extreme_mather_measures(graph, c, barrier, cap=cfg.run.cycle_cap)
    u0 = limit_by_barrier(barrier.h, measures).values
    xs = scheme.positions
    if ref is None:
        return c, barrier, u0, None
    if ref.degenerate:
        h_err = float(np.max(np.abs(barrier.h[barrier.A[0]])))
        return c, barrier, u0, (abs(c - ref.c), h_err, float(np.max(np.abs(u0))))
    y = ref.aubry[0]
    y0 = scheme.node_of(y)
    h_err = float(np.max(np.abs(barrier.h[y0] - ref.barrier(cfg.model, y, xs))))
    u_err = float(np.max(np.abs(u0 - ref.limit(cfg.model, xs))))
    return c, barrier, u0, (abs(c - ref.c), h_err, u_err)


def refine(cfg: ExperimentConfig, levels: int, raise_on_failure: bool = True) -> RefinementReport:
    """Errors of c, h(y0, .) and u^0 on successively refined grids.

    References are the continuum closed forms for mechanical models (always
    available for the built-in families).  Each error column must strictly
    decrease from level to level unless it is already at rounding level.
    """
    if levels < 2:
        raise ValueError("refine needs at least 2 levels")
    ref = mechanical_reference(cfg.model)
    rows = []
    for scheme in refinement_schemes(cfg.scheme, levels):
        _, _, _, errs = _level_errors(cfg, scheme, ref)
        rows.append(RefinementRow(scheme.N, scheme.tau, scheme.W, *errs))
    rep = RefinementReport(rows, "closed form")
    floor = 1e-12
    for name in ("c_error", "barrier_error", "limit_error"):
        col = [getattr(r, name) for r in rows]
        if any(b >= a and b > floor for a, b in zip(col, col[1:])):
            rep.failures.append(name)
    if rep.failures and raise_on_failure:
        name = rep.failures[0]
        raise RefinementNotDecreasing(name, [getattr(r, name) for r in rows])
    return rep
