"""Command-line scenario runner.

Usage::

    weakvalues run CONFIG.json [--out PREFIX] [--seed N] [--parallel]
    weakvalues verify-all [--out PREFIX] [--seed N]

A config is JSON with ``schema_version`` 1, a ``seed`` and either one
scenario (``kind`` plus ``params``) or a ``scenarios`` list.  Each scenario
writes ``PREFIX.NAME.csv`` (and sometimes extra CSVs) and the run writes
``PREFIX.summary.json``.  Without ``--out`` or an ``output`` field the prefix is
``$WEAKVALUES_OUT/<config stem>`` (default directory ``weakvalues_out``).

Exit codes: 0 success, 2 config error, 3 numeric or scenario error,
4 a scenario invariant or acceptance criterion failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import cqed, genmeas, hjac, quasiprob, verification, vonneumann, weakval
from .errors import PostselectionImpossible, WeakValueError
from .io import dumps, write_csv, write_json
from .qcore import Observable, random_hermitian, random_ket, sigma_z
from .rng import make_rng

SCHEMA_VERSION = 1
OUT_ENV = "WEAKVALUES_OUT"
DEFAULT_OUT_DIR = "weakvalues_out"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4


class ConfigError(Exception):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True, frozen=True)


PosFloat = Annotated[float, Field(gt=0, allow_inf_nan=False)]
Finite = Annotated[float, Field(allow_inf_nan=False)]
GridSize = Annotated[int, Field(ge=16, le=4096)]


class Fig1Params(_Strict):
    omega: PosFloat = 1.0
    horizon: PosFloat = 2.0
    n_samples: Annotated[int, Field(ge=2, le=1_000_000)] = 1000

    @model_validator(mode="after")
    def _nonzero_amplitude(self):
        if abs(np.sin(self.omega * self.horizon)) < 1e-8:
            raise ValueError("sin(omega * horizon) vanishes: postselection impossible")
        return self


class AavParams(_Strict):
    target: Finite = 100.0
    g_values: Annotated[list[PosFloat], Field(min_length=1)] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5]
    sigma: PosFloat = 1.0
    n: GridSize = 256
    span: Optional[PosFloat] = None
    n_events: Annotated[int, Field(ge=0, le=10_000_000)] = 0


class PointerParams(_Strict):
    target: Finite = 3.0
    sigma: PosFloat = 1.0
    g_min: PosFloat = 1e-3
    g_max: PosFloat = 1e-1
    n_g: Annotated[int, Field(ge=2, le=100)] = 7

    @model_validator(mode="after")
    def _ordered(self):
        if self.g_min >= self.g_max:
            raise ValueError("g_min must be below g_max")
        return self


class GenmeasParams(_Strict):
    model: Literal["gaussian", "qubit", "two_outcome"] = "gaussian"
    g: Annotated[float, Field(gt=0, le=1.0)] = 0.1
    target: Finite = 3.0
    n_events: Annotated[int, Field(ge=1, le=10_000_000)] = 100_000


class QuasiprobParams(_Strict):
    n_scenarios: Annotated[int, Field(ge=1, le=1_000_000)] = 1000
    dim: Annotated[int, Field(ge=2, le=16)] = 2


class WignerParams(_Strict):
    state: Literal["gaussian", "boosted", "cat", "hermite1"] = "cat"
    n: Annotated[int, Field(ge=16, le=1024)] = 512
    span: PosFloat = 40.0
    write_grid: bool = False


class CqedParams(_Strict):
    omega_q: Finite = 5.0
    omega_r: PosFloat = 2 * np.pi
    chi: Finite = 0.05
    kappa: Annotated[float, Field(ge=0, allow_inf_nan=False)] = 1.0
    epsilon: Finite = 0.5
    delta: Finite = 0.0
    fock_cutoff: Annotated[int, Field(ge=2, le=400)] = 60
    alpha: Annotated[float, Field(ge=0, allow_inf_nan=False)] = 3.0
    periods: PosFloat = 10.0
    n_t: Annotated[int, Field(ge=2, le=100_000)] = 201

    @model_validator(mode="after")
    def _guard(self):
        a = self.alpha
        if not a * a + 5 * a + 10 < self.fock_cutoff:
            raise ValueError("fock_cutoff too small for alpha (need alpha^2 + 5 alpha + 10 < N)")
        if self.kappa == 0 and self.epsilon != 0:
            raise ValueError("a drive without damping has no steady state")
        return self


class HjacParams(_Strict):
    n: GridSize = 256
    span: PosFloat = 24.0
    dt: PosFloat = 0.01
    steps: Annotated[int, Field(ge=1, le=1_000_000)] = 200
    every: Annotated[int, Field(ge=1)] = 20
    potential: Literal["harmonic", "free"] = "harmonic"
    omega: PosFloat = 1.0
    x0: Finite = 2.0
    sigma: PosFloat = 0.9
    k0: Finite = 0.5

    @model_validator(mode="after")
    def _grid(self):
        if self.n & (self.n - 1):
            raise ValueError("n must be a power of two")
        return self


class VerifyParams(_Strict):
    criteria: Optional[list[Annotated[int, Field(ge=1, le=12)]]] = None
    include_determinism: bool = True


def _scenario(kind: str, params_cls):
    return type(
        f"{kind.title().replace('-', '')}Scenario",
        (_Strict,),
        {
            "__annotations__": {"kind": Literal[kind], "name": Optional[str], "params": params_cls},
            "name": None,
            "params": Field(default_factory=params_cls),
        },
    )


PARAMS = {
    "fig1": Fig1Params, "aav": AavParams, "pointer": PointerParams, "genmeas": GenmeasParams,
    "quasiprob": QuasiprobParams, "wigner": WignerParams, "cqed": CqedParams, "hjac": HjacParams,
    "verify-all": VerifyParams,
}
SCENARIO_MODELS = {k: _scenario(k, v) for k, v in PARAMS.items()}
AnyScenario = Annotated[Union[tuple(SCENARIO_MODELS.values())], Field(discriminator="kind")]


class RunConfig(_Strict):
    schema_version: Literal[1]
    seed: Annotated[int, Field(ge=0, lt=2**63)] = 0
    output: Optional[str] = None
    scenarios: Annotated[list[AnyScenario], Field(min_length=1)]

    @model_validator(mode="before")
    @classmethod
    def _single(cls, data: Any):
        if isinstance(data, dict) and "kind" in data:
            data = dict(data)
            one = {k: data.pop(k) for k in ("kind", "params", "name") if k in data}
            if "scenarios" in data:
                raise ValueError("give either 'kind' or 'scenarios', not both")
            data["scenarios"] = [one]
        return data


def parse_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return parse_config(data)


def derived_seed(seed: int, index: int) -> int:
    """Per-scenario seed independent of execution order."""
    return int(np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1, dtype=np.uint64)[0] >> 1)


# -- scenario runners --------------------------------------------------------
# Each returns (tables, derived, invariants); tables maps a file suffix to (header, rows).

def _run_fig1(p: Fig1Params, seed: int):
    tr = verification.fig1_trace(p.omega, p.horizon, p.n_samples)
    closed = weakval.rabi_closed_form(p.omega, p.horizon, tr.times)
    rows = [(t, v.real, e, int(a)) for t, v, e, a in zip(tr.times, tr.values, tr.expectation, tr.anomalous)]
    err = float(np.max(np.abs(tr.values - closed)))
    derived = {
        "closed_form_max_err": err,
        "max_abs_Zw": float(np.max(np.abs(tr.values))),
        "max_abs_imag": float(np.max(np.abs(tr.values.imag))),
        "anomalous_samples": int(tr.anomalous.sum()),
        "Zw_start": tr.values[0].real, "Zw_end": tr.values[-1].real,
    }
    inv = {
        "endpoints_are_plus_minus_one": bool(abs(tr.values[0] - 1) < 1e-12 and abs(tr.values[-1] + 1) < 1e-12),
        "matches_closed_form": err < 1e-12,
    }
    return {"": (["t", "Z_w", "Z_expect", "anomaly_flag"], rows)}, derived, inv


def _run_aav(p: AavParams, seed: int):
    rows = []
    last = None
    for g in p.g_values:
        sc = vonneumann.aav_scenario(p.target, g, p.sigma, p.n, p.span)
        aw = vonneumann.system_weak_value(sc)
        val = vonneumann.conditioned_pointer_average(sc)
        strength = g * verification.rms_detector_weak_value(sc.pointer) * abs(aw)
        rows.append((g, val, aw.real, strength, int(strength < 1e-2)))
        last = (sc, val)
    sc, val = last
    derived = {"final_conditioned_average": val, "final_relative_error": abs(val - p.target) / abs(p.target)}
    inv = {"last_row_within_5_percent": derived["final_relative_error"] < 0.05}
    if p.n_events:
        ks = genmeas.kraus_from_coupling(sc)
        cv = genmeas.ContextualValues(sc.pointer.alpha, sc.observable, 0.0)
        f = sc.final
        ev = genmeas.sample_events(ks, cv, sc.initial, [f, np.array([-np.conj(f[1]), np.conj(f[0])])],
                                   p.n_events, seed)
        mc, se = float(ev.means[0]), float(ev.stderr[0])
        derived.update(mc_mean=mc, mc_stderr=se, mc_postselected=int(ev.counts[0]))
        if np.isfinite(se) and se > 0:
            derived["mc_z"] = abs(mc - val) / se
            inv["mc_within_3_stderr"] = derived["mc_z"] < 3
    header = ["g", "conditioned_average", "re_weak_value", "g_Fw_Aw", "weak_regime"]
    return {"": (header, rows)}, derived, inv


def _run_pointer(p: PointerParams, seed: int):
    gs = np.logspace(np.log10(p.g_min), np.log10(p.g_max), p.n_g)
    i, f = weakval.aav_states(p.target)
    r1, r2 = verification.truncation_residuals(i, f, sigma_z(), gs, p.sigma)
    s1, s2 = verification.loglog_slope(gs, r1), verification.loglog_slope(gs, r2)
    derived = {"first_order_slope": s1, "second_order_slope": s2}
    inv = {"first_order_slope_3": abs(s1 - 3) <= 0.3, "second_order_slope_3": abs(s2 - 3) <= 0.3}
    rows = list(zip(gs, r1, r2))
    return {"": (["g", "residual_first_order", "residual_second_order"], rows)}, derived, inv


def _genmeas_model(p: GenmeasParams):
    for name, ks, cv in verification.measurement_models(p.g):
        if name.startswith(p.model):
            return ks, cv
    raise ValueError(p.model)


def _run_genmeas(p: GenmeasParams, seed: int):
    ks, cv = _genmeas_model(p)
    i, f = weakval.aav_states(p.target)
    f_perp = np.array([-np.conj(f[1]), np.conj(f[0])])
    rep = genmeas.conditioned_average(ks, cv, i, f)
    table = ks.joint_probabilities(i, [f, f_perp])
    ev = genmeas.sample_events(ks, cv, i, [f, f_perp], p.n_events, seed)
    pf = table.sum(axis=0)
    cond = (cv.values @ table) / pf
    uncond = float(cv.values @ table.sum(axis=1))
    derived = dict(rep.as_dict())
    derived.update(completeness_err=ks.completeness_error(), contextual_residual=cv.residual,
                   unconditioned=uncond, mc_means=list(ev.means), mc_stderr=list(ev.stderr),
                   mc_counts=list(ev.counts))
    z = abs(ev.means[0] - rep.value) / ev.stderr[0] if ev.counts[0] > 1 else float("nan")
    derived["mc_z"] = float(z)
    inv = {
        "decomposition_identity": abs(rep.value - rep.decomposed) < 1e-12 * max(1.0, abs(rep.value)),
        "povm_complete": ks.completeness_error() < 1e-10,
        "partition": abs(float(pf @ cond) - uncond) < 1e-10 * max(1.0, abs(uncond)),
        "mc_within_5_stderr": bool(np.isfinite(z) and z < 5),
    }
    outcomes = [(lab, a, table[k, 0], table[k, 1]) for k, (lab, a) in enumerate(zip(ks.labels, cv.values))]
    events = list(ev.rows())
    return {
        "": (["label", "alpha", "p_joint_f", "p_joint_f_perp"], outcomes),
        "events": (["event", "label", "f_index", "alpha"], events),
    }, derived, inv


def _run_quasiprob(p: QuasiprobParams, seed: int):
    rng = make_rng(seed)
    rows, counter, anomalies, skipped, sum_err = [], 0, 0, 0, 0.0
    for k in range(p.n_scenarios):
        i, f = random_ket(p.dim, rng), random_ket(p.dim, rng)
        A = Observable(random_hermitian(p.dim, rng))
        try:
            q = quasiprob.conditional_tmh(i, f, A)
        except PostselectionImpossible:
            skipped += 1
            continue
        aw = complex(f.conj() @ A.matrix @ i / (f.conj() @ i))
        scale = max(1.0, abs(aw))
        sum_err = max(sum_err, abs(q.sum() - 1) / scale)
        lo, hi = A.eigenvalues.min(), A.eigenvalues.max()
        anomalous = aw.real > hi + 1e-12 * scale or aw.real < lo - 1e-12 * scale
        qmin, negsum = quasiprob.negativity(q)
        anomalies += anomalous
        counter += anomalous and qmin >= 0
        rows.append((k, aw.real, aw.imag, qmin, negsum, int(anomalous)))
    derived = {"anomalies": anomalies, "counterexamples": counter, "skipped": skipped, "tmh_sum_err": sum_err}
    inv = {"anomaly_implies_negativity": counter == 0, "tmh_sums_to_one": sum_err < 1e-12}
    header = ["scenario", "re_weak_value", "im_weak_value", "min_quasiprob", "negativity", "anomalous"]
    return {"": (header, rows)}, derived, inv


def _run_wigner(p: WignerParams, seed: int):
    wf = verification.wigner_test_states(p.n, p.span)[p.state]
    W = quasiprob.wigner_transform(wf)
    lm = quasiprob.wigner_local_momentum(W, wf)
    ref = hjac.local_momentum(wf).real
    m = np.isfinite(lm) & np.isfinite(ref)
    err = float(np.max(np.abs(lm[m] - ref[m])))
    marg = W.x_marginal()
    wmin, negvol = W.negativity()
    derived = {"identity_max_err": err, "total": W.total(), "min_W": wmin, "negative_volume": negvol,
               "marginal_max_err": float(np.max(np.abs(marg - wf.rho)))}
    inv = {"local_momentum_identity": err < 1e-6, "normalized": abs(W.total() - 1) < 1e-10,
           "position_marginal": derived["marginal_max_err"] < 1e-10}
    rows = list(zip(wf.x, wf.rho, marg, lm, ref))
    tables = {"": (["x", "rho", "x_marginal", "p_local_phase_space", "p_local_spectral"], rows)}
    if p.write_grid:
        grid = [(x, pp, W.values[a, b]) for a, x in enumerate(W.x) for b, pp in enumerate(W.p)]
        tables["grid"] = (["x", "p", "W"], grid)
    return tables, derived, inv


def _run_cqed(p: CqedParams, seed: int):
    model = cqed.DispersiveModel(p.omega_q, p.omega_r, p.chi, p.kappa, p.epsilon, p.delta, p.fock_cutoff)
    t, ode, ref, trace = verification.closed_system_comparison(model, p.alpha, p.periods, p.n_t)
    rep = cqed.stark_and_dephasing(model)
    err = float(np.max(np.abs(ode - ref)))
    derived = {"steady_state": rep.as_dict(), "ode_vs_fock_max_err": err, "log_law_err": trace.log_law_error,
               "trace_frame": trace.frame}
    inv = {"ode_matches_fock": err < 1e-6, "fixed_point": rep.fixed_point_residual < 1e-12,
           "log_derivative_law": trace.log_law_error < 1e-6}
    rows = [(s, r.real, r.imag, n.real, n.imag, q.real, q.imag, trace.frame)
            for s, r, n, q in zip(t, ode, trace.n_w, ref)]
    header = ["t", "rho01_re", "rho01_im", "n_w_re", "n_w_im", "rho01_fock_re", "rho01_fock_im", "frame"]
    return {"": (header, rows)}, derived, inv


def _hjac_setup(p: HjacParams, n: int):
    x = hjac.uniform_grid(n, p.span)
    V = 0.5 * p.omega**2 * x**2 if p.potential == "harmonic" else np.zeros(n)
    return hjac.gaussian_packet(x, p.x0, p.sigma, p.k0), V


def _run_hjac(p: HjacParams, seed: int):
    wf, V = _hjac_setup(p, p.n)
    rows = []
    cur = wf
    done = 0
    while True:
        nxt = hjac.evolve(cur, V, p.dt, 1)
        r = hjac.residuals(cur, nxt, V, p.dt, verification.HJ_RESIDUAL_FLOOR)
        rows.append((done, done * p.dt, r.continuity_l2, r.hj_l2))
        if done + p.every > p.steps:
            break
        cur = hjac.evolve(cur, V, p.dt, p.every)
        done += p.every
    fine_wf, fine_V = _hjac_setup(p, 2 * p.n)
    fine_wf = hjac.evolve(fine_wf, fine_V, p.dt / 2, 2 * done)
    fine = hjac.residuals(fine_wf, hjac.evolve(fine_wf, fine_V, p.dt / 2, 1), fine_V, p.dt / 2,
                          verification.HJ_RESIDUAL_FLOOR)
    coarse = rows[-1]
    gap = verification.quantum_potential_route_gap(cur)
    fp = hjac.momentum_field(cur)
    derived = {"final_time": done * p.dt, "norm_drift": abs(cur.norm() - wf.norm()), "Q_route_gap": gap,
               "continuity_refinement_ratio": coarse[2] / fine.continuity_l2,
               "hj_refinement_ratio": coarse[3] / fine.hj_l2}
    inv = {"Q_routes_agree": gap < 1e-6, "norm_conserved": derived["norm_drift"] < 1e-12,
           "continuity_refinement": derived["continuity_refinement_ratio"] >= 3.5,
           "hj_refinement": derived["hj_refinement_ratio"] >= 3.5}
    fields = list(zip(fp.x, fp.rho, fp.p_bohm, fp.p_osmotic, fp.Q, fp.weak_var / (2 * cur.mass)))
    return {
        "": (["step", "t", "continuity_l2", "hj_l2"], rows),
        "fields": (["x", "rho", "p_bohm", "p_osmotic", "Q_density", "Q_weak_variance"], fields),
    }, derived, inv


def _run_verify(p: VerifyParams, seed: int):
    results = verification.run_all(p.criteria, p.include_determinism)
    derived = {"criteria": [r.as_dict() for r in results]}
    inv = {f"criterion_{r.cid}": r.passed for r in results}
    rows = [(r.cid, r.title, int(r.passed)) for r in results]
    return {"": (["criterion", "title", "passed"], rows)}, derived, inv


RUNNERS = {
    "fig1": _run_fig1, "aav": _run_aav, "pointer": _run_pointer, "genmeas": _run_genmeas,
    "quasiprob": _run_quasiprob, "wigner": _run_wigner, "cqed": _run_cqed, "hjac": _run_hjac,
    "verify-all": _run_verify,
}


def _execute(job: tuple[str, dict, int]):
    kind, params, seed = job
    p = PARAMS[kind].model_validate(params)
    try:
        tables, derived, inv = RUNNERS[kind](p, seed)
    except (WeakValueError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        return {"error": type(exc).__name__, "message": str(exc)}
    return {"tables": tables, "derived": derived, "invariants": inv}


def _names(cfg: RunConfig) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for sc in cfg.scenarios:
        base = sc.name or sc.kind
        seen[base] = seen.get(base, 0) + 1
        out.append(base if seen[base] == 1 else f"{base}_{seen[base]}")
    return out


def resolve_prefix(cfg: RunConfig, out: Optional[str], config_path: Optional[str]) -> Path:
    if out:
        return Path(out)
    if cfg.output:
        return Path(cfg.output)
    stem = Path(config_path).stem if config_path else "run"
    return Path(os.environ.get(OUT_ENV, DEFAULT_OUT_DIR)) / stem


class ScenarioFailure(Exception):
    def __init__(self, record: dict):
        super().__init__(record.get("message", ""))
        self.record = record


def run_config(cfg: RunConfig, prefix: Path, parallel: bool = False) -> tuple[int, dict]:
    """Run every scenario, write outputs under ``prefix`` and return ``(exit code, summary)``."""
    names = _names(cfg)
    jobs = [(sc.kind, sc.params.model_dump(), derived_seed(cfg.seed, k)) for k, sc in enumerate(cfg.scenarios)]
    if parallel and len(jobs) > 1:
        with ProcessPoolExecutor() as pool:
            results = list(pool.map(_execute, jobs))
    else:
        results = [_execute(j) for j in jobs]

    prefix.parent.mkdir(parents=True, exist_ok=True)
    summary = {"schema_version": SCHEMA_VERSION, "seed": cfg.seed, "config": cfg.model_dump(mode="json"),
               "scenarios": [], "passed": True}
    errors = failures = False
    for name, (kind, params, seed), res in zip(names, jobs, results):
        entry = {"name": name, "kind": kind, "seed": seed, "inputs": params}
        if "error" in res:
            entry["error"] = {"type": res["error"], "message": res["message"]}
            entry["passed"] = False
            summary["scenarios"].append(entry)
            summary["passed"] = False
            errors = True
            continue
        files = []
        for suffix, (header, rows) in res["tables"].items():
            path = prefix.with_name(f"{prefix.name}.{name}{'.' + suffix if suffix else ''}.csv")
            write_csv(path, header, rows)
            files.append(path.name)
        entry.update(files=files, derived=res["derived"], invariants=res["invariants"],
                     passed=all(res["invariants"].values()))
        if not entry["passed"]:
            summary["passed"] = False
            failures = True
        summary["scenarios"].append(entry)
    write_json(prefix.with_name(f"{prefix.name}.summary.json"), summary)
    # a scenario that could not run outranks one that ran and failed a check
    code = EXIT_NUMERIC if errors else EXIT_VERIFY if failures else EXIT_OK
    return code, summary


DETERMINISM_CONFIGS = [
    {"kind": "fig1", "params": {"n_samples": 200}},
    {"kind": "aav", "params": {"g_values": [1e-2, 1e-4], "n_events": 20000}},
    {"kind": "pointer", "params": {"n_g": 3}},
    {"kind": "genmeas", "params": {"model": "qubit", "n_events": 5000}},
    {"kind": "quasiprob", "params": {"n_scenarios": 200}},
    {"kind": "wigner", "params": {"n": 128, "span": 30.0}},
    {"kind": "cqed", "params": {"periods": 2.0, "n_t": 21}},
    {"kind": "hjac", "params": {"n": 128, "steps": 20, "every": 10}},
]


def determinism_check(seed: int = 1234) -> tuple[list[str], list[str]]:
    """Run each scenario kind twice into separate directories and compare bytes."""
    cfg = parse_config({"schema_version": SCHEMA_VERSION, "seed": seed, "scenarios": DETERMINISM_CONFIGS})
    with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
        run_config(cfg, Path(a) / "det")
        run_config(cfg, Path(b) / "det")
        names_a = sorted(p.name for p in Path(a).iterdir())
        names_b = sorted(p.name for p in Path(b).iterdir())
        mismatched = sorted(set(names_a) ^ set(names_b))
        for n in sorted(set(names_a) & set(names_b)):
            if (Path(a) / n).read_bytes() != (Path(b) / n).read_bytes():
                mismatched.append(n)
    return mismatched, [c["kind"] for c in DETERMINISM_CONFIGS]


def _error(code: int, kind: str, message: str) -> int:
    sys.stderr.write(dumps({"error": kind, "message": message, "exit_code": code}))
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="weakvalues", description="Weak-value scenario runner")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the scenarios in a JSON config")
    run.add_argument("config")
    run.add_argument("--out", help="output path prefix")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--parallel", action="store_true", help="run independent scenarios in parallel")
    va = sub.add_parser("verify-all", help="run every acceptance check")
    va.add_argument("--out", help="output path prefix")
    va.add_argument("--seed", type=int, default=0)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = load_config(args.config)
            if args.seed is not None:
                data = cfg.model_dump(mode="json")
                data["seed"] = args.seed
                cfg = parse_config(data)
            prefix = resolve_prefix(cfg, args.out, args.config)
            parallel = args.parallel
        else:
            cfg = parse_config({"schema_version": SCHEMA_VERSION, "seed": args.seed, "kind": "verify-all"})
            prefix = resolve_prefix(cfg, args.out, "verify_all")
            parallel = False
    except ConfigError as exc:
        return _error(EXIT_CONFIG, "ConfigError", str(exc))

    code, summary = run_config(cfg, prefix, parallel)
    for entry in summary["scenarios"]:
        if "error" in entry:
            _error(EXIT_NUMERIC, entry["error"]["type"], f"{entry['name']}: {entry['error']['message']}")
            continue
        status = "ok" if entry["passed"] else "FAILED"
        print(f"{entry['name']}: {status} ({', '.join(entry['files'])})")
        if entry["kind"] == "verify-all":
            for c in entry["derived"]["criteria"]:
                print(f"  criterion {c['id']:2d} {'PASS' if c['passed'] else 'FAIL'} {c['title']}")
    print(f"summary: {prefix.with_name(prefix.name + '.summary.json')}")
    return code


if __name__ == "__main__":
    sys.exit(main())
